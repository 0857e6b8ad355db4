// Command-line front end: model loading, deterministic artifact writing,
// and parallel sweep orchestration over the library.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netform/netform.hpp"

namespace {

using nlohmann::json;
using namespace netform;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

struct CommonFlags {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> events;
    int workers = 0;
};

int effective_workers(int flag_workers, const ExecutionSpec& exec) {
    if (const char* env = std::getenv("NETFORM_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    if (flag_workers > 0) return flag_workers;
    return exec.workers;
}

/// Canonical run description: config file text plus overriding flags, in a
/// fixed order. Its hash is stamped into every artifact, so identical runs
/// produce byte-identical outputs.
struct RunStamp {
    std::string description;
    std::string hash;

    void add(std::string_view key, std::string_view value) {
        description += key;
        description += '=';
        description += value;
        description += ';';
    }
    void finish(std::string_view command) {
        description = std::string(command) + ";" + description;
        hash = hex16(fnv1a64(description));
    }
};

json summary_base(std::string_view command, const RunStamp& stamp) {
    return json{{"command", std::string(command)}, {"config", stamp.hash}};
}

void emit(const json& summary) { std::cout << summary.dump() << "\n"; }

std::string dyad_text(int n_nodes, int index) {
    const Dyad d = dyad_at(n_nodes, index);
    return std::to_string(d.source + 1) + "->" + std::to_string(d.target + 1);
}

// -------------------------------------------------------------------------
// check-potential

int run_check_potential(const std::string& table_path, int nodes, double tol,
                        const std::string& out) {
    const std::string table_text = read_file(table_path);
    RunStamp stamp;
    stamp.add("table", table_text);
    stamp.add("nodes", std::to_string(nodes));
    stamp.add("tol", format_double(tol));
    stamp.finish("check-potential");

    const UtilityTable u = read_utility_csv(table_text, nodes);
    const ConservativenessReport report = check_conservative(u, tol);

    json body{{"is_conservative", report.is_conservative},
              {"worst_residual", report.worst_residual},
              {"tolerance", tol},
              {"nodes", nodes}};
    if (report.witness) {
        body["witness"] = {
            {"network_hex", DirectedNetwork::from_code(nodes, report.witness->network_code).to_hex()},
            {"dyad_a", dyad_text(nodes, report.witness->dyad_a)},
            {"dyad_b", dyad_text(nodes, report.witness->dyad_b)}};
    }
    json summary = summary_base("check-potential", stamp);
    summary["is_conservative"] = report.is_conservative;
    summary["worst_residual"] = report.worst_residual;
    if (!out.empty()) {
        write_file_atomic(out, body.dump(2) + "\n");
        summary["outputs"] = {out};
    } else {
        summary["report"] = body;
    }
    emit(summary);
    return kExitOk;
}

// -------------------------------------------------------------------------
// model plumbing shared by the dynamics commands

struct FiniteModel {
    int nodes = 0;
    double sigma = 0.5;
    MarginalUtility marginal;
    // keep the owning objects alive
    std::shared_ptr<void> keep_alive;
    std::vector<Motif> tracked_motifs;
};

std::vector<int> balanced_assignment(int nodes, int types) {
    std::vector<int> assignment(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i)
        assignment[static_cast<std::size_t>(i)] =
            static_cast<int>((static_cast<long long>(i) * types) / nodes);
    return assignment;
}

FiniteModel finite_model(const ConfigFile& cfg) {
    ModelSpec spec = model_from_config(cfg);
    FiniteModel out;
    if (auto* motifs = std::get_if<MotifsModelSpec>(&spec)) {
        if (motifs->nodes < 2) throw ConfigError("[model] nodes is required for finite-N runs");
        auto model = std::make_shared<MotifModel>(motifs->model);
        out.nodes = motifs->nodes;
        out.sigma = model->sigma();
        out.marginal = marginal_from_motifs(*model);
        out.tracked_motifs = model->motifs();
        out.keep_alive = model;
        return out;
    }
    if (auto* table = std::get_if<TableModelSpec>(&spec)) {
        auto u = std::make_shared<UtilityTable>(std::move(table->utilities));
        out.nodes = u->n_nodes();
        out.sigma = table->sigma;
        out.marginal = marginal_from_table(*u);
        out.keep_alive = u;
        return out;
    }
    if (auto* typed = std::get_if<TypedModelSpec>(&spec)) {
        if (typed->nodes < 2) throw ConfigError("[model] nodes is required for finite-N runs");
        auto model = std::make_shared<TypedModel>(std::move(typed->model));
        std::vector<int> assignment = typed->type_assignment.empty()
                                          ? balanced_assignment(typed->nodes, model->n_types())
                                          : typed->type_assignment;
        if (assignment.size() != static_cast<std::size_t>(typed->nodes))
            throw ConfigError("type_assignment length must equal [model] nodes");
        out.nodes = typed->nodes;
        out.sigma = model->sigma();
        out.tracked_motifs = model->motifs().motifs();
        auto holder = std::make_shared<std::pair<std::shared_ptr<TypedModel>, std::vector<int>>>(
            model, std::move(assignment));
        out.marginal = [holder](const DirectedNetwork& g, Dyad d) {
            return typed_marginal_utility(*holder->first, holder->second, g, d);
        };
        out.keep_alive = holder;
        return out;
    }
    throw ConfigError("this command needs a motifs, table, or typed model");
}

PotentialTable finite_potential(const ConfigFile& cfg) {
    ModelSpec spec = model_from_config(cfg);
    if (auto* motifs = std::get_if<MotifsModelSpec>(&spec)) {
        if (motifs->nodes < 2) throw ConfigError("[model] nodes is required");
        return motif_potential_table(motifs->model, motifs->nodes);
    }
    if (auto* table = std::get_if<TableModelSpec>(&spec))
        return potential_from_utilities(table->utilities);
    throw ConfigError("stationary computations need a motifs or table model");
}

InitialState parse_initial(const std::string& text, std::optional<DirectedNetwork>& network,
                           int nodes) {
    if (text == "empty" || text.empty()) return InitialState::Empty;
    if (text == "complete") return InitialState::Complete;
    if (text == "random") return InitialState::RandomHalf;
    network = DirectedNetwork::parse(text);
    if (network->n_nodes() != nodes) throw ConfigError("initial network has wrong node count");
    return InitialState::Empty;
}

// -------------------------------------------------------------------------
// simulate

int run_simulate(const CommonFlags& flags, const std::string& initial_text, int replicas_flag,
                 std::uint64_t burn_in_flag, std::uint64_t thinning_flag, double time_flag) {
    const ConfigFile cfg = ConfigFile::load(flags.config_path);
    const ExecutionSpec exec = execution_from_config(cfg);
    RunStamp stamp;
    stamp.add("config", read_file(flags.config_path));
    if (flags.seed) stamp.add("seed", std::to_string(*flags.seed));
    if (flags.events) stamp.add("events", std::to_string(*flags.events));
    if (!initial_text.empty()) stamp.add("initial", initial_text);
    if (replicas_flag > 0) stamp.add("replicas", std::to_string(replicas_flag));
    if (burn_in_flag) stamp.add("burn_in", std::to_string(burn_in_flag));
    if (thinning_flag) stamp.add("thinning", std::to_string(thinning_flag));
    if (time_flag > 0) stamp.add("time", format_double(time_flag));
    stamp.finish("simulate");

    FiniteModel model = finite_model(cfg);
    SimConfig sim;
    sim.n_nodes = model.nodes;
    sim.marginal = model.marginal;
    sim.sigma = model.sigma;
    sim.seed = flags.seed.value_or(exec.seed);
    sim.n_events = flags.events.value_or(exec.events);
    sim.time_horizon = time_flag > 0 ? time_flag : exec.time_horizon;
    sim.burn_in = burn_in_flag ? burn_in_flag : exec.burn_in;
    sim.thinning = thinning_flag ? thinning_flag : exec.thinning;
    sim.tracked_motifs = model.tracked_motifs;
    sim.initial = parse_initial(initial_text, sim.initial_network, model.nodes);

    const int replicas = replicas_flag > 0 ? replicas_flag : exec.replicas;
    if (replicas < 1) throw ConfigError("replicas must be at least 1");
    const int workers = effective_workers(flags.workers, exec);

    std::vector<TrajectoryStats> stats(static_cast<std::size_t>(replicas), TrajectoryStats{});
    parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t r) {
        SimConfig local = sim;
        local.stream = r;
        stats[r] = simulate(local);
    });

    json replicas_json = json::array();
    for (std::size_t r = 0; r < stats.size(); ++r) {
        const TrajectoryStats& s = stats[r];
        replicas_json.push_back(
            {{"stream", r},
             {"n_events", s.n_events},
             {"n_toggles", s.n_toggles},
             {"acceptance_rate", s.acceptance_rate()},
             {"total_time", s.total_time},
             {"final_state_hex", s.final_state.to_hex()},
             {"final_edge_density",
              static_cast<double>(s.final_state.edge_count()) / s.final_state.dyad_count()}});
    }

    json summary = summary_base("simulate", stamp);
    summary["replicas"] = replicas_json;
    std::vector<std::string> outputs;
    if (!flags.out.empty()) {
        json body = summary;
        const std::string stats_path = flags.out + "_stats.json";
        write_file_atomic(stats_path, body.dump(2) + "\n");
        outputs.push_back(stats_path);
        if (sim.thinning > 0) {
            Csv csv(stamp.hash);
            std::string header = "replica,event,time,edge_density";
            for (std::size_t m = 0; m < sim.tracked_motifs.size(); ++m)
                header += ",motif_" + std::to_string(m);
            csv.header(header);
            for (std::size_t r = 0; r < stats.size(); ++r)
                for (const TimeSeriesRow& row : stats[r].series) {
                    csv.field(static_cast<std::uint64_t>(r)).field(row.event).field(row.time).field(row.edge_density);
                    for (double d : row.motif_densities) csv.field(d);
                    csv.end_row();
                }
            const std::string series_path = flags.out + "_series.csv";
            write_file_atomic(series_path, csv.str());
            outputs.push_back(series_path);
        }
        summary["outputs"] = outputs;
    }
    emit(summary);
    return kExitOk;
}

// -------------------------------------------------------------------------
// exact-stationary / transient

int run_exact_stationary(const CommonFlags& flags) {
    const ConfigFile cfg = ConfigFile::load(flags.config_path);
    RunStamp stamp;
    stamp.add("config", read_file(flags.config_path));
    stamp.finish("exact-stationary");

    const PotentialTable phi = finite_potential(cfg);
    const double sigma = cfg.get_double("model", "sigma", 0.5);
    const StationaryDistribution pi = exact_stationary(phi, sigma);

    const int nodes = phi.n_nodes();
    Csv csv(stamp.hash);
    csv.header("network_hex,probability");
    std::uint64_t argmax = 0;
    for (std::uint64_t g = 0; g < pi.size(); ++g) {
        csv.field(DirectedNetwork::from_code(nodes, g).to_hex()).field(pi[g]);
        csv.end_row();
        if (pi[g] > pi[argmax]) argmax = g;
    }
    json summary = summary_base("exact-stationary", stamp);
    summary["states"] = pi.size();
    summary["argmax_hex"] = DirectedNetwork::from_code(nodes, argmax).to_hex();
    summary["argmax_probability"] = pi[argmax];
    if (flags.out.empty()) throw ConfigError("exact-stationary needs --out");
    write_file_atomic(flags.out, csv.str());
    summary["outputs"] = {flags.out};
    emit(summary);
    return kExitOk;
}

int run_transient(const CommonFlags& flags, double t, const std::string& init_text) {
    const ConfigFile cfg = ConfigFile::load(flags.config_path);
    RunStamp stamp;
    stamp.add("config", read_file(flags.config_path));
    stamp.add("t", format_double(t));
    stamp.add("init", init_text);
    stamp.finish("transient");

    ModelSpec spec = model_from_config(cfg);
    std::optional<TransientModel> model;
    if (auto* motifs = std::get_if<MotifsModelSpec>(&spec)) {
        if (motifs->nodes < 2) throw ConfigError("[model] nodes is required");
        model = TransientModel{motif_utility_table(motifs->model, motifs->nodes),
                               ConstantRates{1.0}, motifs->model.sigma()};
    } else if (auto* table = std::get_if<TableModelSpec>(&spec)) {
        model = TransientModel{std::move(table->utilities), ConstantRates{1.0}, table->sigma};
    } else {
        throw ConfigError("transient needs a motifs or table model");
    }
    const int nodes = model->utilities.n_nodes();

    NetworkFunction pi0(nodes);
    if (init_text == "uniform" || init_text.empty()) {
        for (std::uint64_t g = 0; g < pi0.size(); ++g) pi0[g] = 1.0 / static_cast<double>(pi0.size());
    } else if (init_text == "empty") {
        pi0[0] = 1.0;
    } else if (init_text == "complete") {
        pi0[pi0.size() - 1] = 1.0;
    } else {
        pi0.at(DirectedNetwork::parse(init_text)) = 1.0;
    }

    const NetworkFunction pi_t = transient_distribution(pi0, t, *model);
    Csv csv(stamp.hash);
    csv.header("network_hex,probability");
    double mass = 0.0;
    for (std::uint64_t g = 0; g < pi_t.size(); ++g) {
        csv.field(DirectedNetwork::from_code(nodes, g).to_hex()).field(pi_t[g]);
        csv.end_row();
        mass += pi_t[g];
    }
    json summary = summary_base("transient", stamp);
    summary["t"] = t;
    summary["mass"] = mass;
    if (flags.out.empty()) throw ConfigError("transient needs --out");
    write_file_atomic(flags.out, csv.str());
    summary["outputs"] = {flags.out};
    emit(summary);
    return kExitOk;
}

// -------------------------------------------------------------------------
// eap-solve / phase-sweep

EAPProblem eap_problem_from_config(const ConfigFile& cfg) {
    ModelSpec spec = model_from_config(cfg);
    auto* motifs = std::get_if<MotifsModelSpec>(&spec);
    if (!motifs) throw ConfigError("this command needs a motifs model");
    return EAPProblem::from_model(motifs->model);
}

json solution_json(const EAPSolution& sol) {
    json maxima = json::array();
    for (const LocalMaximum& m : sol.local_maxima) maxima.push_back({{"rho", m.rho}, {"gamma", m.gamma}});
    return json{{"rho_star", sol.rho_star},
                {"zeta", sol.zeta},
                {"unique", sol.unique},
                {"local_maxima", maxima}};
}

int run_eap_solve(const CommonFlags& flags) {
    const ConfigFile cfg = ConfigFile::load(flags.config_path);
    RunStamp stamp;
    stamp.add("config", read_file(flags.config_path));
    stamp.finish("eap-solve");

    const EAPSolution sol = solve_eap(eap_problem_from_config(cfg));
    json summary = summary_base("eap-solve", stamp);
    summary.update(solution_json(sol));
    if (!flags.out.empty()) {
        write_file_atomic(flags.out, summary.dump(2) + "\n");
        summary["outputs"] = {flags.out};
    }
    emit(summary);
    return kExitOk;
}

struct SweepSpec {
    std::string target;             // "value:<index>" or "sigma"
    std::vector<double> path;
    std::vector<int> chains;        // optional chain-length axis
    std::string secondary_target;   // optional outer axis: "value:<index>" or "sigma"
    std::vector<double> secondary_values;
};

SweepSpec sweep_spec_from_config(const ConfigFile& cfg) {
    SweepSpec spec;
    spec.target = cfg.has("sweep", "target") ? cfg.get_string("sweep", "target") : "value:0";
    const double from = cfg.get_double("sweep", "from");
    const double to = cfg.get_double("sweep", "to");
    const std::int64_t steps = cfg.get_int("sweep", "steps");
    if (steps < 0) throw ConfigError("[sweep] steps must be nonnegative");
    for (std::int64_t k = 0; k < steps; ++k)
        spec.path.push_back(from + (to - from) * static_cast<double>(k) / std::max<std::int64_t>(steps - 1, 1));
    if (cfg.has("sweep", "chains"))
        for (double c : cfg.get_doubles("sweep", "chains")) spec.chains.push_back(static_cast<int>(c));
    if (cfg.has("sweep", "secondary_target")) {
        spec.secondary_target = cfg.get_string("sweep", "secondary_target");
        spec.secondary_values = cfg.get_doubles("sweep", "secondary_values");
        if (!spec.chains.empty())
            throw ConfigError("[sweep] chains and secondary_target cannot be combined");
        if (spec.secondary_target == spec.target)
            throw ConfigError("[sweep] secondary_target must differ from target");
    }
    return spec;
}

/// Re-parametrizes a motif model along a named target axis.
MotifModel apply_target(const MotifModel& base, const std::string& target, double x) {
    if (target == "sigma") return MotifModel(base.motifs(), base.values(), x);
    if (target.rfind("value:", 0) == 0) {
        const std::size_t index = static_cast<std::size_t>(
            detail::parse_int(std::string_view(target).substr(6), "sweep value index"));
        if (index >= base.values().size())
            throw ConfigError("[sweep] value index out of range");
        std::vector<double> values = base.values();
        values[index] = x;
        return MotifModel(base.motifs(), std::move(values), base.sigma());
    }
    throw ConfigError("[sweep] target must be 'value:<index>' or 'sigma'");
}

/// Builds the parameterized problem family for a sweep target, with an
/// optional chain-length or secondary-parameter outer axis.
std::function<EAPProblem(double)> sweep_family(const ConfigFile& cfg, const SweepSpec& spec,
                                               std::optional<int> chain_length,
                                               std::optional<double> secondary_value) {
    if (chain_length) {
        const double sigma = cfg.get_double("model", "sigma", 0.5);
        const int edges = *chain_length - 1;
        if (edges < 1) throw ConfigError("chain length must be at least 2");
        const double beta = (1.0 - sigma) / sigma;
        return [edges, beta](double v) { return EAPProblem({{v, edges, 1}}, beta); };
    }
    ModelSpec model_spec = model_from_config(cfg);
    auto* motifs = std::get_if<MotifsModelSpec>(&model_spec);
    if (!motifs) throw ConfigError("phase-sweep needs a motifs model");
    MotifModel base = motifs->model;
    if (secondary_value) base = apply_target(base, spec.secondary_target, *secondary_value);

    return [base, target = spec.target](double p) {
        return EAPProblem::from_model(apply_target(base, target, p));
    };
}

int run_phase_sweep(const CommonFlags& flags) {
    const ConfigFile cfg = ConfigFile::load(flags.config_path);
    const ExecutionSpec exec = execution_from_config(cfg);
    RunStamp stamp;
    stamp.add("config", read_file(flags.config_path));
    stamp.finish("phase-sweep");

    const SweepSpec spec = sweep_spec_from_config(cfg);
    SweepOptions opt;
    opt.workers = effective_workers(flags.workers, exec);

    struct Axis {
        std::string label; // chain length or secondary value, empty for none
        SweepResult result;
    };
    std::vector<Axis> axes;
    std::string axis_column;
    if (!spec.chains.empty()) {
        axis_column = "chain";
        for (int length : spec.chains)
            axes.push_back({std::to_string(length),
                            sweep_phase(sweep_family(cfg, spec, length, std::nullopt), spec.path, opt)});
    } else if (!spec.secondary_values.empty()) {
        axis_column = "secondary";
        for (double sv : spec.secondary_values)
            axes.push_back({format_double(sv),
                            sweep_phase(sweep_family(cfg, spec, std::nullopt, sv), spec.path, opt)});
    } else {
        axes.push_back({"", sweep_phase(sweep_family(cfg, spec, std::nullopt, std::nullopt),
                                        spec.path, opt)});
    }

    if (flags.out.empty()) throw ConfigError("phase-sweep needs --out");
    const bool with_axis = !axis_column.empty();
    Csv sweep_csv(stamp.hash);
    sweep_csv.header(std::string(with_axis ? axis_column + "," : "") +
                     "parameter,rho_star,zeta,n_local_maxima,unique,rho_low,rho_high");
    for (const Axis& axis : axes)
        for (const SweepPoint& pt : axis.result.points) {
            if (with_axis) sweep_csv.field(axis.label);
            double rho_low = pt.solution.local_maxima.front().rho;
            double rho_high = pt.solution.local_maxima.back().rho;
            sweep_csv.field(pt.param)
                .field(pt.solution.rho_star)
                .field(pt.solution.zeta)
                .field(static_cast<std::uint64_t>(pt.solution.local_maxima.size()))
                .field(pt.solution.unique ? 1 : 0)
                .field(rho_low)
                .field(rho_high);
            sweep_csv.end_row();
        }
    const std::string sweep_path = flags.out + "_sweep.csv";
    write_file_atomic(sweep_path, sweep_csv.str());

    Csv trans_csv(stamp.hash);
    trans_csv.header(std::string(with_axis ? axis_column + "," : "") +
                     "param_lo,param_hi,critical,rho_low,rho_high,gap");
    std::size_t n_transitions = 0;
    for (const Axis& axis : axes)
        for (const TransitionCandidate& t : axis.result.transitions()) {
            if (with_axis) trans_csv.field(axis.label);
            trans_csv.field(t.param_lo).field(t.param_hi).field(t.critical()).field(t.rho_lo).field(t.rho_hi).field(t.gap());
            trans_csv.end_row();
            ++n_transitions;
        }
    const std::string trans_path = flags.out + "_transitions.csv";
    write_file_atomic(trans_path, trans_csv.str());

    json summary = summary_base("phase-sweep", stamp);
    summary["n_points"] = spec.path.size() * std::max<std::size_t>(axes.size(), 1);
    summary["n_transitions"] = n_transitions;
    summary["outputs"] = {sweep_path, trans_path};
    emit(summary);
    return kExitOk;
}

// -------------------------------------------------------------------------
// kernel-solve / trade

int run_kernel_solve(const CommonFlags& flags) {
    const ConfigFile cfg = ConfigFile::load(flags.config_path);
    RunStamp stamp;
    stamp.add("config", read_file(flags.config_path));
    stamp.finish("kernel-solve");

    ModelSpec spec = model_from_config(cfg);
    auto* typed = std::get_if<TypedModelSpec>(&spec);
    if (!typed) throw ConfigError("kernel-solve needs a typed model");
    const KernelSolution sol = solve_kernel(typed->model);

    if (flags.out.empty()) throw ConfigError("kernel-solve needs --out");
    Csv csv(stamp.hash);
    csv.header("theta,theta_prime,psi");
    for (int s = 0; s < sol.kernel.n_types(); ++s)
        for (int t = 0; t < sol.kernel.n_types(); ++t) {
            csv.field(s).field(t).field(sol.kernel.at(s, t));
            csv.end_row();
        }
    const std::string kernel_path = flags.out + "_kernel.csv";
    write_file_atomic(kernel_path, csv.str());

    json summary = summary_base("kernel-solve", stamp);
    summary["zeta"] = sol.zeta;
    summary["converged"] = sol.converged;
    summary["n_local_optima"] = sol.local_optima.size();
    summary["outputs"] = {kernel_path};
    emit(summary);
    return kExitOk;
}

int run_trade(int locations, double gamma, double v_min, double v_max, int v_steps, double sigma,
              const std::string& out, int workers_flag) {
    RunStamp stamp;
    stamp.add("L", std::to_string(locations));
    stamp.add("gamma", format_double(gamma));
    stamp.add("v_min", format_double(v_min));
    stamp.add("v_max", format_double(v_max));
    stamp.add("v_steps", std::to_string(v_steps));
    stamp.add("sigma", format_double(sigma));
    stamp.finish("trade");

    TradeModel model;
    model.locations = locations;
    model.gamma = gamma;
    model.v = v_max;
    model.sigma = sigma;
    model.validate();

    std::vector<double> path;
    for (int k = 0; k < v_steps; ++k)
        path.push_back(v_min + (v_max - v_min) * static_cast<double>(k) / std::max(v_steps - 1, 1));

    SweepOptions opt;
    opt.workers = effective_workers(workers_flag, ExecutionSpec{});
    const TradeSweep sweep = trade_sweep(model, path, opt);

    if (out.empty()) throw ConfigError("trade needs --out");
    Csv density_csv(stamp.hash);
    density_csv.header("v,total_density");
    for (std::size_t k = 0; k < sweep.v_path.size(); ++k) {
        density_csv.field(sweep.v_path[k]).field(sweep.total_densities[k]);
        density_csv.end_row();
    }
    const std::string density_path = out + "_density.csv";
    write_file_atomic(density_path, density_csv.str());

    Csv kernel_csv(stamp.hash);
    kernel_csv.header("v,distance,psi,ambiguous");
    for (const TradeSweep::ProfileRow& row : sweep.profile()) {
        kernel_csv.field(row.v).field(row.distance).field(row.psi).field(row.ambiguous ? 1 : 0);
        kernel_csv.end_row();
    }
    const std::string kernel_path = out + "_kernel.csv";
    write_file_atomic(kernel_path, kernel_csv.str());

    std::size_t ring_transitions = 0;
    for (const TradeSweepRing& ring : sweep.rings) ring_transitions += ring.sweep.transitions().size();

    json summary = summary_base("trade", stamp);
    summary["rings"] = sweep.rings.size();
    summary["ring_transitions"] = ring_transitions;
    summary["outputs"] = {density_path, kernel_path};
    emit(summary);
    return kExitOk;
}

int error_json(int code, std::string_view kind, const std::string& message) {
    json err{{"error", {{"kind", std::string(kind)}, {"message", message}, {"exit_code", code}}}};
    std::cout << err.dump() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"strategic network formation: game algebra, link-switching dynamics, "
                 "mean-field phase analysis, circular-city trade"};
    app.require_subcommand(1);

    CommonFlags flags;

    // check-potential
    auto* check = app.add_subcommand("check-potential", "conservativeness report for a utility table");
    std::string table_path;
    int check_nodes = 0;
    double check_tol = 1e-9;
    std::string check_out;
    check->add_option("--table", table_path, "utility CSV (agent,network_hex,value)")->required();
    check->add_option("--nodes", check_nodes, "node count N")->required();
    check->add_option("--tol", check_tol, "tolerance");
    check->add_option("--out", check_out, "write the JSON report here");

    // simulate
    auto* sim = app.add_subcommand("simulate", "event-driven link-switching simulation");
    std::string sim_initial;
    int sim_replicas = 0;
    std::uint64_t sim_burn_in = 0, sim_thinning = 0;
    double sim_time = 0.0;
    std::uint64_t sim_seed = 0, sim_events = 0;
    sim->add_option("--config", flags.config_path, "model config file")->required();
    sim->add_option("--out", flags.out, "output prefix");
    sim->add_option("--seed", sim_seed, "rng seed (overrides config)");
    sim->add_option("--events", sim_events, "event horizon (overrides config)");
    sim->add_option("--time", sim_time, "time horizon (overrides events)");
    sim->add_option("--initial", sim_initial, "empty | complete | random | 'N=..; edges=..'");
    sim->add_option("--replicas", sim_replicas, "independent replicas (split rng streams)");
    sim->add_option("--burn-in", sim_burn_in, "events discarded before recording");
    sim->add_option("--thinning", sim_thinning, "time-series row every k events");
    sim->add_option("--workers", flags.workers, "worker threads");

    // exact-stationary
    auto* stat = app.add_subcommand("exact-stationary", "Gibbs stationary distribution over G_N");
    stat->add_option("--config", flags.config_path, "model config file")->required();
    stat->add_option("--out", flags.out, "output CSV path")->required();

    // transient
    auto* trans = app.add_subcommand("transient", "Kolmogorov-forward distribution at time t");
    double trans_t = 0.0;
    std::string trans_init = "uniform";
    trans->add_option("--config", flags.config_path, "model config file")->required();
    trans->add_option("--t", trans_t, "time")->required();
    trans->add_option("--init", trans_init, "uniform | empty | complete | 'N=..; edges=..'");
    trans->add_option("--out", flags.out, "output CSV path")->required();

    // eap-solve
    auto* eap_cmd = app.add_subcommand("eap-solve", "maximize the entropy-adjusted potential");
    eap_cmd->add_option("--config", flags.config_path, "model config file")->required();
    eap_cmd->add_option("--out", flags.out, "optional JSON output path");

    // phase-sweep
    auto* sweep_cmd = app.add_subcommand("phase-sweep", "sweep a parameter path and flag jumps");
    sweep_cmd->add_option("--config", flags.config_path, "model+sweep config file")->required();
    sweep_cmd->add_option("--out", flags.out, "output prefix")->required();
    sweep_cmd->add_option("--workers", flags.workers, "worker threads");

    // kernel-solve
    auto* kernel_cmd = app.add_subcommand("kernel-solve", "typed-kernel coordinate ascent");
    kernel_cmd->add_option("--config", flags.config_path, "typed model config file")->required();
    kernel_cmd->add_option("--out", flags.out, "output prefix")->required();

    // trade
    auto* trade_cmd = app.add_subcommand("trade", "circular-city trade sweep");
    int trade_L = 100, trade_steps = 200, trade_workers = 0;
    double trade_gamma = 10.0, trade_vmin = 0.5, trade_vmax = 8.0, trade_sigma = 0.25;
    trade_cmd->add_option("--L", trade_L, "number of locations");
    trade_cmd->add_option("--gamma", trade_gamma, "cost per unit distance");
    trade_cmd->add_option("--v-min", trade_vmin, "smallest gains-from-trade value");
    trade_cmd->add_option("--v-max", trade_vmax, "largest gains-from-trade value");
    trade_cmd->add_option("--v-steps", trade_steps, "grid size");
    trade_cmd->add_option("--sigma", trade_sigma, "choice noise");
    trade_cmd->add_option("--out", flags.out, "output prefix")->required();
    trade_cmd->add_option("--workers", trade_workers, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return error_json(kExitConfig, "cli", e.what());
    }

    try {
        if (*check) return run_check_potential(table_path, check_nodes, check_tol, check_out);
        if (*sim) {
            if (sim->count("--seed")) flags.seed = sim_seed;
            if (sim->count("--events")) flags.events = sim_events;
            return run_simulate(flags, sim_initial, sim_replicas, sim_burn_in, sim_thinning, sim_time);
        }
        if (*stat) return run_exact_stationary(flags);
        if (*trans) return run_transient(flags, trans_t, trans_init);
        if (*eap_cmd) return run_eap_solve(flags);
        if (*sweep_cmd) return run_phase_sweep(flags);
        if (*kernel_cmd) return run_kernel_solve(flags);
        if (*trade_cmd)
            return run_trade(trade_L, trade_gamma, trade_vmin, trade_vmax, trade_steps, trade_sigma,
                             flags.out, trade_workers);
        return error_json(kExitConfig, "cli", "unknown subcommand");
    } catch (const ConfigError& e) {
        return error_json(kExitConfig, "config", e.what());
    } catch (const InvalidInputError& e) {
        return error_json(kExitConfig, "input", e.what());
    } catch (const InfeasibleSizeError& e) {
        return error_json(kExitInfeasible, "infeasible", e.what());
    } catch (const NumericalError& e) {
        return error_json(kExitNumerical, "numerical", e.what());
    } catch (const std::exception& e) {
        return error_json(kExitNumerical, "internal", e.what());
    }
}
