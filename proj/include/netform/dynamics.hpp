#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <variant>
#include <vector>

#include "netform/game.hpp"
#include "netform/motif.hpp"
#include "netform/network.hpp"
#include "netform/rng.hpp"

namespace netform {

/// Transient (explicit-generator) operations are capped at 4096 states.
inline constexpr int kMaxGeneratorNodes = 4;

struct ConstantRates {
    double lambda = 1.0;
};

struct PerDyadRates {
    std::vector<double> lambda; // indexed by canonical dyad index
};

/// Rate callables receive the network with the active dyad masked to
/// absent, so lambda_d(g) = lambda_d(tau_d(g)) holds by construction
/// rather than by runtime checking.
struct StateDependentRates {
    std::function<double(Dyad, const DirectedNetwork&)> rate;
};

using MeetingRates = std::variant<ConstantRates, PerDyadRates, StateDependentRates>;

inline double meeting_rate(const MeetingRates& rates, Dyad d, const DirectedNetwork& g) {
    return std::visit(
        [&](const auto& r) -> double {
            using T = std::decay_t<decltype(r)>;
            double lambda;
            if constexpr (std::is_same_v<T, ConstantRates>) {
                lambda = r.lambda;
            } else if constexpr (std::is_same_v<T, PerDyadRates>) {
                lambda = r.lambda.at(static_cast<std::size_t>(dyad_index(g.n_nodes(), d)));
            } else {
                DirectedNetwork masked = g;
                if (masked.has(d)) masked.toggle_in_place(d);
                lambda = r.rate(d, masked);
            }
            if (!(lambda > 0.0)) throw InvalidInputError("meeting rates must be positive");
            return lambda;
        },
        rates);
}

inline double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// p_d(g) = logistic(((1 - sigma) / sigma) * (U_i(tau_d(g)) - U_i(g)))
/// for i = source(d).
inline double switch_probability(double marginal_utility, double sigma) {
    if (!(sigma > 0.0 && sigma < 1.0))
        throw InvalidInputError("sigma must lie strictly inside (0,1)");
    return logistic((1.0 - sigma) / sigma * marginal_utility);
}

inline double switch_probability(const UtilityTable& u, const DirectedNetwork& g, Dyad d, double sigma) {
    const int bit = dyad_index(u.n_nodes(), d);
    return switch_probability(detail::marginal(u, d.source, g.code(), bit), sigma);
}

/// U_i(tau_d(g)) - U_i(g) for i = source(d); the single quantity the
/// dynamics need from a model.
using MarginalUtility = std::function<double(const DirectedNetwork&, Dyad)>;

inline MarginalUtility marginal_from_table(const UtilityTable& u) {
    return [&u](const DirectedNetwork& g, Dyad d) {
        return detail::marginal(u, d.source, g.code(), dyad_index(u.n_nodes(), d));
    };
}

inline MarginalUtility marginal_from_motifs(const MotifModel& model) {
    return [&model](const DirectedNetwork& g, Dyad d) {
        return motif_marginal_utility(model, g, d);
    };
}

/// pi(g) over G_N; nonnegative, sums to 1.
struct StationaryDistribution {
    NetworkFunction probabilities;

    explicit StationaryDistribution(int n_nodes) : probabilities(n_nodes) {}

    double operator[](std::uint64_t code) const { return probabilities[code]; }
    std::uint64_t size() const { return probabilities.size(); }
};

/// Gibbs measure pi(g) proportional to exp(((1 - sigma) / sigma) Phi(g)),
/// normalized via max subtraction. Independent of the meeting rates.
inline StationaryDistribution exact_stationary(const PotentialTable& phi, double sigma) {
    if (!(sigma > 0.0 && sigma < 1.0))
        throw InvalidInputError("sigma must lie strictly inside (0,1)");
    const double beta = (1.0 - sigma) / sigma;
    StationaryDistribution pi(phi.n_nodes());
    double hi = phi[0];
    for (std::uint64_t g = 1; g < phi.size(); ++g) hi = std::max(hi, phi[g]);
    double total = 0.0;
    for (std::uint64_t g = 0; g < phi.size(); ++g) {
        const double w = std::exp(beta * (phi[g] - hi));
        pi.probabilities[g] = w;
        total += w;
    }
    for (std::uint64_t g = 0; g < phi.size(); ++g) pi.probabilities[g] /= total;
    return pi;
}

enum class InitialState { Empty, Complete, RandomHalf };

struct SimConfig {
    int n_nodes = 0;
    MarginalUtility marginal;
    MeetingRates rates = ConstantRates{1.0};
    double sigma = 0.5;

    /// Event horizon; when time_horizon > 0 the run stops at that simulated
    /// time instead.
    std::uint64_t n_events = 0;
    double time_horizon = 0.0;

    std::optional<DirectedNetwork> initial_network;
    InitialState initial = InitialState::Empty;

    std::uint64_t seed = 1;
    std::uint64_t stream = 0;

    std::uint64_t burn_in = 0;   // events discarded before recording
    std::uint64_t thinning = 0;  // record a time-series row every k events (0 = off)
    std::vector<Motif> tracked_motifs;

    /// Visit-frequency recording; defaults to on when N(N-1) <= 20.
    std::optional<bool> record_visits;
};

struct TimeSeriesRow {
    std::uint64_t event = 0;
    double time = 0.0;
    double edge_density = 0.0;
    std::vector<double> motif_densities;
};

struct TrajectoryStats {
    std::uint64_t n_events = 0;
    std::uint64_t n_toggles = 0;
    double total_time = 0.0;
    DirectedNetwork final_state{2};

    /// Occupancy weighted by expected holding time, normalized to 1.
    /// Empty when visit recording is off.
    std::vector<double> visit_frequencies;

    std::vector<std::uint64_t> per_dyad_attempts;
    std::vector<std::uint64_t> per_dyad_toggles;

    std::vector<TimeSeriesRow> series;

    double acceptance_rate() const {
        return n_events == 0 ? 0.0 : static_cast<double>(n_toggles) / static_cast<double>(n_events);
    }
};

/// Event-driven jump-chain simulation: with total rate Lambda(g), pick a
/// dyad with probability lambda_d(g)/Lambda(g), toggle with probability
/// p_d(g), accumulate an exponential holding time. Deterministic given
/// (seed, stream).
inline TrajectoryStats simulate(const SimConfig& cfg) {
    if (cfg.n_nodes < 2) throw InvalidInputError("simulation needs at least 2 nodes");
    if (cfg.n_events == 0 && !(cfg.time_horizon > 0.0))
        throw InvalidInputError("horizon must be positive (events or time)");
    if (!cfg.marginal) throw InvalidInputError("simulation needs a marginal-utility model");
    if (!(cfg.sigma > 0.0 && cfg.sigma < 1.0))
        throw InvalidInputError("sigma must lie strictly inside (0,1)");

    const int n = cfg.n_nodes;
    const int n_dyads = n * (n - 1);
    const double beta = (1.0 - cfg.sigma) / cfg.sigma;
    Rng rng(cfg.seed, cfg.stream);

    DirectedNetwork g(n);
    if (cfg.initial_network) {
        if (cfg.initial_network->n_nodes() != n)
            throw InvalidInputError("initial network has wrong node count");
        g = *cfg.initial_network;
    } else if (cfg.initial == InitialState::Complete) {
        g = DirectedNetwork::complete(n);
    } else if (cfg.initial == InitialState::RandomHalf) {
        for (int k = 0; k < n_dyads; ++k)
            if (rng.next_bernoulli(0.5)) g.toggle_in_place(dyad_at(n, k));
    }

    const bool constant_rates = std::holds_alternative<ConstantRates>(cfg.rates);
    const bool record_visits = cfg.record_visits.value_or(n_dyads <= 20);

    TrajectoryStats stats;
    stats.per_dyad_attempts.assign(static_cast<std::size_t>(n_dyads), 0);
    stats.per_dyad_toggles.assign(static_cast<std::size_t>(n_dyads), 0);
    if (record_visits) {
        if (n_dyads > 20)
            throw InfeasibleSizeError("visit recording limited to N(N-1) <= 20 dyads");
        stats.visit_frequencies.assign(static_cast<std::size_t>(1) << n_dyads, 0.0);
    }

    std::vector<double> dyad_rates(static_cast<std::size_t>(n_dyads), 0.0);
    double time = 0.0;
    std::uint64_t event = 0;
    while (true) {
        if (cfg.time_horizon > 0.0) {
            if (time >= cfg.time_horizon) break;
        } else if (event >= cfg.n_events) {
            break;
        }

        double total_rate;
        int pick;
        if (constant_rates) {
            total_rate = std::get<ConstantRates>(cfg.rates).lambda * n_dyads;
            pick = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_dyads)));
        } else {
            total_rate = 0.0;
            for (int k = 0; k < n_dyads; ++k) {
                dyad_rates[static_cast<std::size_t>(k)] = meeting_rate(cfg.rates, dyad_at(n, k), g);
                total_rate += dyad_rates[static_cast<std::size_t>(k)];
            }
            double target = rng.next_unit() * total_rate;
            pick = n_dyads - 1;
            for (int k = 0; k < n_dyads; ++k) {
                target -= dyad_rates[static_cast<std::size_t>(k)];
                if (target < 0.0) { pick = k; break; }
            }
        }

        const bool recording = event >= cfg.burn_in;
        if (recording && record_visits)
            stats.visit_frequencies[g.code()] += 1.0 / total_rate;

        const Dyad d = dyad_at(n, pick);
        const double p = logistic(beta * cfg.marginal(g, d));
        const bool toggle = rng.next_bernoulli(p);
        if (recording) {
            ++stats.per_dyad_attempts[static_cast<std::size_t>(pick)];
            if (toggle) ++stats.per_dyad_toggles[static_cast<std::size_t>(pick)];
        }
        if (toggle) {
            g.toggle_in_place(d);
            if (recording) ++stats.n_toggles;
        }
        time += rng.next_exponential(total_rate);
        ++event;

        if (cfg.thinning > 0 && recording && (event - cfg.burn_in) % cfg.thinning == 0) {
            TimeSeriesRow row;
            row.event = event;
            row.time = time;
            row.edge_density = static_cast<double>(g.edge_count()) / n_dyads;
            for (const Motif& m : cfg.tracked_motifs)
                row.motif_densities.push_back(subgraph_density(m, g));
            stats.series.push_back(std::move(row));
        }
    }

    stats.n_events = event;
    stats.total_time = time;
    stats.final_state = g;
    if (record_visits) {
        const double mass = std::accumulate(stats.visit_frequencies.begin(),
                                            stats.visit_frequencies.end(), 0.0);
        if (mass > 0.0)
            for (double& f : stats.visit_frequencies) f /= mass;
    }
    return stats;
}

struct BalanceWitness {
    std::uint64_t network_code = 0;
    int dyad_a = 0;
    int dyad_b = 0;
};

struct BalanceReport {
    bool balanced = true;
    /// Worst Kolmogorov 4-cycle log-rate defect, in utility units
    /// (divided by (1 - sigma) / sigma).
    double worst_residual = 0.0;
    std::optional<BalanceWitness> witness;
    /// Worst |flow(g->g') - flow(g'->g)| / max flow against the Gibbs
    /// candidate; only set when the chain is balanced.
    std::optional<double> gibbs_flow_residual;
};

/// Kolmogorov's cycle criterion on all 4-cycles (two dyads toggled in both
/// orders); meeting rates cancel along these cycles. Balanced if and only
/// if the utilities are conservative, and the residual equals the
/// conservativeness defect.
inline BalanceReport verify_detailed_balance(const UtilityTable& u, const MeetingRates& rates,
                                             double sigma, double tol = 1e-8) {
    const int n = u.n_nodes();
    if (n > kMaxGeneratorNodes)
        throw InfeasibleSizeError("detailed-balance check limited to N <= 4");
    const int bits = n * (n - 1);
    const double beta = (1.0 - sigma) / sigma;

    auto log_p = [&](std::uint64_t g, int bit) {
        const double du = detail::marginal(u, dyad_at(n, bit).source, g, bit);
        const double x = beta * du;
        // log(logistic(x)) without overflow
        return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
    };

    BalanceReport report;
    for (std::uint64_t g = 0; g < network_space_size(n); ++g)
        for (int a = 0; a < bits; ++a)
            for (int b = a + 1; b < bits; ++b) {
                const std::uint64_t ga = g ^ (1ull << a);
                const std::uint64_t gb = g ^ (1ull << b);
                const std::uint64_t gab = ga ^ (1ull << b);
                const double fwd = log_p(g, a) + log_p(ga, b) + log_p(gab, a) + log_p(gb, b);
                const double rev = log_p(g, b) + log_p(gb, a) + log_p(gab, b) + log_p(ga, a);
                const double r = std::abs(fwd - rev) / beta;
                if (r > report.worst_residual) {
                    report.worst_residual = r;
                    report.witness = BalanceWitness{g, a, b};
                }
            }
    report.balanced = report.worst_residual <= tol;
    if (report.balanced) {
        report.witness.reset();
        // belt: check the Gibbs candidate flows explicitly
        const StationaryDistribution pi = exact_stationary(potential_from_utilities(u, tol), sigma);
        double worst = 0.0, scale = 0.0;
        for (std::uint64_t g = 0; g < network_space_size(n); ++g)
            for (int a = 0; a < bits; ++a) {
                const std::uint64_t ga = g ^ (1ull << a);
                if (ga < g) continue;
                const Dyad d = dyad_at(n, a);
                const double lambda = meeting_rate(rates, d, DirectedNetwork::from_code(n, g));
                const double out = lambda * std::exp(log_p(g, a)) * pi[g];
                const double back = lambda * std::exp(log_p(ga, a)) * pi[ga];
                worst = std::max(worst, std::abs(out - back));
                scale = std::max(scale, std::max(out, back));
            }
        report.gibbs_flow_residual = scale > 0.0 ? worst / scale : 0.0;
    }
    return report;
}

struct TransientModel {
    UtilityTable utilities;
    MeetingRates rates = ConstantRates{1.0};
    double sigma = 0.5;
};

/// Solves d(pi)/dt = pi Q by uniformization (Poisson-weighted jump-chain
/// powers); the generator stays sparse with N(N-1) nonzeros per row.
/// N <= 4. Mass is conserved to the Poisson truncation tail (< 1e-13).
inline NetworkFunction transient_distribution(const NetworkFunction& pi0, double t,
                                              const TransientModel& model) {
    const int n = model.utilities.n_nodes();
    if (n > kMaxGeneratorNodes)
        throw InfeasibleSizeError("transient solver limited to N <= 4 (4096 states)");
    if (pi0.n_nodes() != n) throw InvalidInputError("initial distribution has wrong node count");
    if (t < 0.0) throw InvalidInputError("time must be nonnegative");
    if (t == 0.0) return pi0;

    const int bits = n * (n - 1);
    const std::uint64_t states = network_space_size(n);
    const double beta = (1.0 - model.sigma) / model.sigma;

    // flow rates q[g][k] = lambda_d(g) p_d(g) toward g ^ (1 << k)
    std::vector<double> flows(states * static_cast<std::uint64_t>(bits));
    std::vector<double> outflow(states, 0.0);
    for (std::uint64_t g = 0; g < states; ++g) {
        const DirectedNetwork net = DirectedNetwork::from_code(n, g);
        for (int k = 0; k < bits; ++k) {
            const Dyad d = dyad_at(n, k);
            const double du = detail::marginal(model.utilities, d.source, g, k);
            const double q = meeting_rate(model.rates, d, net) * logistic(beta * du);
            flows[g * static_cast<std::uint64_t>(bits) + static_cast<std::uint64_t>(k)] = q;
            outflow[g] += q;
        }
    }
    double nu = 0.0;
    for (std::uint64_t g = 0; g < states; ++g) nu = std::max(nu, outflow[g]);
    if (nu <= 0.0) return pi0;

    // pi_t = sum_k Poisson(nu t; k) pi0 P^k with P = I + Q / nu
    const double lambda = nu * t;
    std::vector<double> v(pi0.values().begin(), pi0.values().end());
    NetworkFunction result(n);
    std::vector<double> next(states, 0.0);

    double log_w = -lambda; // log Poisson(0)
    double cumulative = 0.0;
    const std::uint64_t k_cap = static_cast<std::uint64_t>(lambda + 12.0 * std::sqrt(lambda + 1.0) + 64.0);
    for (std::uint64_t k = 0; k <= k_cap; ++k) {
        if (k > 0) log_w += std::log(lambda) - std::log(static_cast<double>(k));
        const double w = std::exp(log_w);
        if (w > 0.0) {
            for (std::uint64_t g = 0; g < states; ++g) result[g] += w * v[g];
            cumulative += w;
        }
        if (cumulative >= 1.0 - 1e-14) break;
        // v <- v P
        std::fill(next.begin(), next.end(), 0.0);
        for (std::uint64_t g = 0; g < states; ++g) {
            const double vg = v[g];
            if (vg == 0.0) continue;
            next[g] += vg * (1.0 - outflow[g] / nu);
            const double* row = &flows[g * static_cast<std::uint64_t>(bits)];
            for (int b = 0; b < bits; ++b)
                next[g ^ (1ull << b)] += vg * (row[b] / nu);
        }
        v.swap(next);
    }
    if (cumulative < 1.0 - 1e-10)
        throw NumericalError("uniformization truncated before capturing the Poisson mass");
    return result;
}

} // namespace netform
