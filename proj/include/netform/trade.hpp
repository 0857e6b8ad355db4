#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "netform/meanfield.hpp"
#include "netform/typed.hpp"

namespace netform {

/// Circular city with unit circumference: L equally spaced locations,
/// types Theta = {0, 1/L, ..., (L-1)/L}, link cost gamma per unit distance,
/// gains v from reciprocated trade links.
struct TradeModel {
    int locations = 2;
    double gamma = 1.0;
    double v = 1.0;
    double sigma = 0.25;
    std::vector<double> weights; // empty = uniform

    void validate() const {
        if (locations < 2) throw InvalidInputError("trade model needs at least 2 locations");
        if (!(gamma > 0.0)) throw InvalidInputError("gamma must be positive");
        if (!(v > 0.0)) throw InvalidInputError("v must be positive");
        if (!(sigma > 0.0 && sigma < 1.0))
            throw InvalidInputError("sigma must lie strictly inside (0,1)");
        if (!weights.empty() && weights.size() != static_cast<std::size_t>(locations))
            throw InvalidInputError("weights length must equal the location count");
    }

    double beta() const { return (1.0 - sigma) / sigma; }
    double type_value(int k) const { return static_cast<double>(k) / locations; }

    std::vector<double> effective_weights() const {
        if (!weights.empty()) return weights;
        return std::vector<double>(static_cast<std::size_t>(locations), 1.0 / locations);
    }

    /// Ring distance between location indices, as a multiple of 1/L.
    int distance_steps(int a, int b) const {
        const int d = std::abs(a - b);
        return std::min(d, locations - d);
    }

    /// Number of distinct ring distances: floor(L/2) + 1.
    int n_rings() const { return locations / 2 + 1; }

    /// Ordered type pairs at ring distance k (out of L^2).
    int ring_multiplicity(int k) const {
        if (k == 0) return locations;
        if (2 * k == locations) return locations;
        return 2 * locations;
    }
};

/// D(theta, theta') = min{|theta - theta'|, 1 - |theta - theta'|} in
/// [0, 1/2]. Both arguments must sit on the 1/L grid.
inline double circular_distance(double theta, double theta_prime, int locations) {
    auto on_grid = [&](double t) {
        const double scaled = t * locations;
        const double nearest = std::round(scaled);
        if (std::abs(scaled - nearest) > 1e-9 || t < 0.0 || t >= 1.0)
            throw InvalidInputError("type is not on the 1/L location grid");
        return static_cast<int>(nearest);
    };
    const int a = on_grid(theta);
    const int b = on_grid(theta_prime);
    const int d = std::min(std::abs(a - b), locations - std::abs(a - b));
    return static_cast<double>(d) / locations;
}

/// The per-pair reduced problem: typical density of the motif model
/// M0 = {single link, reciprocated pair} with values (-gamma D, v).
inline EAPProblem trade_ring_problem(const TradeModel& model, double distance) {
    return EAPProblem({{-model.gamma * distance, 1, 1}, {model.v, 2, 2}}, model.beta());
}

struct TradeKernel {
    Kernel kernel;
    /// Per-entry marker: the 1-D problem at this entry's distance sat on a
    /// tie between branches, so the value is the tie-broken branch.
    std::vector<std::uint8_t> ambiguous;
    std::vector<double> ring_distances;
    std::vector<EAPSolution> ring_solutions;

    bool entry_ambiguous(int s, int t) const {
        return ambiguous[static_cast<std::size_t>(s) * kernel.n_types() + static_cast<std::size_t>(t)] != 0;
    }
};

/// Kernel via the per-pair reduction: only the distinct ring distances are
/// solved and the results broadcast, so the kernel is symmetric and
/// translation invariant by construction.
inline TradeKernel trade_kernel_reduced(const TradeModel& model,
                                        const SolveEapOptions& opt = {}) {
    model.validate();
    const int L = model.locations;
    TradeKernel out{Kernel(L), {}, {}, {}};
    out.ambiguous.assign(static_cast<std::size_t>(L) * static_cast<std::size_t>(L), 0);
    for (int k = 0; k < model.n_rings(); ++k) {
        out.ring_distances.push_back(static_cast<double>(k) / L);
        out.ring_solutions.push_back(solve_eap(trade_ring_problem(model, out.ring_distances.back()), opt));
    }
    for (int s = 0; s < L; ++s)
        for (int t = 0; t < L; ++t) {
            const int k = model.distance_steps(s, t);
            out.kernel.at(s, t) = out.ring_solutions[static_cast<std::size_t>(k)].rho_star;
            if (!out.ring_solutions[static_cast<std::size_t>(k)].unique)
                out.ambiguous[static_cast<std::size_t>(s) * L + static_cast<std::size_t>(t)] = 1;
        }
    return out;
}

/// The trade model as a TypedModel: reciprocated-pair motif with value v,
/// linear neighborhood costs c_{theta theta'} = -gamma D(theta, theta').
inline TypedModel trade_typed_model(const TradeModel& model) {
    model.validate();
    const int L = model.locations;
    std::vector<double> linear(static_cast<std::size_t>(L) * static_cast<std::size_t>(L));
    for (int s = 0; s < L; ++s)
        for (int t = 0; t < L; ++t)
            linear[static_cast<std::size_t>(s) * L + static_cast<std::size_t>(t)] =
                -model.gamma * static_cast<double>(model.distance_steps(s, t)) / L;
    MotifModel motifs({Motif::reciprocal_pair()}, {model.v}, model.sigma);
    return TypedModel(model.effective_weights(), std::move(motifs), std::move(linear));
}

/// Full L^2 coordinate-ascent solution; the independent cross-check of the
/// per-pair reduction.
inline KernelSolution trade_kernel_direct(const TradeModel& model,
                                          const KernelSolveOptions& opt = {}) {
    return solve_kernel(trade_typed_model(model), opt);
}

/// rho = sum_{theta, theta'} w_theta w_theta' psi_{theta theta'}.
inline double total_density(const Kernel& psi, std::span<const double> w) {
    if (static_cast<std::size_t>(psi.n_types()) != w.size())
        throw InvalidInputError("kernel and weight dimensions disagree");
    double rho = 0.0;
    for (int s = 0; s < psi.n_types(); ++s)
        for (int t = 0; t < psi.n_types(); ++t)
            rho += w[static_cast<std::size_t>(s)] * w[static_cast<std::size_t>(t)] * psi.at(s, t);
    return rho;
}

struct TradeSweepRing {
    double distance = 0.0;
    SweepResult sweep;
};

struct TradeSweep {
    std::vector<double> v_path;
    std::vector<TradeSweepRing> rings;       // one homogeneous sweep per distance
    std::vector<double> total_densities;     // per v, uniform-weight aggregation

    /// (v, distance, psi, ambiguous) rows for the kernel profile.
    struct ProfileRow {
        double v;
        double distance;
        double psi;
        bool ambiguous;
    };
    std::vector<ProfileRow> profile() const {
        std::vector<ProfileRow> rows;
        for (std::size_t vi = 0; vi < v_path.size(); ++vi)
            for (const TradeSweepRing& ring : rings) {
                const EAPSolution& sol = ring.sweep.points[vi].solution;
                rows.push_back({v_path[vi], ring.distance, sol.rho_star, !sol.unique});
            }
        return rows;
    }
};

/// Sweeps v per distance ring and aggregates total density with the
/// model's weights (uniform by default).
inline TradeSweep trade_sweep(const TradeModel& base, std::span<const double> v_path,
                              const SweepOptions& opt = {}) {
    base.validate();
    for (double v : v_path)
        if (!(v > 0.0)) throw InvalidInputError("trade sweep needs positive v values");

    TradeSweep out;
    out.v_path.assign(v_path.begin(), v_path.end());
    for (int k = 0; k < base.n_rings(); ++k) {
        const double d = static_cast<double>(k) / base.locations;
        SweepResult sweep = sweep_phase(
            [&](double v) {
                return EAPProblem({{-base.gamma * d, 1, 1}, {v, 2, 2}}, base.beta());
            },
            v_path, opt);
        out.rings.push_back({d, std::move(sweep)});
    }
    const auto w = base.effective_weights();
    // ring mass = sum of w_s w_t over ordered pairs at that distance;
    // uniform weights give mult_k / L^2
    std::vector<double> ring_mass(static_cast<std::size_t>(base.n_rings()), 0.0);
    for (int s = 0; s < base.locations; ++s)
        for (int t = 0; t < base.locations; ++t)
            ring_mass[static_cast<std::size_t>(base.distance_steps(s, t))] +=
                w[static_cast<std::size_t>(s)] * w[static_cast<std::size_t>(t)];
    for (std::size_t vi = 0; vi < out.v_path.size(); ++vi) {
        double rho = 0.0;
        for (int k = 0; k < base.n_rings(); ++k)
            rho += ring_mass[static_cast<std::size_t>(k)] *
                   out.rings[static_cast<std::size_t>(k)].sweep.points[vi].solution.rho_star;
        out.total_densities.push_back(rho);
    }
    return out;
}

} // namespace netform
