#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "netform/dynamics.hpp"
#include "netform/meanfield.hpp"
#include "netform/motif.hpp"
#include "netform/rng.hpp"

namespace netform {

/// Type-pair link-probability matrix psi: Theta^2 -> [0,1].
class Kernel {
public:
    Kernel(int n_types, double fill = 0.5)
        : n_types_(n_types),
          psi_(static_cast<std::size_t>(n_types) * static_cast<std::size_t>(n_types), fill) {
        if (n_types < 1) throw InvalidInputError("kernel needs at least one type");
        if (!(fill >= 0.0 && fill <= 1.0)) throw InvalidInputError("kernel entries must lie in [0,1]");
    }

    int n_types() const { return n_types_; }

    double& at(int s, int t) { return psi_[static_cast<std::size_t>(s) * n_types_ + static_cast<std::size_t>(t)]; }
    double at(int s, int t) const { return psi_[static_cast<std::size_t>(s) * n_types_ + static_cast<std::size_t>(t)]; }

    std::span<const double> values() const { return psi_; }

    double max_abs_diff(const Kernel& other) const {
        double worst = 0.0;
        for (std::size_t k = 0; k < psi_.size(); ++k)
            worst = std::max(worst, std::abs(psi_[k] - other.psi_[k]));
        return worst;
    }

    double max_asymmetry() const {
        double worst = 0.0;
        for (int s = 0; s < n_types_; ++s)
            for (int t = s + 1; t < n_types_; ++t)
                worst = std::max(worst, std::abs(at(s, t) - at(t, s)));
        return worst;
    }

private:
    int n_types_;
    std::vector<double> psi_;
};

/// Weighted CES aggregator (sum_t alpha_t z_t^r)^{1/r}: homogeneous of
/// degree 1, concave and monotone for r in (0,1], alpha >= 0.
struct CesAggregator {
    std::vector<double> alpha; // L x L row-major, alpha[theta][theta']
    std::vector<double> r;     // per theta, in (0,1]
};

/// Heterogeneous-type model: type weights, motif incentives, and a
/// neighborhood utility u_theta(z) = sum c_{theta theta'} z_theta' + CES.
class TypedModel {
public:
    TypedModel(std::vector<double> weights, MotifModel motifs, std::vector<double> linear_costs,
               std::optional<CesAggregator> ces = std::nullopt)
        : weights_(std::move(weights)), motifs_(std::move(motifs)),
          linear_(std::move(linear_costs)), ces_(std::move(ces)) {
        const std::size_t L = weights_.size();
        if (L == 0) throw InvalidInputError("type set is empty");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w > 0.0)) throw InvalidInputError("type weights need full support");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw InvalidInputError("type weights must sum to 1");
        for (double& w : weights_) w /= total;
        if (linear_.size() != L * L)
            throw InvalidInputError("linear neighborhood coefficients must be an LxL matrix");
        if (ces_) {
            if (ces_->alpha.size() != L * L)
                throw InvalidInputError("CES alpha must be an LxL matrix");
            if (ces_->r.size() != L) throw InvalidInputError("CES needs one exponent per type");
            for (double a : ces_->alpha)
                if (!(a >= 0.0)) throw InvalidInputError("CES alpha must be nonnegative");
            for (double r : ces_->r)
                if (!(r > 0.0 && r <= 1.0)) throw InvalidInputError("CES exponent must lie in (0,1]");
            check_neighborhood_regularity();
        }
    }

    int n_types() const { return static_cast<int>(weights_.size()); }
    std::span<const double> weights() const { return weights_; }
    const MotifModel& motifs() const { return motifs_; }
    double sigma() const { return motifs_.sigma(); }
    double beta() const { return motifs_.beta(); }
    double linear_cost(int theta, int theta2) const {
        return linear_[static_cast<std::size_t>(theta) * weights_.size() + static_cast<std::size_t>(theta2)];
    }
    const std::optional<CesAggregator>& ces() const { return ces_; }

    /// u_theta(z).
    double neighborhood_utility(int theta, std::span<const double> z) const {
        double u = 0.0;
        for (std::size_t t = 0; t < weights_.size(); ++t) u += linear_cost(theta, static_cast<int>(t)) * z[t];
        if (ces_) u += ces_value(theta, z);
        return u;
    }

    /// du_theta / dz_{t2} at z. CES part requires z[t2] > 0 when r < 1.
    double neighborhood_partial(int theta, int t2, std::span<const double> z) const {
        double du = linear_cost(theta, t2);
        if (ces_) {
            const double r = ces_->r[static_cast<std::size_t>(theta)];
            const double s = ces_sum(theta, z);
            if (s > 0.0) {
                const double a = ces_->alpha[static_cast<std::size_t>(theta) * weights_.size() + static_cast<std::size_t>(t2)];
                if (a > 0.0)
                    du += std::pow(s, 1.0 / r - 1.0) * a * std::pow(z[static_cast<std::size_t>(t2)], r - 1.0);
            }
        }
        return du;
    }

private:
    double ces_sum(int theta, std::span<const double> z) const {
        const double r = ces_->r[static_cast<std::size_t>(theta)];
        double s = 0.0;
        for (std::size_t t = 0; t < weights_.size(); ++t) {
            const double a = ces_->alpha[static_cast<std::size_t>(theta) * weights_.size() + t];
            if (a > 0.0 && z[t] > 0.0) s += a * std::pow(z[t], r);
        }
        return s;
    }

    double ces_value(int theta, std::span<const double> z) const {
        const double s = ces_sum(theta, z);
        return s > 0.0 ? std::pow(s, 1.0 / ces_->r[static_cast<std::size_t>(theta)]) : 0.0;
    }

    /// Spot-checks homogeneity, monotonicity and concavity of u on random
    /// rays; violations indicate ill-formed parameters.
    void check_neighborhood_regularity() const {
        Rng rng(0x7e57ab1e);
        const std::size_t L = weights_.size();
        std::vector<double> z1(L), z2(L), mid(L);
        for (int trial = 0; trial < 32; ++trial) {
            const int theta = static_cast<int>(rng.next_below(L));
            for (std::size_t t = 0; t < L; ++t) {
                z1[t] = 0.05 + rng.next_unit() * 4.0;
                z2[t] = 0.05 + rng.next_unit() * 4.0;
                mid[t] = 0.5 * (z1[t] + z2[t]);
            }
            const double u1 = neighborhood_utility(theta, z1);
            const double c = 1.0 + rng.next_unit() * 3.0;
            std::vector<double> scaled(L);
            for (std::size_t t = 0; t < L; ++t) scaled[t] = c * z1[t];
            if (std::abs(neighborhood_utility(theta, scaled) - c * u1) >
                1e-8 * (1.0 + std::abs(c * u1)))
                throw InvalidInputError("neighborhood utility is not homogeneous of degree 1");
            const double u_mid = neighborhood_utility(theta, mid);
            if (u_mid < 0.5 * (u1 + neighborhood_utility(theta, z2)) - 1e-8)
                throw InvalidInputError("neighborhood utility is not concave");
            // only the concave part must be monotone; linear costs may be negative
            std::vector<double> up = z1;
            up[rng.next_below(L)] += 0.5;
            if (ces_value(theta, up) < ces_value(theta, z1) - 1e-10)
                throw InvalidInputError("CES aggregator is not monotone");
        }
    }

    std::vector<double> weights_;
    MotifModel motifs_;
    std::vector<double> linear_;
    std::optional<CesAggregator> ces_;
};

/// b[m, psi; w] = sum over type assignments of (prod_i w_theta_i)
/// (prod_{ij in m} psi_{theta_i theta_j}). Cost L^{n_m}.
inline double kernel_motif_density(const Motif& m, const Kernel& psi, std::span<const double> w) {
    const int L = psi.n_types();
    if (static_cast<std::size_t>(L) != w.size())
        throw InvalidInputError("kernel and weight dimensions disagree");
    const double budget = std::pow(static_cast<double>(L), m.node_count());
    if (budget > 1e8)
        throw InfeasibleSizeError("kernel motif density over L^" + std::to_string(m.node_count()) +
                                  " assignments exceeds the budget");
    const int n = m.node_count();
    std::vector<int> theta(static_cast<std::size_t>(n), 0);
    double total = 0.0;
    while (true) {
        double term = 1.0;
        for (int i = 0; i < n; ++i) term *= w[static_cast<std::size_t>(theta[static_cast<std::size_t>(i)])];
        for (const Dyad& d : m.edges())
            term *= psi.at(theta[static_cast<std::size_t>(d.source)], theta[static_cast<std::size_t>(d.target)]);
        total += term;
        int pos = n - 1;
        while (pos >= 0 && theta[static_cast<std::size_t>(pos)] == L - 1) theta[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) break;
        ++theta[static_cast<std::size_t>(pos)];
    }
    return total;
}

/// Gamma_Theta(psi) = beta sum_m (a_m / h_m) b[m, psi; w]
///   + sum_theta w_theta [ sum_theta' w_theta' H(psi_theta,theta')
///                         + beta u_theta((w_theta' psi_theta,theta')_theta') ].
inline double typed_eap(const Kernel& psi, const TypedModel& model) {
    const int L = model.n_types();
    if (psi.n_types() != L) throw InvalidInputError("kernel and model dimensions disagree");
    const double beta = model.beta();
    double total = 0.0;
    for (std::size_t k = 0; k < model.motifs().motifs().size(); ++k) {
        const Motif& m = model.motifs().motifs()[k];
        total += beta * model.motifs().value(k) / m.degeneracy() *
                 kernel_motif_density(m, psi, model.weights());
    }
    std::vector<double> z(static_cast<std::size_t>(L));
    for (int s = 0; s < L; ++s) {
        double inner = 0.0;
        for (int t = 0; t < L; ++t) {
            inner += model.weights()[static_cast<std::size_t>(t)] * entropy(psi.at(s, t));
            z[static_cast<std::size_t>(t)] = model.weights()[static_cast<std::size_t>(t)] * psi.at(s, t);
        }
        inner += beta * model.neighborhood_utility(s, z);
        total += model.weights()[static_cast<std::size_t>(s)] * inner;
    }
    return total;
}

struct KernelSolveOptions {
    std::vector<double> starts = {0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95};
    double sweep_tol = 1e-9;   // converged when no entry moves more than this
    int max_sweeps = 500;
    int grid = 257;            // bracketing grid per coordinate subproblem
    double edge = 1e-6;
    double distinct_tol = 1e-4;
};

struct KernelSolution {
    Kernel kernel;
    double zeta = 0.0;
    bool converged = true;
    /// Distinct local optima found across starts, best first, paired with
    /// their Gamma values.
    std::vector<std::pair<Kernel, double>> local_optima;
};

namespace detail {

/// Coefficients of x -> beta * sum_m (a_m/h_m) b[m, psi|_(s,t)=x; w],
/// a polynomial in the single entry (s, t) of degree <= max e_m.
inline std::vector<double> kernel_entry_polynomial(const TypedModel& model, const Kernel& psi,
                                                   int s, int t) {
    const int L = model.n_types();
    std::vector<double> coeff(1, 0.0);
    for (std::size_t mk = 0; mk < model.motifs().motifs().size(); ++mk) {
        const Motif& m = model.motifs().motifs()[mk];
        const double scale = model.beta() * model.motifs().value(mk) / m.degeneracy();
        const int n = m.node_count();
        if (coeff.size() < static_cast<std::size_t>(m.edge_count()) + 1)
            coeff.resize(static_cast<std::size_t>(m.edge_count()) + 1, 0.0);
        std::vector<int> theta(static_cast<std::size_t>(n), 0);
        while (true) {
            double term = 1.0;
            int power = 0;
            for (int i = 0; i < n; ++i) term *= model.weights()[static_cast<std::size_t>(theta[static_cast<std::size_t>(i)])];
            for (const Dyad& d : m.edges()) {
                const int a = theta[static_cast<std::size_t>(d.source)];
                const int b = theta[static_cast<std::size_t>(d.target)];
                if (a == s && b == t) ++power;
                else term *= psi.at(a, b);
            }
            coeff[static_cast<std::size_t>(power)] += scale * term;
            int pos = n - 1;
            while (pos >= 0 && theta[static_cast<std::size_t>(pos)] == L - 1) theta[static_cast<std::size_t>(pos--)] = 0;
            if (pos < 0) break;
            ++theta[static_cast<std::size_t>(pos)];
        }
    }
    return coeff;
}

} // namespace detail

/// Projected coordinate ascent on Gamma_Theta: each entry's 1-D subproblem
/// has the same polynomial-plus-entropy structure as the homogeneous case
/// and is solved by the same bracketed-root method; the entropy barrier
/// keeps iterates interior. Multi-start from constant kernels.
inline KernelSolution solve_kernel(const TypedModel& model, const KernelSolveOptions& opt = {}) {
    const int L = model.n_types();
    if (L > 64) throw InfeasibleSizeError("kernel optimization limited to L <= 64");
    for (std::size_t k = 0; k < model.motifs().motifs().size(); ++k)
        if (model.motifs().motifs()[k].edge_count() > 1 && !(model.motifs().value(k) > 0.0))
            throw InvalidInputError("multi-edge motif values must be positive here");

    const double beta = model.beta();
    const auto w = model.weights();
    std::vector<std::pair<Kernel, double>> optima;
    std::vector<bool> optima_converged;

    for (double rho0 : opt.starts) {
        Kernel psi(L, rho0);
        bool converged = false;
        std::vector<double> z(static_cast<std::size_t>(L));
        for (int sweep = 0; sweep < opt.max_sweeps && !converged; ++sweep) {
            double worst_move = 0.0;
            for (int s = 0; s < L; ++s) {
                for (int t = 0; t < L; ++t) {
                    const auto poly = detail::kernel_entry_polynomial(model, psi, s, t);
                    const double wst = w[static_cast<std::size_t>(s)] * w[static_cast<std::size_t>(t)];
                    for (int t2 = 0; t2 < L; ++t2)
                        z[static_cast<std::size_t>(t2)] = w[static_cast<std::size_t>(t2)] * psi.at(s, t2);

                    auto z_at = [&](double x) {
                        z[static_cast<std::size_t>(t)] = w[static_cast<std::size_t>(t)] * x;
                        return std::span<const double>(z);
                    };
                    auto slope = [&](double x) {
                        double dp = 0.0;
                        for (std::size_t k = poly.size(); k-- > 1;)
                            dp = dp * x + static_cast<double>(k) * poly[k];
                        return dp / wst + beta * model.neighborhood_partial(s, t, z_at(x)) +
                               std::log((1.0 - x) / x);
                    };
                    auto curvature = [&](double) { return 0.0; }; // bisection only
                    // restriction of Gamma to this entry, scaled by 1/(w_s w_t)
                    auto value = [&](double x) {
                        double p = 0.0;
                        for (std::size_t k = poly.size(); k-- > 0;) p = p * x + poly[k];
                        return p / wst + entropy(x) +
                               beta * model.neighborhood_utility(s, z_at(x)) /
                                   w[static_cast<std::size_t>(t)];
                    };
                    const auto maxima = detail::bracket_maxima(slope, curvature, value,
                                                               opt.edge, 1.0 - opt.edge, opt.grid);
                    double best_x = psi.at(s, t);
                    double best_v = -std::numeric_limits<double>::infinity();
                    for (const auto& m : maxima)
                        if (m.value > best_v) { best_v = m.value; best_x = m.x; }
                    worst_move = std::max(worst_move, std::abs(best_x - psi.at(s, t)));
                    psi.at(s, t) = best_x;
                }
            }
            converged = worst_move < opt.sweep_tol;
        }
        // keep distinct optima only
        bool duplicate = false;
        for (const auto& known : optima)
            if (known.first.max_abs_diff(psi) <= opt.distinct_tol) { duplicate = true; break; }
        if (!duplicate) {
            optima.emplace_back(psi, typed_eap(psi, model));
            optima_converged.push_back(converged);
        }
    }

    std::size_t best = 0;
    for (std::size_t k = 1; k < optima.size(); ++k)
        if (optima[k].second > optima[best].second) best = k;

    std::sort(optima.begin(), optima.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    // non-convergence is reported with the best iterate rather than thrown
    return KernelSolution{optima.front().first, optima.front().second,
                          optima_converged[best], std::move(optima)};
}

/// hat z_{i,theta}(g) = #{j : theta_j = theta, ij in g}.
inline std::vector<double> neighbor_type_counts(int node, const DirectedNetwork& g,
                                                std::span<const int> types, int n_types) {
    std::vector<double> z(static_cast<std::size_t>(n_types), 0.0);
    const int n = g.n_nodes();
    for (int j = 0; j < n; ++j) {
        if (j == node) continue;
        if (g.has({node, j})) z[static_cast<std::size_t>(types[static_cast<std::size_t>(j)])] += 1.0;
    }
    return z;
}

/// Finite-N heterogeneous utility: motif part plus u_theta_i(hat z_i(g)).
inline double finite_n_typed_utility(int node, const DirectedNetwork& g,
                                     std::span<const int> types, const TypedModel& model) {
    if (types.size() != static_cast<std::size_t>(g.n_nodes()))
        throw InvalidInputError("type assignment length must equal the node count");
    const auto z = neighbor_type_counts(node, g, types, model.n_types());
    return motif_utility(node, g, model.motifs()) +
           model.neighborhood_utility(types[static_cast<std::size_t>(node)], z);
}

/// Marginal utility of toggling d for its source under the typed model;
/// feeds the dynamics so the heterogeneous chain can be simulated.
inline double typed_marginal_utility(const TypedModel& model, std::span<const int> types,
                                     const DirectedNetwork& g, Dyad d) {
    double delta = motif_marginal_utility(model.motifs(), g, d);
    auto z = neighbor_type_counts(d.source, g, types, model.n_types());
    const int theta_i = types[static_cast<std::size_t>(d.source)];
    const std::size_t theta_j = static_cast<std::size_t>(types[static_cast<std::size_t>(d.target)]);
    const double before = model.neighborhood_utility(theta_i, z);
    z[theta_j] += g.has(d) ? -1.0 : 1.0;
    delta += model.neighborhood_utility(theta_i, z) - before;
    return delta;
}

inline MarginalUtility marginal_from_typed(const TypedModel& model, std::vector<int> types) {
    return [&model, types = std::move(types)](const DirectedNetwork& g, Dyad d) {
        return typed_marginal_utility(model, types, g, d);
    };
}

} // namespace netform
