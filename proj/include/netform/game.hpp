#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "netform/network.hpp"
#include "netform/rng.hpp"

namespace netform {

inline constexpr double kAlgebraTol = 1e-9;

/// Dense map network -> real over G_N, indexed by bit-vector code.
class NetworkFunction {
public:
    explicit NetworkFunction(int n_nodes)
        : n_nodes_(n_nodes), values_(network_space_size(n_nodes), 0.0) {}

    int n_nodes() const { return n_nodes_; }
    std::uint64_t size() const { return values_.size(); }

    double& operator[](std::uint64_t code) { return values_[code]; }
    double operator[](std::uint64_t code) const { return values_[code]; }

    double at(const DirectedNetwork& g) const { return values_[g.code()]; }
    double& at(const DirectedNetwork& g) { return values_[g.code()]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

private:
    int n_nodes_;
    std::vector<double> values_;
};

using PotentialTable = NetworkFunction;

namespace detail {

/// In-place subset-sum (zeta) transform: f[s] <- sum_{s' subset of s} f[s'].
inline void zeta_transform(std::span<double> f, int n_bits) {
    for (int b = 0; b < n_bits; ++b)
        for (std::uint64_t s = 0; s < f.size(); ++s)
            if ((s >> b) & 1u) f[s] += f[s ^ (1ull << b)];
}

/// Inverse of zeta_transform (Moebius): recovers f from its subset sums.
inline void moebius_transform(std::span<double> f, int n_bits) {
    for (int b = 0; b < n_bits; ++b)
        for (std::uint64_t s = 0; s < f.size(); ++s)
            if ((s >> b) & 1u) f[s] -= f[s ^ (1ull << b)];
}

} // namespace detail

/// Per-agent dense map (agent, network) -> real. Strong-typed via Tag so
/// utilities and structure values cannot be mixed up.
template <class Tag>
class AgentTable {
public:
    explicit AgentTable(int n_nodes)
        : n_nodes_(n_nodes),
          stride_(network_space_size(n_nodes)),
          values_(stride_ * static_cast<std::uint64_t>(n_nodes), 0.0) {}

    int n_nodes() const { return n_nodes_; }
    std::uint64_t stride() const { return stride_; }

    double& at(int agent, std::uint64_t code) { return values_[static_cast<std::uint64_t>(agent) * stride_ + code]; }
    double at(int agent, std::uint64_t code) const { return values_[static_cast<std::uint64_t>(agent) * stride_ + code]; }

    std::span<double> agent_slice(int agent) {
        return std::span<double>(values_).subspan(static_cast<std::uint64_t>(agent) * stride_, stride_);
    }
    std::span<const double> agent_slice(int agent) const {
        return std::span<const double>(values_).subspan(static_cast<std::uint64_t>(agent) * stride_, stride_);
    }

    friend bool operator==(const AgentTable&, const AgentTable&) = default;

private:
    int n_nodes_;
    std::uint64_t stride_;
    std::vector<double> values_;
};

/// U_i(g): payoff of agent i under network g.
using UtilityTable = AgentTable<struct UtilityTag>;

/// V_i(g): value agent i assigns to the exact structure g (Moebius inverse
/// of U over the subnetwork lattice).
using ValueTable = AgentTable<struct ValueTag>;

namespace detail {

inline void check_same_shape(int a, int b) {
    if (a != b) throw InvalidInputError("tables have different node counts");
}

/// Marginal utility of toggling dyad bit `bit` in network `code`, for the
/// agent owning the dyad: U_i(tau_d(g)) - U_i(g).
inline double marginal(const UtilityTable& u, int agent, std::uint64_t code, int bit) {
    return u.at(agent, code ^ (1ull << bit)) - u.at(agent, code);
}

} // namespace detail

/// Moebius inversion V_i(g) = sum_{g' subset g} (-1)^{|g \ g'|} U_i(g').
inline ValueTable values_from_utilities(const UtilityTable& u) {
    ValueTable v(u.n_nodes());
    const int bits = u.n_nodes() * (u.n_nodes() - 1);
    for (int i = 0; i < u.n_nodes(); ++i) {
        auto slice = v.agent_slice(i);
        std::copy(u.agent_slice(i).begin(), u.agent_slice(i).end(), slice.begin());
        detail::moebius_transform(slice, bits);
    }
    return v;
}

/// Forward sum U_i(g) = sum_{g' subset g} V_i(g').
inline UtilityTable utilities_from_values(const ValueTable& v) {
    UtilityTable u(v.n_nodes());
    const int bits = v.n_nodes() * (v.n_nodes() - 1);
    for (int i = 0; i < v.n_nodes(); ++i) {
        auto slice = u.agent_slice(i);
        std::copy(v.agent_slice(i).begin(), v.agent_slice(i).end(), slice.begin());
        detail::zeta_transform(slice, bits);
    }
    return u;
}

struct ConservativenessWitness {
    std::uint64_t network_code = 0;
    int dyad_a = 0; // canonical dyad indices
    int dyad_b = 0;
};

struct ConservativenessReport {
    bool is_conservative = true;
    double worst_residual = 0.0;
    std::optional<ConservativenessWitness> witness;
};

/// Order-independence of two-link marginal-utility sums, checked over all
/// networks and unordered dyad pairs. The witness is the lexicographically
/// first (network, dyad, dyad) triple attaining the maximal violation.
inline ConservativenessReport check_conservative(const UtilityTable& u, double tol = kAlgebraTol) {
    const int n = u.n_nodes();
    const int bits = n * (n - 1);
    const std::uint64_t states = network_space_size(n);
    ConservativenessReport report;
    for (std::uint64_t g = 0; g < states; ++g) {
        for (int a = 0; a < bits; ++a) {
            const int ia = dyad_at(n, a).source;
            const double mu_a = detail::marginal(u, ia, g, a);
            for (int b = a + 1; b < bits; ++b) {
                const int ib = dyad_at(n, b).source;
                const double lhs = mu_a + detail::marginal(u, ib, g ^ (1ull << a), b);
                const double rhs = detail::marginal(u, ib, g, b) + detail::marginal(u, ia, g ^ (1ull << b), a);
                const double r = std::abs(lhs - rhs);
                if (r > report.worst_residual) {
                    report.worst_residual = r;
                    report.witness = ConservativenessWitness{g, a, b};
                }
            }
        }
    }
    report.is_conservative = report.worst_residual <= tol;
    if (report.is_conservative) report.witness.reset();
    return report;
}

struct SourceSymmetryReport {
    bool symmetric = true;
    double worst_violation = 0.0;
    std::uint64_t witness_code = 0;
    int witness_agent_a = 0;
    int witness_agent_b = 0;
};

/// V_i(g) = V_j(g) for all i, j in J_src(g); vacuous off source sets.
inline SourceSymmetryReport check_source_symmetry(const ValueTable& v, double tol = kAlgebraTol) {
    const int n = v.n_nodes();
    SourceSymmetryReport report;
    for (std::uint64_t g = 0; g < network_space_size(n); ++g) {
        const auto sources = DirectedNetwork::from_code(n, g).source_nodes();
        for (std::size_t p = 0; p < sources.size(); ++p)
            for (std::size_t q = p + 1; q < sources.size(); ++q) {
                const double diff = std::abs(v.at(sources[p], g) - v.at(sources[q], g));
                if (diff > report.worst_violation) {
                    report.worst_violation = diff;
                    report.witness_code = g;
                    report.witness_agent_a = sources[p];
                    report.witness_agent_b = sources[q];
                }
            }
    }
    report.symmetric = report.worst_violation <= tol;
    return report;
}

/// Extracts V_0 from a source-symmetric value table: the shared source
/// value per structure, 0 for the empty network (V_0(empty) is pinned to 0
/// so potentials are deterministic).
inline NetworkFunction structure_values(const ValueTable& v) {
    const int n = v.n_nodes();
    NetworkFunction v0(n);
    for (std::uint64_t g = 1; g < network_space_size(n); ++g) {
        // first source = source of the lowest set dyad bit
        const int bit = std::countr_zero(g);
        v0[g] = v.at(dyad_at(n, bit).source, g);
    }
    return v0;
}

/// Phi(g) = sum_{g' subset g} V_0(g').
inline PotentialTable build_potential(const NetworkFunction& v0) {
    PotentialTable phi = v0;
    detail::zeta_transform(phi.values(), v0.n_nodes() * (v0.n_nodes() - 1));
    return phi;
}

struct NonConservativeError : NumericalError {
    explicit NonConservativeError(const ConservativenessReport& r)
        : NumericalError("utilities are not conservative (worst residual " +
                         std::to_string(r.worst_residual) + ")"),
          report(r) {}
    ConservativenessReport report;
};

/// Builds Phi by accumulating single-link marginal utilities along edge
/// orderings, normalized to Phi(empty) = 0. Requires conservative U;
/// path-independence is spot-checked on a second ordering per network.
inline PotentialTable potential_from_utilities(const UtilityTable& u, double tol = kAlgebraTol) {
    const auto conservative = check_conservative(u, tol);
    if (!conservative.is_conservative) throw NonConservativeError(conservative);

    const int n = u.n_nodes();
    PotentialTable phi(n);
    const std::uint64_t states = network_space_size(n);
    Rng check_rng(0x5eedf00dull);
    for (std::uint64_t g = 1; g < states; ++g) {
        const int bit = std::countr_zero(g);
        const std::uint64_t prev = g ^ (1ull << bit);
        phi[g] = phi[prev] + detail::marginal(u, dyad_at(n, bit).source, prev, bit);
        if (std::popcount(g) >= 2) {
            // pick a random other set bit and confirm the same value
            const int nth = static_cast<int>(check_rng.next_below(static_cast<std::uint64_t>(std::popcount(g) - 1))) + 1;
            std::uint64_t rest = g & (g - 1);
            for (int k = 1; k < nth; ++k) rest &= rest - 1;
            const int bit2 = std::countr_zero(rest);
            const std::uint64_t prev2 = g ^ (1ull << bit2);
            const double alt = phi[prev2] + detail::marginal(u, dyad_at(n, bit2).source, prev2, bit2);
            if (std::abs(alt - phi[g]) > tol * 16.0)
                throw NumericalError("potential path-independence check failed despite conservativeness");
        }
    }
    return phi;
}

struct ChoiceEquivalenceReport {
    bool equivalent = true;
    double worst_difference = 0.0;
};

/// Equal single-link marginal utilities everywhere; by telescoping this
/// covers arbitrary deviations.
inline ChoiceEquivalenceReport check_choice_equivalence(const UtilityTable& u1,
                                                        const UtilityTable& u2,
                                                        double tol = kAlgebraTol) {
    detail::check_same_shape(u1.n_nodes(), u2.n_nodes());
    const int n = u1.n_nodes();
    const int bits = n * (n - 1);
    ChoiceEquivalenceReport report;
    for (std::uint64_t g = 0; g < network_space_size(n); ++g)
        for (int b = 0; b < bits; ++b) {
            const int i = dyad_at(n, b).source;
            const double diff = std::abs(detail::marginal(u1, i, g, b) - detail::marginal(u2, i, g, b));
            report.worst_difference = std::max(report.worst_difference, diff);
        }
    report.equivalent = report.worst_difference <= tol;
    return report;
}

inline constexpr int kMaxEquilibriumNodes = 4;

/// All pure-strategy Nash equilibria: networks where no agent can strictly
/// improve by replacing her whole out-neighborhood. Ties count as
/// equilibria. N <= 4 (each agent scans 2^{N-1} strategies per network).
inline std::vector<DirectedNetwork> nash_equilibria(const UtilityTable& u) {
    const int n = u.n_nodes();
    if (n > kMaxEquilibriumNodes)
        throw InfeasibleSizeError("equilibrium search limited to N <= " +
                                  std::to_string(kMaxEquilibriumNodes));
    const int block = n - 1;
    std::vector<DirectedNetwork> out;
    for (std::uint64_t g = 0; g < network_space_size(n); ++g) {
        bool nash = true;
        for (int i = 0; i < n && nash; ++i) {
            const int shift = i * block;
            const std::uint64_t mask = ((1ull << block) - 1) << shift;
            const std::uint64_t rest = g & ~mask;
            const double current = u.at(i, g);
            for (std::uint64_t s = 0; s < (1ull << block) && nash; ++s)
                if (u.at(i, rest | (s << shift)) > current) nash = false;
        }
        if (nash) out.push_back(DirectedNetwork::from_code(n, g));
    }
    return out;
}

/// Potential-maximizing Nash equilibria: argmax of Phi intersected with the
/// Nash set. Empty intersection signals a conservativeness bug upstream.
inline std::vector<DirectedNetwork> pmne(const PotentialTable& phi, const UtilityTable& u,
                                         double tol = kAlgebraTol) {
    detail::check_same_shape(phi.n_nodes(), u.n_nodes());
    double best = phi[0];
    for (std::uint64_t g = 1; g < phi.size(); ++g) best = std::max(best, phi[g]);

    std::vector<DirectedNetwork> out;
    for (const DirectedNetwork& g : nash_equilibria(u))
        if (phi[g.code()] >= best - tol) out.push_back(g);
    if (out.empty())
        throw std::logic_error("no potential maximizer is a Nash equilibrium; "
                               "utilities are likely not conservative");
    return out;
}

} // namespace netform
