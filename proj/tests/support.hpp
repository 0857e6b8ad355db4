#pragma once

// Shared test fixtures and independent oracles. Everything here is
// deliberately written from first principles (plain loops over maps and
// subsets) so library results are checked against a second route.

#include <cmath>
#include <cstdint>
#include <vector>

#include "netform/dynamics.hpp"
#include "netform/game.hpp"
#include "netform/motif.hpp"
#include "netform/network.hpp"
#include "netform/rng.hpp"

namespace testsupport {

using namespace netform;

/// Closed-form reciprocity-trade utilities:
/// U_i(g) = v * #reciprocated partners of i - c * outdegree(i).
inline UtilityTable reciprocity_utilities(int n, double v, double c) {
    UtilityTable u(n);
    for (std::uint64_t code = 0; code < network_space_size(n); ++code) {
        const DirectedNetwork g = DirectedNetwork::from_code(n, code);
        for (int i = 0; i < n; ++i) {
            int out = 0, recip = 0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                if (g.has({i, j})) {
                    ++out;
                    if (g.has({j, i})) ++recip;
                }
            }
            u.at(i, code) = v * recip - c * out;
        }
    }
    return u;
}

/// Closed-form potential of the same game:
/// Phi(g) = v * (#reciprocated pairs) - c * |g|.
inline PotentialTable reciprocity_potential(int n, double v, double c) {
    PotentialTable phi(n);
    for (std::uint64_t code = 0; code < network_space_size(n); ++code) {
        const DirectedNetwork g = DirectedNetwork::from_code(n, code);
        int pairs = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (g.has({i, j}) && g.has({j, i})) ++pairs;
        phi[code] = v * pairs - c * g.edge_count();
    }
    return phi;
}

inline MotifModel reciprocity_motif_model(double v, double c, double sigma) {
    return MotifModel({Motif::single_link(), Motif::reciprocal_pair()}, {-c, v}, sigma);
}

/// Direct alternating-sign Moebius sum, one (agent, network) at a time.
inline double moebius_oracle(const UtilityTable& u, int agent, const DirectedNetwork& g) {
    double total = 0.0;
    const int size = g.edge_count();
    for (const DirectedNetwork& sub : enumerate_subnetworks(g)) {
        const int sign_bits = size - sub.edge_count();
        total += (sign_bits % 2 == 0 ? 1.0 : -1.0) * u.at(agent, sub.code());
    }
    return total;
}

/// Plain tuple-loop motif counting: every map {0..n_m-1} -> {0..N-1},
/// optionally injective, checked edge by edge.
struct BruteCounts {
    std::uint64_t injective = 0;
    std::uint64_t homomorphisms = 0;
    std::vector<std::uint64_t> participation; // injective, node in image of sources
};

inline BruteCounts brute_counts(const Motif& m, const DirectedNetwork& g) {
    const int n = m.node_count();
    const int N = g.n_nodes();
    BruteCounts out;
    out.participation.assign(static_cast<std::size_t>(N), 0);
    std::vector<int> map(static_cast<std::size_t>(n), 0);
    while (true) {
        bool hom = true;
        for (const Dyad& d : m.edges()) {
            const int a = map[static_cast<std::size_t>(d.source)];
            const int b = map[static_cast<std::size_t>(d.target)];
            if (a == b || !g.has({a, b})) {
                hom = false;
                break;
            }
        }
        if (hom) {
            ++out.homomorphisms;
            bool injective = true;
            for (int i = 0; i < n && injective; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (map[static_cast<std::size_t>(i)] == map[static_cast<std::size_t>(j)]) {
                        injective = false;
                        break;
                    }
            if (injective) {
                ++out.injective;
                for (int src : m.sources())
                    ++out.participation[static_cast<std::size_t>(map[static_cast<std::size_t>(src)])];
            }
        }
        int pos = n - 1;
        while (pos >= 0 && map[static_cast<std::size_t>(pos)] == N - 1) map[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) break;
        ++map[static_cast<std::size_t>(pos)];
    }
    return out;
}

inline double tv_distance(std::span<const double> p, std::span<const double> q) {
    double tv = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) tv += std::abs(p[k] - q[k]);
    return 0.5 * tv;
}

/// Random utility table with entries in [-1, 1].
inline UtilityTable random_utilities(int n, Rng& rng) {
    UtilityTable u(n);
    for (int i = 0; i < n; ++i)
        for (std::uint64_t g = 0; g < network_space_size(n); ++g)
            u.at(i, g) = 2.0 * rng.next_unit() - 1.0;
    return u;
}

/// Random source-symmetric value table: each structure carries one shared
/// value for its sources; non-source values are arbitrary garbage, which
/// choice-equivalence says must not matter.
inline ValueTable random_source_symmetric_values(int n, Rng& rng) {
    ValueTable v(n);
    for (std::uint64_t g = 1; g < network_space_size(n); ++g) {
        const auto sources = DirectedNetwork::from_code(n, g).source_nodes();
        const double shared = 2.0 * rng.next_unit() - 1.0;
        for (int i = 0; i < n; ++i) {
            bool is_source = false;
            for (int s : sources) is_source |= (s == i);
            v.at(i, g) = is_source ? shared : 2.0 * rng.next_unit() - 1.0;
        }
    }
    return v;
}

/// Structures with at least two sources, i.e. where symmetry binds.
inline std::vector<std::uint64_t> shared_structures(int n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t g = 1; g < network_space_size(n); ++g)
        if (DirectedNetwork::from_code(n, g).source_nodes().size() >= 2) out.push_back(g);
    return out;
}

/// Dense matrix exponential by scaling and squaring on a Taylor series;
/// fine as a test-only oracle for tiny generators.
inline std::vector<double> expm_times_vector(const std::vector<std::vector<double>>& q, double t,
                                             std::vector<double> v) {
    const std::size_t n = v.size();
    int squarings = 0;
    double norm = 0.0;
    for (const auto& row : q)
        for (double x : row) norm = std::max(norm, std::abs(x) * t);
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    const double h = t / std::ldexp(1.0, squarings);
    // P = exp(Q h) by Taylor to machine precision
    std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> term(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) p[i][i] = term[i][i] = 1.0;
    for (int k = 1; k <= 24; ++k) {
        std::vector<std::vector<double>> next(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l) {
                if (term[i][l] == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j)
                    next[i][j] += term[i][l] * q[l][j] * h / k;
            }
        term = next;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) p[i][j] += term[i][j];
    }
    for (int s = 0; s < squarings; ++s) {
        std::vector<std::vector<double>> sq(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l)
                for (std::size_t j = 0; j < n; ++j) sq[i][j] += p[i][l] * p[l][j];
        p = sq;
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j] += v[i] * p[i][j];
    return out;
}

} // namespace testsupport
