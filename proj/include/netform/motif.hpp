#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "netform/game.hpp"
#include "netform/network.hpp"

namespace netform {

inline constexpr int kMaxMotifNodes = 8;

/// Small directed graph pattern. Every node must be incident to an edge;
/// an isolated node would silently change the N^{n_m} scaling, so such
/// motifs are rejected at construction.
class Motif {
public:
    explicit Motif(DirectedNetwork graph) : graph_(std::move(graph)) {
        if (graph_.n_nodes() > kMaxMotifNodes)
            throw InfeasibleSizeError("motifs limited to " + std::to_string(kMaxMotifNodes) + " nodes");
        if (graph_.edge_count() == 0) throw InvalidInputError("motif has no edges");
        edges_ = graph_.edges();
        std::vector<bool> incident(static_cast<std::size_t>(graph_.n_nodes()), false);
        for (const Dyad& d : edges_) {
            incident[static_cast<std::size_t>(d.source)] = true;
            incident[static_cast<std::size_t>(d.target)] = true;
        }
        if (!std::all_of(incident.begin(), incident.end(), [](bool b) { return b; }))
            throw InvalidInputError("motif has an isolated node");
        sources_ = graph_.source_nodes();
        compute_symmetry();
    }

    /// Text format "nodes=<n>; edges=1->2,2->3,..." (1-based).
    static Motif parse(std::string_view text) {
        text = detail::trim(text);
        if (!text.starts_with("nodes="))
            throw InvalidInputError("motif text must start with 'nodes='");
        const std::size_t semi = text.find(';');
        if (semi == std::string_view::npos)
            throw InvalidInputError("motif text missing '; edges=' part");
        const int n = detail::parse_int(text.substr(6, semi - 6), "motif node count");
        std::string_view rest = detail::trim(text.substr(semi + 1));
        if (!rest.starts_with("edges="))
            throw InvalidInputError("motif text missing 'edges=' part");
        return Motif(DirectedNetwork::from_edges(n, detail::parse_edge_list(rest.substr(6))));
    }

    static Motif single_link() { return Motif(DirectedNetwork::from_edges(2, {{0, 1}})); }
    static Motif reciprocal_pair() { return Motif(DirectedNetwork::from_edges(2, {{0, 1}, {1, 0}})); }

    static Motif directed_cycle(int n_nodes) {
        std::vector<Dyad> edges;
        for (int i = 0; i < n_nodes; ++i) edges.push_back({i, (i + 1) % n_nodes});
        return Motif(DirectedNetwork::from_edges(n_nodes, edges));
    }

    /// The n-node chain {12, 23, ..., (n-1)n}.
    static Motif chain(int n_nodes) {
        std::vector<Dyad> edges;
        for (int i = 0; i + 1 < n_nodes; ++i) edges.push_back({i, i + 1});
        return Motif(DirectedNetwork::from_edges(n_nodes, edges));
    }

    const DirectedNetwork& graph() const { return graph_; }
    const std::vector<Dyad>& edges() const { return edges_; }
    int node_count() const { return graph_.n_nodes(); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    /// h_m: number of node permutations mapping the edge set onto itself.
    int degeneracy() const { return degeneracy_; }

    /// J_src(m), sorted.
    const std::vector<int>& sources() const { return sources_; }
    int source_count() const { return static_cast<int>(sources_.size()); }

    /// Minimal edge code over all node relabelings; equal codes mean
    /// isomorphic motifs.
    std::uint64_t canonical_code() const { return canonical_code_; }

    std::string to_text() const {
        std::string s = graph_.to_text();
        s.replace(0, 1, "nodes");
        return s;
    }

private:
    void compute_symmetry() {
        const int n = graph_.n_nodes();
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        degeneracy_ = 0;
        canonical_code_ = ~0ull;
        do {
            std::uint64_t code = 0;
            for (const Dyad& d : edges_)
                code |= 1ull << dyad_index(n, {perm[static_cast<std::size_t>(d.source)],
                                               perm[static_cast<std::size_t>(d.target)]});
            if (code == graph_.code()) ++degeneracy_;
            canonical_code_ = std::min(canonical_code_, code);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    DirectedNetwork graph_;
    std::vector<Dyad> edges_;
    std::vector<int> sources_;
    int degeneracy_ = 1;
    std::uint64_t canonical_code_ = 0;
};

inline int degeneracy(const Motif& m) { return m.degeneracy(); }

namespace detail {

/// Visit order for backtracking: previously connected nodes first, so edge
/// checks prune as early as possible.
inline std::vector<int> motif_visit_order(const Motif& m) {
    const int n = m.node_count();
    std::vector<int> order;
    std::vector<bool> placed(static_cast<std::size_t>(n), false);
    auto connectivity = [&](int v) {
        int c = 0;
        for (const Dyad& d : m.edges()) {
            if (d.source == v && placed[static_cast<std::size_t>(d.target)]) ++c;
            if (d.target == v && placed[static_cast<std::size_t>(d.source)]) ++c;
        }
        return c;
    };
    for (int step = 0; step < n; ++step) {
        int best = -1, best_c = -1;
        for (int v = 0; v < n; ++v) {
            if (placed[static_cast<std::size_t>(v)]) continue;
            const int c = connectivity(v);
            if (c > best_c) { best = v; best_c = c; }
        }
        order.push_back(best);
        placed[static_cast<std::size_t>(best)] = true;
    }
    return order;
}

struct MotifMatcher {
    const Motif& m;
    const DirectedNetwork& g;
    std::vector<int> order;                       // motif nodes in visit order
    std::vector<std::vector<Dyad>> checks;        // per step: motif edges fully placed at that step
    std::vector<int> assignment;                  // motif node -> network node
    std::vector<bool> used;                       // network node taken (injective mode)
    bool injective = true;

    MotifMatcher(const Motif& motif, const DirectedNetwork& net, bool inj)
        : m(motif), g(net), order(motif_visit_order(motif)),
          checks(order.size()),
          assignment(static_cast<std::size_t>(motif.node_count()), -1),
          used(static_cast<std::size_t>(net.n_nodes()), false),
          injective(inj) {
        std::vector<int> step_of(static_cast<std::size_t>(m.node_count()), 0);
        for (std::size_t s = 0; s < order.size(); ++s) step_of[static_cast<std::size_t>(order[s])] = static_cast<int>(s);
        for (const Dyad& d : m.edges()) {
            const int s = std::max(step_of[static_cast<std::size_t>(d.source)], step_of[static_cast<std::size_t>(d.target)]);
            checks[static_cast<std::size_t>(s)].push_back(d);
        }
    }

    template <class OnMatch>
    void run(OnMatch&& on_match) {
        recurse(0, on_match);
    }

    template <class OnMatch>
    void recurse(std::size_t step, OnMatch& on_match) {
        if (step == order.size()) {
            on_match(assignment);
            return;
        }
        const int v = order[step];
        for (int node = 0; node < g.n_nodes(); ++node) {
            if (injective && used[static_cast<std::size_t>(node)]) continue;
            assignment[static_cast<std::size_t>(v)] = node;
            bool ok = true;
            for (const Dyad& d : checks[step]) {
                const int a = assignment[static_cast<std::size_t>(d.source)];
                const int b = assignment[static_cast<std::size_t>(d.target)];
                // collapsed endpoints can only happen in non-injective mode;
                // no self-loops exist, so such maps never match
                if (a == b || !g.has({a, b})) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                used[static_cast<std::size_t>(node)] = true;
                recurse(step + 1, on_match);
                used[static_cast<std::size_t>(node)] = false;
            }
        }
        assignment[static_cast<std::size_t>(v)] = -1;
    }
};

inline void check_density_budget(const Motif& m, const DirectedNetwork& g) {
    // worst case the pruned search still touches ~N^{n_m} states
    const double budget = std::pow(static_cast<double>(g.n_nodes()), m.node_count());
    if (budget > 1e12)
        throw InfeasibleSizeError("motif enumeration over N^" + std::to_string(m.node_count()) +
                                  " maps exceeds the budget at N=" + std::to_string(g.n_nodes()));
}

} // namespace detail

/// Exact injective match counts: total and, per network node, the number
/// of matches in which that node is an image of a motif source.
struct MotifCounts {
    std::uint64_t total = 0;
    std::vector<std::uint64_t> per_source_node;
};

inline MotifCounts count_injective(const Motif& m, const DirectedNetwork& g) {
    detail::check_density_budget(m, g);
    MotifCounts counts;
    counts.per_source_node.assign(static_cast<std::size_t>(g.n_nodes()), 0);
    if (m.node_count() > g.n_nodes()) return counts;
    detail::MotifMatcher matcher(m, g, /*inj=*/true);
    matcher.run([&](const std::vector<int>& assignment) {
        ++counts.total;
        for (int src : m.sources()) ++counts.per_source_node[static_cast<std::size_t>(assignment[static_cast<std::size_t>(src)])];
    });
    return counts;
}

/// Edge-preserving maps without the injectivity requirement.
inline std::uint64_t count_homomorphisms(const Motif& m, const DirectedNetwork& g) {
    detail::check_density_budget(m, g);
    std::uint64_t total = 0;
    detail::MotifMatcher matcher(m, g, /*inj=*/false);
    matcher.run([&](const std::vector<int>&) { ++total; });
    return total;
}

namespace detail {

inline double int_pow(double base, int e) {
    if (e < 0) return 1.0 / int_pow(base, -e);
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= base;
    return r;
}

} // namespace detail

/// b_{i,N}(m, g) = (N / |J_src(m)|) N^{-n_m} * #{injective matches with i
/// as an image of a motif source}. Single exact-integer division, so equal
/// count ratios give bit-identical densities.
inline double participation_density(int node, const Motif& m, const DirectedNetwork& g) {
    detail::check_node(node, g.n_nodes());
    const MotifCounts counts = count_injective(m, g);
    const double num = static_cast<double>(counts.per_source_node[static_cast<std::size_t>(node)]) *
                       static_cast<double>(g.n_nodes());
    const double den = static_cast<double>(m.source_count()) *
                       detail::int_pow(static_cast<double>(g.n_nodes()), m.node_count());
    return num / den;
}

/// b_N(m, g) = N^{-n_m} * #injective matches = (1/N) sum_i b_{i,N}(m, g).
inline double subgraph_density(const Motif& m, const DirectedNetwork& g) {
    return static_cast<double>(count_injective(m, g).total) /
           detail::int_pow(static_cast<double>(g.n_nodes()), m.node_count());
}

/// t(m, g) = N^{-n_m} * #homomorphisms; satisfies
/// t - (1/N) C(n_m, 2) <= b_N <= t.
inline double homomorphism_density(const Motif& m, const DirectedNetwork& g) {
    return static_cast<double>(count_homomorphisms(m, g)) /
           detail::int_pow(static_cast<double>(g.n_nodes()), m.node_count());
}

/// Finite motif set with values and choice noise. Agents derive value
/// a_m / N^{n_m - 2} from each realization of m they source.
class MotifModel {
public:
    MotifModel(std::vector<Motif> motifs, std::vector<double> values, double sigma)
        : motifs_(std::move(motifs)), values_(std::move(values)), sigma_(sigma) {
        if (motifs_.empty()) throw InvalidInputError("motif set is empty");
        if (motifs_.size() != values_.size())
            throw InvalidInputError("motif and value counts differ");
        if (!(sigma > 0.0 && sigma < 1.0))
            throw InvalidInputError("sigma must lie strictly inside (0,1)");
        for (std::size_t a = 0; a < motifs_.size(); ++a)
            for (std::size_t b = a + 1; b < motifs_.size(); ++b)
                if (motifs_[a].node_count() == motifs_[b].node_count() &&
                    motifs_[a].canonical_code() == motifs_[b].canonical_code())
                    throw InvalidInputError("duplicate (isomorphic) motifs in model");
    }

    const std::vector<Motif>& motifs() const { return motifs_; }
    const std::vector<double>& values() const { return values_; }
    double value(std::size_t k) const { return values_[k]; }
    double sigma() const { return sigma_; }

    /// (1 - sigma) / sigma, the inverse-noise scale of the Gibbs law.
    double beta() const { return (1.0 - sigma_) / sigma_; }

private:
    std::vector<Motif> motifs_;
    std::vector<double> values_;
    double sigma_;
};

/// U^M_{i,N}(g; a) = N sum_m |J_src(m)| (a_m / h_m) b_{i,N}(m, g).
inline double motif_utility(int node, const DirectedNetwork& g, const MotifModel& model) {
    double total = 0.0;
    for (std::size_t k = 0; k < model.motifs().size(); ++k) {
        const Motif& m = model.motifs()[k];
        total += static_cast<double>(g.n_nodes()) * m.source_count() *
                 (model.value(k) / m.degeneracy()) * participation_density(node, m, g);
    }
    return total;
}

/// Phi^M_N(g; a) = N^2 sum_m (a_m / h_m) b_N(m, g).
inline double motif_potential(const DirectedNetwork& g, const MotifModel& model) {
    double total = 0.0;
    const double n2 = static_cast<double>(g.n_nodes()) * static_cast<double>(g.n_nodes());
    for (std::size_t k = 0; k < model.motifs().size(); ++k) {
        const Motif& m = model.motifs()[k];
        total += n2 * (model.value(k) / m.degeneracy()) * subgraph_density(m, g);
    }
    return total;
}

/// Injective matches of m inside g that use the dyad d. Requires d in g.
/// Anchoring phi over motif edges partitions the matches, so there is no
/// double counting.
inline std::uint64_t count_injective_through(const Motif& m, const DirectedNetwork& g, Dyad d) {
    detail::check_density_budget(m, g);
    if (m.node_count() > g.n_nodes()) return 0;
    std::uint64_t total = 0;
    for (const Dyad& anchor : m.edges()) {
        if (anchor.source == anchor.target) continue;
        detail::MotifMatcher matcher(m, g, /*inj=*/true);
        // pre-place the anchor edge onto d
        auto& assign = matcher.assignment;
        auto& used = matcher.used;
        assign[static_cast<std::size_t>(anchor.source)] = d.source;
        assign[static_cast<std::size_t>(anchor.target)] = d.target;
        used[static_cast<std::size_t>(d.source)] = true;
        used[static_cast<std::size_t>(d.target)] = true;
        // rebuild order over the remaining nodes
        std::vector<int> rest;
        for (int v : matcher.order)
            if (v != anchor.source && v != anchor.target) rest.push_back(v);
        matcher.order = {anchor.source, anchor.target};
        matcher.order.insert(matcher.order.end(), rest.begin(), rest.end());
        // recompute per-step checks for the new order
        std::vector<int> step_of(static_cast<std::size_t>(m.node_count()), 0);
        for (std::size_t s = 0; s < matcher.order.size(); ++s)
            step_of[static_cast<std::size_t>(matcher.order[s])] = static_cast<int>(s);
        for (auto& c : matcher.checks) c.clear();
        matcher.checks.resize(matcher.order.size());
        for (const Dyad& e : m.edges()) {
            const int s = std::max(step_of[static_cast<std::size_t>(e.source)],
                                   step_of[static_cast<std::size_t>(e.target)]);
            matcher.checks[static_cast<std::size_t>(s)].push_back(e);
        }
        // verify the two pre-placed steps' edge checks, then extend
        bool ok = true;
        for (std::size_t s = 0; s < 2 && ok; ++s)
            for (const Dyad& e : matcher.checks[s])
                if (!g.has({assign[static_cast<std::size_t>(e.source)], assign[static_cast<std::size_t>(e.target)]})) {
                    ok = false;
                    break;
                }
        // injectivity makes the motif edge landing on d unique per match,
        // so summing over anchors counts each match exactly once
        auto bump = [&](const std::vector<int>&) { ++total; };
        if (ok) matcher.recurse(2, bump);
        used[static_cast<std::size_t>(d.source)] = false;
        used[static_cast<std::size_t>(d.target)] = false;
    }
    return total;
}

/// Marginal utility of toggling d for its source agent,
/// U_i(tau_d(g)) - U_i(g). Since the dyad's source is a source node of
/// every realization through d, this equals the potential increment.
inline double motif_marginal_utility(const MotifModel& model, const DirectedNetwork& g, Dyad d) {
    const bool adding = !g.has(d);
    const DirectedNetwork larger = adding ? g.toggled(d) : g;
    double delta = 0.0;
    for (std::size_t k = 0; k < model.motifs().size(); ++k) {
        const Motif& m = model.motifs()[k];
        const std::uint64_t through = count_injective_through(m, larger, d);
        if (through == 0) continue;
        const double scale = model.value(k) / m.degeneracy() *
                             detail::int_pow(static_cast<double>(g.n_nodes()), 2 - m.node_count());
        delta += scale * static_cast<double>(through);
    }
    return adding ? delta : -delta;
}

/// Dense finite-N utility table of the motif game. N <= kMaxEnumerationNodes.
inline UtilityTable motif_utility_table(const MotifModel& model, int n_nodes) {
    UtilityTable u(n_nodes);
    for (std::uint64_t code = 0; code < network_space_size(n_nodes); ++code) {
        const DirectedNetwork g = DirectedNetwork::from_code(n_nodes, code);
        std::vector<MotifCounts> counts;
        counts.reserve(model.motifs().size());
        for (const Motif& m : model.motifs()) counts.push_back(count_injective(m, g));
        for (int i = 0; i < n_nodes; ++i) {
            double total = 0.0;
            for (std::size_t k = 0; k < model.motifs().size(); ++k) {
                const Motif& m = model.motifs()[k];
                const double b = static_cast<double>(counts[k].per_source_node[static_cast<std::size_t>(i)]) *
                                 static_cast<double>(n_nodes) /
                                 (static_cast<double>(m.source_count()) *
                                  detail::int_pow(static_cast<double>(n_nodes), m.node_count()));
                total += static_cast<double>(n_nodes) * m.source_count() * (model.value(k) / m.degeneracy()) * b;
            }
            u.at(i, code) = total;
        }
    }
    return u;
}

inline PotentialTable motif_potential_table(const MotifModel& model, int n_nodes) {
    PotentialTable phi(n_nodes);
    for (std::uint64_t code = 0; code < network_space_size(n_nodes); ++code)
        phi[code] = motif_potential(DirectedNetwork::from_code(n_nodes, code), model);
    return phi;
}

} // namespace netform
