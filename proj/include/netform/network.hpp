#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "netform/errors.hpp"

namespace netform {

/// Ordered pair of distinct nodes (0-based).
struct Dyad {
    int source = 0;
    int target = 0;

    friend bool operator==(const Dyad&, const Dyad&) = default;
};

/// Full enumeration of G_N is capped at 2^20 states.
inline constexpr int kMaxEnumerationNodes = 5;

/// Subset enumeration of a network's edges is capped at 2^24 terms.
inline constexpr int kMaxSubsetEdges = 24;

namespace detail {

inline void check_node(int node, int n_nodes) {
    if (node < 0 || node >= n_nodes)
        throw InvalidInputError("node id " + std::to_string(node) +
                                " out of range for " + std::to_string(n_nodes) + " nodes");
}

} // namespace detail

/// Canonical dyad indexing, stable across the whole library and all file
/// formats: index(i, j) = i * (N - 1) + (j < i ? j : j - 1) with 0-based
/// nodes. This is a bijection {(i, j) : i != j} <-> {0, ..., N(N-1)-1};
/// block i holds the N-1 dyads with source i, ordered by target.
inline int dyad_index(int n_nodes, Dyad d) {
    detail::check_node(d.source, n_nodes);
    detail::check_node(d.target, n_nodes);
    if (d.source == d.target)
        throw InvalidInputError("self-loop dyad (" + std::to_string(d.source) + "," +
                                std::to_string(d.target) + ")");
    return d.source * (n_nodes - 1) + (d.target < d.source ? d.target : d.target - 1);
}

/// Inverse of dyad_index.
inline Dyad dyad_at(int n_nodes, int index) {
    const int src = index / (n_nodes - 1);
    const int off = index % (n_nodes - 1);
    return Dyad{src, off < src ? off : off + 1};
}

/// A directed network over N labeled nodes: an edge set encoded as a
/// fixed-width bit vector of length N(N-1), bit k corresponding to the
/// dyad with canonical index k. No self-loops by construction.
///
/// Networks are immutable values for all callers; toggled() returns a new
/// value. toggle_in_place() exists for hot loops that own their copy.
class DirectedNetwork {
public:
    explicit DirectedNetwork(int n_nodes) : n_nodes_(n_nodes) {
        if (n_nodes < 2) throw InvalidInputError("network needs at least 2 nodes");
        bits_.assign(static_cast<std::size_t>((dyad_count() + 63) / 64), 0);
    }

    /// Network whose bit vector equals `code` (bit k = dyad k). Requires
    /// N(N-1) <= 63.
    static DirectedNetwork from_code(int n_nodes, std::uint64_t code) {
        DirectedNetwork g(n_nodes);
        if (g.dyad_count() > 63)
            throw InfeasibleSizeError("bit-vector code only defined up to 63 dyads");
        if (g.dyad_count() < 63 && (code >> g.dyad_count()) != 0)
            throw InvalidInputError("code has bits beyond the dyad range");
        g.bits_[0] = code;
        return g;
    }

    static DirectedNetwork from_edges(int n_nodes, const std::vector<Dyad>& edges) {
        DirectedNetwork g(n_nodes);
        for (const Dyad& d : edges) g.set_index(dyad_index(n_nodes, d));
        return g;
    }

    static DirectedNetwork complete(int n_nodes) {
        DirectedNetwork g(n_nodes);
        for (int k = 0; k < g.dyad_count(); ++k) g.set_index(k);
        return g;
    }

    int n_nodes() const { return n_nodes_; }
    int dyad_count() const { return n_nodes_ * (n_nodes_ - 1); }

    bool has_index(int index) const {
        return (bits_[static_cast<std::size_t>(index) >> 6] >> (index & 63)) & 1u;
    }

    bool has(Dyad d) const { return has_index(dyad_index(n_nodes_, d)); }

    /// |g|: number of edges.
    int edge_count() const {
        int c = 0;
        for (std::uint64_t w : bits_) c += std::popcount(w);
        return c;
    }

    void toggle_in_place(Dyad d) {
        const int k = dyad_index(n_nodes_, d);
        bits_[static_cast<std::size_t>(k) >> 6] ^= 1ull << (k & 63);
    }

    /// tau_d(g): creates the link if absent, severs it if present.
    DirectedNetwork toggled(Dyad d) const {
        DirectedNetwork g = *this;
        g.toggle_in_place(d);
        return g;
    }

    /// J_src(g): nodes with at least one outgoing link.
    std::vector<int> source_nodes() const {
        std::vector<int> out;
        for (int i = 0; i < n_nodes_; ++i) {
            bool src = false;
            const int base = i * (n_nodes_ - 1);
            for (int off = 0; off < n_nodes_ - 1 && !src; ++off)
                src = has_index(base + off);
            if (src) out.push_back(i);
        }
        return out;
    }

    std::vector<Dyad> edges() const {
        std::vector<Dyad> out;
        out.reserve(static_cast<std::size_t>(edge_count()));
        for (int k = 0; k < dyad_count(); ++k)
            if (has_index(k)) out.push_back(dyad_at(n_nodes_, k));
        return out;
    }

    bool is_subset_of(const DirectedNetwork& other) const {
        if (n_nodes_ != other.n_nodes_) return false;
        for (std::size_t w = 0; w < bits_.size(); ++w)
            if (bits_[w] & ~other.bits_[w]) return false;
        return true;
    }

    /// Bit vector as an integer; requires N(N-1) <= 63.
    std::uint64_t code() const {
        if (dyad_count() > 63)
            throw InfeasibleSizeError("bit-vector code only defined up to 63 dyads");
        return bits_[0];
    }

    /// Hex encoding of the bit vector: ceil(N(N-1)/4) lowercase nibbles,
    /// most significant first, bit k weighted 2^k. Fixed width, portable.
    std::string to_hex() const {
        const int nibbles = (dyad_count() + 3) / 4;
        std::string s(static_cast<std::size_t>(nibbles), '0');
        for (int n = 0; n < nibbles; ++n) {
            const int v = static_cast<int>((bits_[static_cast<std::size_t>(n) >> 4] >> ((n & 15) * 4)) & 0xF);
            s[static_cast<std::size_t>(nibbles - 1 - n)] = "0123456789abcdef"[v];
        }
        return s;
    }

    static DirectedNetwork from_hex(int n_nodes, std::string_view hex) {
        DirectedNetwork g(n_nodes);
        const int nibbles = (g.dyad_count() + 3) / 4;
        if (static_cast<int>(hex.size()) != nibbles)
            throw InvalidInputError("hex network string has wrong width");
        for (int n = 0; n < nibbles; ++n) {
            const char c = hex[static_cast<std::size_t>(nibbles - 1 - n)];
            int v;
            if (c >= '0' && c <= '9') v = c - '0';
            else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
            else throw InvalidInputError("bad hex digit in network string");
            g.bits_[static_cast<std::size_t>(n) >> 4] |= static_cast<std::uint64_t>(v) << ((n & 15) * 4);
        }
        if (g.dyad_count() % 4 != 0) {
            const int spare = g.dyad_count() % 64;
            if (spare != 0 && (g.bits_.back() >> spare) != 0)
                throw InvalidInputError("hex network string has bits beyond the dyad range");
        }
        return g;
    }

    /// Text format "N=<n>; edges=i->j,i->j,..." with 1-based node ids.
    std::string to_text() const {
        std::string s = "N=" + std::to_string(n_nodes_) + "; edges=";
        bool first = true;
        for (const Dyad& d : edges()) {
            if (!first) s += ',';
            s += std::to_string(d.source + 1) + "->" + std::to_string(d.target + 1);
            first = false;
        }
        return s;
    }

    static DirectedNetwork parse(std::string_view text);

    friend bool operator==(const DirectedNetwork& a, const DirectedNetwork& b) {
        return a.n_nodes_ == b.n_nodes_ && a.bits_ == b.bits_;
    }

private:
    void set_index(int index) { bits_[static_cast<std::size_t>(index) >> 6] |= 1ull << (index & 63); }

    int n_nodes_;
    std::vector<std::uint64_t> bits_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

inline int parse_int(std::string_view s, const char* what) {
    s = trim(s);
    int value = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw InvalidInputError(std::string("cannot parse ") + what + " from '" + std::string(s) + "'");
    return value;
}

/// Parses "i->j,i->j,..." with 1-based ids into 0-based dyads.
inline std::vector<Dyad> parse_edge_list(std::string_view list) {
    std::vector<Dyad> edges;
    list = trim(list);
    while (!list.empty()) {
        const std::size_t comma = list.find(',');
        std::string_view item = trim(list.substr(0, comma));
        const std::size_t arrow = item.find("->");
        if (arrow == std::string_view::npos)
            throw InvalidInputError("edge '" + std::string(item) + "' is not of the form i->j");
        edges.push_back(Dyad{parse_int(item.substr(0, arrow), "edge source") - 1,
                             parse_int(item.substr(arrow + 2), "edge target") - 1});
        if (comma == std::string_view::npos) break;
        list = list.substr(comma + 1);
    }
    return edges;
}

} // namespace detail

inline DirectedNetwork DirectedNetwork::parse(std::string_view text) {
    text = detail::trim(text);
    if (!text.starts_with("N="))
        throw InvalidInputError("network text must start with 'N='");
    const std::size_t semi = text.find(';');
    if (semi == std::string_view::npos)
        throw InvalidInputError("network text missing '; edges=' part");
    const int n = detail::parse_int(text.substr(2, semi - 2), "node count");
    std::string_view rest = detail::trim(text.substr(semi + 1));
    if (!rest.starts_with("edges="))
        throw InvalidInputError("network text missing 'edges=' part");
    return from_edges(n, detail::parse_edge_list(rest.substr(6)));
}

inline std::uint64_t network_space_size(int n_nodes) {
    if (n_nodes < 2 || n_nodes > kMaxEnumerationNodes)
        throw InfeasibleSizeError(
            "full enumeration limited to N in [2," + std::to_string(kMaxEnumerationNodes) +
            "]: 2^" + std::to_string(n_nodes * (n_nodes - 1)) + " states would overflow the budget");
    return 1ull << (n_nodes * (n_nodes - 1));
}

/// Single-consumer stream of all 2^{N(N-1)} networks, in increasing
/// bit-vector order. N <= kMaxEnumerationNodes.
class NetworkRange {
public:
    explicit NetworkRange(int n_nodes)
        : n_nodes_(n_nodes), count_(network_space_size(n_nodes)) {}

    class iterator {
    public:
        iterator(int n_nodes, std::uint64_t code) : n_nodes_(n_nodes), code_(code) {}
        DirectedNetwork operator*() const { return DirectedNetwork::from_code(n_nodes_, code_); }
        iterator& operator++() { ++code_; return *this; }
        friend bool operator!=(const iterator& a, const iterator& b) { return a.code_ != b.code_; }

    private:
        int n_nodes_;
        std::uint64_t code_;
    };

    iterator begin() const { return iterator(n_nodes_, 0); }
    iterator end() const { return iterator(n_nodes_, count_); }
    std::uint64_t size() const { return count_; }

private:
    int n_nodes_;
    std::uint64_t count_;
};

inline NetworkRange enumerate_networks(int n_nodes) { return NetworkRange(n_nodes); }

/// Single-consumer stream of all 2^{|g|} edge subsets of g, each keeping
/// g's node count. |g| <= kMaxSubsetEdges.
class SubnetworkRange {
public:
    explicit SubnetworkRange(const DirectedNetwork& g)
        : n_nodes_(g.n_nodes()), positions_() {
        if (g.edge_count() > kMaxSubsetEdges)
            throw InfeasibleSizeError("subset enumeration limited to " +
                                      std::to_string(kMaxSubsetEdges) + " edges");
        for (int k = 0; k < g.dyad_count(); ++k)
            if (g.has_index(k)) positions_.push_back(k);
    }

    class iterator {
    public:
        iterator(const SubnetworkRange* range, std::uint64_t mask) : range_(range), mask_(mask) {}
        DirectedNetwork operator*() const {
            DirectedNetwork g(range_->n_nodes_);
            for (std::size_t b = 0; b < range_->positions_.size(); ++b)
                if ((mask_ >> b) & 1u) g.toggle_in_place(dyad_at(range_->n_nodes_, range_->positions_[b]));
            return g;
        }
        iterator& operator++() { ++mask_; return *this; }
        friend bool operator!=(const iterator& a, const iterator& b) { return a.mask_ != b.mask_; }

    private:
        const SubnetworkRange* range_;
        std::uint64_t mask_;
    };

    iterator begin() const { return iterator(this, 0); }
    iterator end() const { return iterator(this, 1ull << positions_.size()); }
    std::uint64_t size() const { return 1ull << positions_.size(); }

private:
    int n_nodes_;
    std::vector<int> positions_;
};

inline SubnetworkRange enumerate_subnetworks(const DirectedNetwork& g) { return SubnetworkRange(g); }

inline DirectedNetwork toggle_link(const DirectedNetwork& g, Dyad d) { return g.toggled(d); }

inline std::vector<int> source_nodes(const DirectedNetwork& g) { return g.source_nodes(); }

} // namespace netform
