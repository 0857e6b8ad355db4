#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "netform/dynamics.hpp"
#include "netform/io.hpp"
#include "netform/motif.hpp"
#include "netform/trade.hpp"
#include "netform/typed.hpp"

namespace netform {

/// Flat sectioned key-value text: `[section]` headers, `key = value`
/// lines, `#` comments. Numeric arrays are comma-separated; string arrays
/// (motif texts) are '|'-separated since motif syntax itself uses commas.
class ConfigFile {
public:
    static ConfigFile parse(std::string_view text) {
        ConfigFile cfg;
        cfg.raw_ = std::string(text);
        std::string section;
        std::size_t pos = 0, line_no = 0;
        while (pos <= text.size()) {
            const std::size_t eol = text.find('\n', pos);
            std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
            pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
            ++line_no;
            const std::size_t hash = line.find('#');
            if (hash != std::string_view::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
                section = std::string(detail::trim(line.substr(1, line.size() - 2)));
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
            const std::string key = std::string(detail::trim(line.substr(0, eq)));
            if (key.empty())
                throw ConfigError("line " + std::to_string(line_no) + ": empty key");
            cfg.entries_[section + "/" + key] = std::string(detail::trim(line.substr(eq + 1)));
        }
        return cfg;
    }

    static ConfigFile load(const std::string& path) { return parse(read_file(path)); }

    bool has(std::string_view section, std::string_view key) const {
        return entries_.count(std::string(section) + "/" + std::string(key)) != 0;
    }

    std::optional<std::string> find(std::string_view section, std::string_view key) const {
        const auto it = entries_.find(std::string(section) + "/" + std::string(key));
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    std::string get_string(std::string_view section, std::string_view key) const {
        auto v = find(section, key);
        if (!v) throw ConfigError("missing config key [" + std::string(section) + "] " + std::string(key));
        return *v;
    }

    double get_double(std::string_view section, std::string_view key) const {
        return parse_double(get_string(section, key), section, key);
    }
    double get_double(std::string_view section, std::string_view key, double fallback) const {
        auto v = find(section, key);
        return v ? parse_double(*v, section, key) : fallback;
    }

    std::int64_t get_int(std::string_view section, std::string_view key) const {
        return parse_int(get_string(section, key), section, key);
    }
    std::int64_t get_int(std::string_view section, std::string_view key, std::int64_t fallback) const {
        auto v = find(section, key);
        return v ? parse_int(*v, section, key) : fallback;
    }

    std::vector<double> get_doubles(std::string_view section, std::string_view key) const {
        const std::string raw = get_string(section, key);
        std::vector<double> out;
        for (std::string_view item : split(raw, ','))
            out.push_back(parse_double(std::string(detail::trim(item)), section, key));
        return out;
    }

    std::vector<std::string> get_strings(std::string_view section, std::string_view key) const {
        const std::string raw = get_string(section, key);
        std::vector<std::string> out;
        for (std::string_view item : split(raw, '|')) out.emplace_back(detail::trim(item));
        return out;
    }

    /// FNV-1a hash of the raw config text; stamped into every output.
    std::uint64_t hash() const { return fnv1a64(raw_); }

private:
    static std::vector<std::string_view> split(std::string_view s, char sep) {
        std::vector<std::string_view> out;
        while (true) {
            const std::size_t p = s.find(sep);
            out.push_back(s.substr(0, p));
            if (p == std::string_view::npos) break;
            s = s.substr(p + 1);
        }
        return out;
    }

    static double parse_double(const std::string& s, std::string_view section, std::string_view key) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key [" + std::string(section) + "] " + std::string(key) +
                              ": cannot parse number from '" + s + "'");
        }
    }

    static std::int64_t parse_int(const std::string& s, std::string_view section, std::string_view key) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw ConfigError("config key [" + std::string(section) + "] " + std::string(key) +
                              ": cannot parse integer from '" + s + "'");
        return v;
    }

    std::map<std::string, std::string> entries_;
    std::string raw_;
};

struct MotifsModelSpec {
    MotifModel model;
    int nodes = 0; // finite-N operations; 0 = unset
};

struct TableModelSpec {
    UtilityTable utilities;
    double sigma = 0.5;
};

struct TypedModelSpec {
    TypedModel model;
    int nodes = 0;
    std::vector<int> type_assignment; // per node; empty = balanced blocks
};

struct TradeModelSpec {
    TradeModel model;
};

using ModelSpec = std::variant<MotifsModelSpec, TableModelSpec, TypedModelSpec, TradeModelSpec>;

struct ExecutionSpec {
    std::uint64_t seed = 1;
    std::uint64_t events = 0;
    double time_horizon = 0.0;
    std::uint64_t burn_in = 0;
    std::uint64_t thinning = 0;
    int replicas = 1;
    int workers = 0; // 0 = hardware concurrency
};

/// Utility-table CSV: `agent,network_hex,value` with 1-based agents and a
/// header row; '#' comment lines are skipped. Every (agent, network) pair
/// must be present exactly once.
inline UtilityTable read_utility_csv(std::string_view content, int n_nodes) {
    UtilityTable u(n_nodes);
    std::vector<bool> seen(static_cast<std::size_t>(n_nodes) * network_space_size(n_nodes), false);
    std::size_t pos = 0;
    bool header_skipped = false;
    while (pos <= content.size()) {
        const std::size_t eol = content.find('\n', pos);
        std::string_view line = content.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? content.size() + 1 : eol + 1;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (!header_skipped) {
            header_skipped = true;
            if (line.find("agent") != std::string_view::npos) continue;
        }
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string_view::npos ? std::string_view::npos : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos)
            throw ConfigError("utility CSV row needs agent,network_hex,value: '" + std::string(line) + "'");
        const int agent = detail::parse_int(line.substr(0, c1), "agent id") - 1;
        if (agent < 0 || agent >= n_nodes) throw ConfigError("utility CSV agent id out of range");
        const DirectedNetwork g =
            DirectedNetwork::from_hex(n_nodes, detail::trim(line.substr(c1 + 1, c2 - c1 - 1)));
        const std::string value_text(detail::trim(line.substr(c2 + 1)));
        try {
            std::size_t used = 0;
            const double value = std::stod(value_text, &used);
            if (used != value_text.size()) throw std::invalid_argument(value_text);
            u.at(agent, g.code()) = value;
        } catch (const std::exception&) {
            throw ConfigError("utility CSV value is not a number: '" + value_text + "'");
        }
        seen[static_cast<std::size_t>(agent) * u.stride() + g.code()] = true;
    }
    for (bool b : seen)
        if (!b) throw ConfigError("utility CSV is missing (agent, network) entries");
    return u;
}

inline ModelSpec model_from_config(const ConfigFile& cfg) {
    const std::string kind = cfg.get_string("model", "kind");
    if (kind == "motifs") {
        std::vector<Motif> motifs;
        for (const std::string& text : cfg.get_strings("model", "motifs"))
            motifs.push_back(Motif::parse(text));
        MotifModel model(std::move(motifs), cfg.get_doubles("model", "values"),
                         cfg.get_double("model", "sigma"));
        return MotifsModelSpec{std::move(model), static_cast<int>(cfg.get_int("model", "nodes", 0))};
    }
    if (kind == "table") {
        const int nodes = static_cast<int>(cfg.get_int("model", "nodes"));
        UtilityTable u = read_utility_csv(read_file(cfg.get_string("model", "utilities_csv")), nodes);
        return TableModelSpec{std::move(u), cfg.get_double("model", "sigma", 0.5)};
    }
    if (kind == "typed") {
        const int L = static_cast<int>(cfg.get_int("model", "types"));
        std::vector<double> weights = cfg.has("model", "weights")
                                          ? cfg.get_doubles("model", "weights")
                                          : std::vector<double>(static_cast<std::size_t>(L), 1.0 / L);
        std::vector<Motif> motifs;
        for (const std::string& text : cfg.get_strings("model", "motifs"))
            motifs.push_back(Motif::parse(text));
        MotifModel motif_model(std::move(motifs), cfg.get_doubles("model", "values"),
                               cfg.get_double("model", "sigma"));
        std::vector<double> linear = cfg.has("model", "linear_costs")
                                         ? cfg.get_doubles("model", "linear_costs")
                                         : std::vector<double>(static_cast<std::size_t>(L) * L, 0.0);
        std::optional<CesAggregator> ces;
        if (cfg.has("model", "ces_alpha"))
            ces = CesAggregator{cfg.get_doubles("model", "ces_alpha"), cfg.get_doubles("model", "ces_r")};
        TypedModel model(std::move(weights), std::move(motif_model), std::move(linear), std::move(ces));
        std::vector<int> assignment;
        if (cfg.has("model", "type_assignment"))
            for (double t : cfg.get_doubles("model", "type_assignment"))
                assignment.push_back(static_cast<int>(t));
        return TypedModelSpec{std::move(model), static_cast<int>(cfg.get_int("model", "nodes", 0)),
                              std::move(assignment)};
    }
    if (kind == "trade") {
        TradeModel model;
        model.locations = static_cast<int>(cfg.get_int("model", "locations"));
        model.gamma = cfg.get_double("model", "gamma");
        model.v = cfg.get_double("model", "v", 1.0);
        model.sigma = cfg.get_double("model", "sigma", 0.25);
        if (cfg.has("model", "weights")) model.weights = cfg.get_doubles("model", "weights");
        model.validate();
        return TradeModelSpec{std::move(model)};
    }
    throw ConfigError("unknown model kind '" + kind + "'");
}

inline ExecutionSpec execution_from_config(const ConfigFile& cfg) {
    ExecutionSpec e;
    e.seed = static_cast<std::uint64_t>(cfg.get_int("execution", "seed", 1));
    e.events = static_cast<std::uint64_t>(cfg.get_int("execution", "events", 0));
    e.time_horizon = cfg.get_double("execution", "time", 0.0);
    e.burn_in = static_cast<std::uint64_t>(cfg.get_int("execution", "burn_in", 0));
    e.thinning = static_cast<std::uint64_t>(cfg.get_int("execution", "thinning", 0));
    e.replicas = static_cast<int>(cfg.get_int("execution", "replicas", 1));
    e.workers = static_cast<int>(cfg.get_int("execution", "workers", 0));
    return e;
}

} // namespace netform
