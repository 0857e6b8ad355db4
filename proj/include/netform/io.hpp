#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "netform/errors.hpp"
#include "netform/version.hpp"

namespace netform {

/// 17 significant digits, locale independent: enough to round-trip any
/// double bit-exactly.
inline std::string format_double(double x) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// CSV accumulator: '\n' endings, '.' decimal separator, leading comment
/// line with the library version and config hash.
class Csv {
public:
    explicit Csv(std::string_view config_hash) {
        buf_ = "# netform ";
        buf_ += kVersion;
        buf_ += " config=";
        buf_ += config_hash;
        buf_ += '\n';
    }

    void header(std::string_view columns) {
        buf_ += columns;
        buf_ += '\n';
    }

    Csv& field(std::string_view s) {
        if (!line_empty_) buf_ += ',';
        buf_ += s;
        line_empty_ = false;
        return *this;
    }
    Csv& field(double x) { return field(format_double(x)); }
    Csv& field(std::uint64_t x) { return field(std::to_string(x)); }
    Csv& field(int x) { return field(std::to_string(x)); }

    void end_row() {
        buf_ += '\n';
        line_empty_ = true;
    }

    const std::string& str() const { return buf_; }

private:
    std::string buf_;
    bool line_empty_ = true;
};

/// Writes via a sibling temp file and an atomic rename.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path() && !path.parent_path().empty())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("failed renaming temp file onto '" + path.string() + "': " + ec.message());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

} // namespace netform
