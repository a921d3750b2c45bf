#include "hpme/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace hpme {

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash(const ordered_json& config) {
    // Canonicalize through the sorted-key variant so flag order cannot leak
    // into the hash.
    const nlohmann::json sorted = config;
    const std::uint64_t h = fnv1a(sorted.dump());
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) buf[15 - i] = hex[(h >> (4 * i)) & 0xF];
    buf[16] = '\0';
    return std::string(buf);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // normalize -0
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::initializer_list<double> vals) {
    if (vals.size() != columns.size())
        throw std::invalid_argument("csv: row width does not match the header");
    rows.emplace_back(vals);
}

std::string CsvTable::to_string() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ',';
        out += columns[c];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_double(row[c]);
        }
        out += '\n';
    }
    return out;
}

ordered_json RunManifest::to_json() const {
    ordered_json j;
    j["command"] = command;
    j["config_path"] = config_path;
    j["output_dir"] = output_dir;
    j["seedless_deterministic"] = seedless_deterministic;
    j["tool_version"] = tool_version;
    return j;
}

ordered_json report_envelope(const std::string& command, const ordered_json& config,
                             const std::vector<std::string>& certifies, bool pass) {
    ordered_json j;
    j["command"] = command;
    j["tool_version"] = kToolVersion;
    j["config"] = config;
    j["config_hash"] = config_hash(config);
    j["certifies"] = certifies;
    j["pass"] = pass;
    return j;
}

void write_text(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace hpme
