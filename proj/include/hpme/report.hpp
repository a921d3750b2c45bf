#pragma once
// Deterministic run reporting: config hashing, shortest-round-trip number
// formatting, CSV writing, and the run manifest.  Reports carry the hash of
// the resolved config and the identifiers of the checks they certify; no
// timestamps or machine state, so identical configs yield byte-identical
// files.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hpme {

using ordered_json = nlohmann::ordered_json;

// FNV-1a over the canonical (sorted-key, shortest-float) serialization.
std::uint64_t fnv1a(const std::string& bytes);
std::string config_hash(const ordered_json& config);

// Shortest round-trip decimal form ("3", "1.5", "6.6703e-04" style is NOT
// used: to_chars general format, e.g. "0.00066703").  inf/nan spelled out.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::initializer_list<double> vals);
    std::string to_string() const;  // header + rows, '\n' endings
};

struct RunManifest {
    std::string command;
    std::string config_path;  // empty when flags only
    std::string output_dir;
    bool seedless_deterministic = true;
    std::string tool_version;

    ordered_json to_json() const;
};

// Assembles the report envelope shared by every subcommand: command name,
// resolved config + its hash, the check identifiers certified by the run,
// and the overall pass flag; payload fields follow.
ordered_json report_envelope(const std::string& command, const ordered_json& config,
                             const std::vector<std::string>& certifies, bool pass);

// Writes text to path (parent directories created); throws on I/O failure.
void write_text(const std::string& path, const std::string& content);

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace hpme
