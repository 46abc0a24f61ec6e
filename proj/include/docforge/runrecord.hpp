#pragma once

#include <map>
#include <string>

#include <json.hpp>

namespace docforge {

constexpr const char* kToolVersion = "docforge 0.1.0";

/// Reproducibility sidecar written next to every subcommand's outputs:
/// resolved config, its hash, and SHA-256 of each input file. No timestamps,
/// so reruns stay byte-identical.
struct RunRecord {
    std::string subcommand;
    nlohmann::json config = nlohmann::json::object();
    std::map<std::string, std::string> input_hashes;  // path -> sha256 hex

    void add_input(const std::string& path);
    void write(const std::string& path) const;
};

std::string sha256_file_hex(const std::string& path);

}  // namespace docforge
