#include "docforge/runrecord.hpp"

#include <fstream>

#include "docforge/error.hpp"
#include "docforge/sha256.hpp"

namespace docforge {

std::string sha256_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open input for hashing: " + path);
    }
    Sha256 h;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        if (got > 0) {
            h.update(buf, static_cast<std::size_t>(got));
        }
    }
    return hex_digest(h.finish());
}

void RunRecord::add_input(const std::string& path) {
    input_hashes[path] = sha256_file_hex(path);
}

void RunRecord::write(const std::string& path) const {
    nlohmann::json j;
    j["tool"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["config_hash"] = hex_digest(Sha256::of_string(config.dump()));
    j["inputs"] = input_hashes;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write run record: " + path);
    }
    out << j.dump(2) << "\n";
}

}  // namespace docforge
