#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace docforge {

using Digest256 = std::array<std::uint8_t, 32>;

/// Incremental SHA-256 (FIPS 180-4).
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t len);
    Digest256 finish();

    static Digest256 of(const void* data, std::size_t len);
    static Digest256 of_string(const std::string& s);

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_;
    std::size_t buffered_ = 0;
    std::uint64_t total_ = 0;
};

std::string hex_digest(const Digest256& d);
Digest256 digest_from_hex(const std::string& hex);

}  // namespace docforge
