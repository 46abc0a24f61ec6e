#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace docforge {

std::string base64_encode(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> base64_decode(const std::string& text);

/// f32 little-endian <-> base64, the wire form for pixel crops.
std::string floats_to_base64(std::span<const float> values);
std::vector<float> base64_to_floats(const std::string& text);

}  // namespace docforge
