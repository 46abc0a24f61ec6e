#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace docforge {

/// The six weak-annotation classes, in wire order.
enum class TagClass : std::uint8_t {
    email = 0,
    mail_address = 1,
    price = 2,
    date = 3,
    phone = 4,
    person_name = 5,
};

constexpr std::size_t kNumTagClasses = 6;

const char* tag_class_name(TagClass cls);
TagClass tag_class_from_name(const std::string& name);

/// Byte-offset span [begin, end) of one tagged segment.
struct TagSpan {
    TagClass cls;
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const TagSpan&) const = default;
};

/// Per-token multi-hot vector over the six classes.
using TokenTags = std::array<std::uint8_t, kNumTagClasses>;

/// Rule-based tagging at maximal phrase level. Spans of different classes may
/// overlap; same-class overlaps are merged. Sorted by (begin, class).
std::vector<TagSpan> weak_tag(const std::string& text);

/// Token i gets bit c set iff its byte range intersects a class-c span.
std::vector<TokenTags> project_tags(std::span<const TagSpan> spans,
                                    std::span<const std::pair<std::size_t, std::size_t>> token_ranges);

}  // namespace docforge
