#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "docforge/geometry.hpp"

namespace docforge {

struct OcrChar {
    std::string glyph;  // one UTF-8 codepoint
    Box box;
    double confidence = 1.0;
};

/// Half-open char index range [begin, end) of one word.
struct WordRange {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// OCR output in reading order: characters with boxes plus word boundaries.
struct OcrDocument {
    std::string doc_id;
    double page_width = 0.0;
    double page_height = 0.0;
    std::vector<OcrChar> chars;
    std::vector<WordRange> words;

    std::string word_text(std::size_t word) const;

    /// Canonical document text: words joined by single spaces.
    std::string text() const;

    /// Byte offset of each word within text().
    std::vector<std::size_t> word_byte_offsets() const;

    double mean_confidence() const;
    double alnum_ratio() const;
};

/// Parse {doc_id, page:{width,height}, words:[{text, box, confidence, chars?}]}.
/// Words without per-character boxes get them by uniform horizontal
/// subdivision of the word box.
OcrDocument parse_ocr_json(const nlohmann::json& j);
OcrDocument parse_ocr_json_text(const std::string& text);

/// Fallback for exports that are not already in reading order: cluster words
/// into lines by vertical center (half a median word height tolerance), then
/// order top-to-bottom, left-to-right.
OcrDocument sort_reading_order(const OcrDocument& doc);

nlohmann::json ocr_to_json(const OcrDocument& doc);

/// Split a UTF-8 string into codepoint substrings.
std::vector<std::string> utf8_codepoints(const std::string& s);

}  // namespace docforge
