#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "docforge/geometry.hpp"
#include "docforge/image.hpp"
#include "docforge/ocr.hpp"
#include "docforge/vocab.hpp"

namespace docforge {

/// One multimodal token: text id, 1D position, pixel/normalized boxes and the
/// flattened crop vector (length 3 * P * P).
struct Token {
    std::int32_t text_id = 0;
    std::string surface;
    int pos_1d = 0;
    Box box;
    Box crop_box;
    NormBox norm_box;
    std::vector<float> crop;
    std::size_t byte_begin = 0;  // range within OcrDocument::text(); (0,0) for [CLS]
    std::size_t byte_end = 0;
};

struct TokenSequence {
    std::string doc_id;
    std::string vocab_id;
    double page_width = 0.0;
    double page_height = 0.0;
    std::vector<Token> tokens;
};

struct TokenizeParams {
    double context_ratio = 0.1;  // r
    int patch_size = 16;         // P; crop length 3 * P^2
    std::size_t max_seq_len = 512;
};

/// Full multimodal tokenization: [CLS] with the full-page box first, then
/// WordPiece tokens with union boxes, context crops and 0..1000 layout
/// coordinates, truncated to max_seq_len.
TokenSequence tokenize_document(const OcrDocument& ocr, const Image& image, const Vocab& vocab,
                                const TokenizeParams& params = {});

nlohmann::json sequence_to_json(const TokenSequence& seq);
TokenSequence sequence_from_json(const nlohmann::json& j);

}  // namespace docforge
