#include "docforge/tokenizer.hpp"

#include <algorithm>

#include "docforge/encoding.hpp"
#include "docforge/error.hpp"

namespace docforge {

namespace {

using nlohmann::json;

/// Guarantee at least one pixel of extent on each axis so crops stay extractable.
Box ensure_extent(Box b, double page_w, double page_h) {
    if (b.width() <= 0.0) {
        if (b.x1 + 1.0 <= page_w) {
            b.x1 += 1.0;
        } else {
            b.x0 = std::max(0.0, b.x0 - 1.0);
        }
    }
    if (b.height() <= 0.0) {
        if (b.y1 + 1.0 <= page_h) {
            b.y1 += 1.0;
        } else {
            b.y0 = std::max(0.0, b.y0 - 1.0);
        }
    }
    return b;
}

json box_to_json(const Box& b) {
    return json::array({b.x0, b.y0, b.x1, b.y1});
}

Box box_from_json(const json& j) {
    return Box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

TokenSequence tokenize_document(const OcrDocument& ocr, const Image& image, const Vocab& vocab,
                                const TokenizeParams& params) {
    if (ocr.page_width <= 0.0 || ocr.page_height <= 0.0) {
        throw InvalidInput("tokenize_document: page dimensions must be positive");
    }
    TokenSequence seq;
    seq.doc_id = ocr.doc_id;
    seq.vocab_id = vocab.vocab_id();
    seq.page_width = ocr.page_width;
    seq.page_height = ocr.page_height;

    const Box page{0.0, 0.0, ocr.page_width, ocr.page_height};

    auto finish_token = [&](Token&& tok) {
        tok.pos_1d = static_cast<int>(seq.tokens.size());
        tok.crop_box = ensure_extent(crop_box(tok.box, params.context_ratio, ocr.page_width, ocr.page_height),
                                     ocr.page_width, ocr.page_height);
        tok.norm_box = normalize_box(tok.box, ocr.page_width, ocr.page_height);
        tok.crop = extract_crop(image, tok.crop_box, params.patch_size);
        seq.tokens.push_back(std::move(tok));
    };

    {
        Token cls;
        cls.text_id = vocab.cls_id();
        cls.surface = "[CLS]";
        cls.box = page;
        finish_token(std::move(cls));
    }

    const auto word_offsets = ocr.word_byte_offsets();
    for (std::size_t w = 0; w < ocr.words.size() && seq.tokens.size() < params.max_seq_len; ++w) {
        const std::string word = ocr.word_text(w);
        const auto pieces = wordpiece_tokenize(word, vocab);

        // byte offset of each character within the word
        const WordRange range = ocr.words[w];
        std::vector<std::size_t> char_offsets;
        char_offsets.reserve(range.end - range.begin + 1);
        std::size_t at = 0;
        for (std::size_t c = range.begin; c < range.end; ++c) {
            char_offsets.push_back(at);
            at += ocr.chars[c].glyph.size();
        }
        char_offsets.push_back(at);

        for (const auto& piece : pieces) {
            if (seq.tokens.size() >= params.max_seq_len) {
                break;
            }
            std::vector<Box> boxes;
            for (std::size_t c = range.begin; c < range.end; ++c) {
                const std::size_t cb = char_offsets[c - range.begin];
                const std::size_t ce = char_offsets[c - range.begin + 1];
                if (cb < piece.byte_end && piece.byte_begin < ce) {
                    boxes.push_back(ocr.chars[c].box);
                }
            }
            Token tok;
            tok.text_id = piece.text_id;
            tok.surface = piece.surface;
            tok.box = boxes.empty() ? ocr.chars[range.begin].box : token_bbox(boxes);
            tok.byte_begin = word_offsets[w] + piece.byte_begin;
            tok.byte_end = word_offsets[w] + piece.byte_end;
            finish_token(std::move(tok));
        }
    }
    return seq;
}

json sequence_to_json(const TokenSequence& seq) {
    json j;
    j["doc_id"] = seq.doc_id;
    j["vocab_id"] = seq.vocab_id;
    j["page"] = {{"width", seq.page_width}, {"height", seq.page_height}};
    json ids = json::array();
    json surfaces = json::array();
    json ranges = json::array();
    json boxes = json::array();
    json crop_boxes = json::array();
    json norm_boxes = json::array();
    json crops = json::array();
    for (const auto& t : seq.tokens) {
        ids.push_back(t.text_id);
        surfaces.push_back(t.surface);
        ranges.push_back(json::array({t.byte_begin, t.byte_end}));
        boxes.push_back(box_to_json(t.box));
        crop_boxes.push_back(box_to_json(t.crop_box));
        norm_boxes.push_back(json::array({t.norm_box.x0, t.norm_box.y0, t.norm_box.x1, t.norm_box.y1,
                                          t.norm_box.w, t.norm_box.h}));
        crops.push_back(floats_to_base64(t.crop));
    }
    j["input_ids"] = std::move(ids);
    j["surfaces"] = std::move(surfaces);
    j["byte_ranges"] = std::move(ranges);
    j["boxes"] = std::move(boxes);
    j["crop_boxes"] = std::move(crop_boxes);
    j["norm_boxes"] = std::move(norm_boxes);
    j["crops"] = std::move(crops);
    return j;
}

TokenSequence sequence_from_json(const json& j) {
    TokenSequence seq;
    seq.doc_id = j.at("doc_id").get<std::string>();
    seq.vocab_id = j.at("vocab_id").get<std::string>();
    seq.page_width = j.at("page").at("width").get<double>();
    seq.page_height = j.at("page").at("height").get<double>();
    const auto& ids = j.at("input_ids");
    const std::size_t n = ids.size();
    for (const std::string key : {"surfaces", "byte_ranges", "boxes", "crop_boxes", "norm_boxes", "crops"}) {
        if (j.at(key).size() != n) {
            throw ValidationError("token sequence arrays disagree in length: " + key);
        }
    }
    seq.tokens.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Token& t = seq.tokens[i];
        t.text_id = ids[i].get<std::int32_t>();
        t.surface = j["surfaces"][i].get<std::string>();
        t.pos_1d = static_cast<int>(i);
        t.byte_begin = j["byte_ranges"][i][0].get<std::size_t>();
        t.byte_end = j["byte_ranges"][i][1].get<std::size_t>();
        t.box = box_from_json(j["boxes"][i]);
        t.crop_box = box_from_json(j["crop_boxes"][i]);
        const auto& nb = j["norm_boxes"][i];
        t.norm_box = NormBox{nb[0].get<int>(), nb[1].get<int>(), nb[2].get<int>(),
                             nb[3].get<int>(), nb[4].get<int>(), nb[5].get<int>()};
        t.crop = base64_to_floats(j["crops"][i].get<std::string>());
    }
    return seq;
}

}  // namespace docforge
