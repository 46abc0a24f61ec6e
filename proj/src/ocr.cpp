#include "docforge/ocr.hpp"

#include <algorithm>
#include <cctype>

#include "docforge/error.hpp"

namespace docforge {

namespace {
using nlohmann::json;

Box box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) {
        throw ValidationError("box must be a [x0, y0, x1, y1] array");
    }
    Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (b.x1 < b.x0 || b.y1 < b.y0) {
        throw ValidationError("box with negative extent");
    }
    return b;
}

json box_to_json(const Box& b) {
    return json::array({b.x0, b.y0, b.x1, b.y1});
}
}  // namespace

std::vector<std::string> utf8_codepoints(const std::string& s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len = 1;
        if ((c & 0x80) == 0x00) {
            len = 1;
        } else if ((c & 0xe0) == 0xc0) {
            len = 2;
        } else if ((c & 0xf0) == 0xe0) {
            len = 3;
        } else if ((c & 0xf8) == 0xf0) {
            len = 4;
        }
        len = std::min(len, s.size() - i);
        out.push_back(s.substr(i, len));
        i += len;
    }
    return out;
}

std::string OcrDocument::word_text(std::size_t word) const {
    std::string out;
    for (std::size_t i = words[word].begin; i < words[word].end; ++i) {
        out += chars[i].glyph;
    }
    return out;
}

std::string OcrDocument::text() const {
    std::string out;
    for (std::size_t w = 0; w < words.size(); ++w) {
        if (w > 0) {
            out.push_back(' ');
        }
        out += word_text(w);
    }
    return out;
}

std::vector<std::size_t> OcrDocument::word_byte_offsets() const {
    std::vector<std::size_t> out;
    out.reserve(words.size());
    std::size_t at = 0;
    for (std::size_t w = 0; w < words.size(); ++w) {
        if (w > 0) {
            ++at;  // the joining space
        }
        out.push_back(at);
        at += word_text(w).size();
    }
    return out;
}

double OcrDocument::mean_confidence() const {
    if (chars.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& c : chars) {
        sum += c.confidence;
    }
    return sum / static_cast<double>(chars.size());
}

double OcrDocument::alnum_ratio() const {
    if (chars.empty()) {
        return 0.0;
    }
    std::size_t alnum = 0;
    for (const auto& c : chars) {
        if (c.glyph.size() == 1 && std::isalnum(static_cast<unsigned char>(c.glyph[0]))) {
            ++alnum;
        } else if (c.glyph.size() > 1) {
            ++alnum;  // treat non-ASCII glyphs as word characters
        }
    }
    return static_cast<double>(alnum) / static_cast<double>(chars.size());
}

OcrDocument parse_ocr_json(const json& j) {
    if (!j.is_object()) {
        throw ValidationError("OCR document must be a JSON object");
    }
    OcrDocument doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.page_width = j.at("page").at("width").get<double>();
    doc.page_height = j.at("page").at("height").get<double>();
    if (doc.page_width <= 0.0 || doc.page_height <= 0.0) {
        throw ValidationError("OCR page dimensions must be positive: " + doc.doc_id);
    }
    const Box page{0.0, 0.0, doc.page_width, doc.page_height};
    for (const auto& jw : j.at("words")) {
        const std::string text = jw.at("text").get<std::string>();
        if (text.empty()) {
            continue;
        }
        const Box word_box = box_from_json(jw.at("box"));
        if (!page.contains(word_box)) {
            throw ValidationError("word box outside page bounds in " + doc.doc_id);
        }
        const double confidence = jw.contains("confidence") ? jw["confidence"].get<double>() : 1.0;
        WordRange range{doc.chars.size(), doc.chars.size()};
        if (jw.contains("chars") && jw["chars"].is_array() && !jw["chars"].empty()) {
            for (const auto& jc : jw["chars"]) {
                OcrChar ch;
                ch.glyph = jc.at("c").get<std::string>();
                ch.box = box_from_json(jc.at("box"));
                if (!page.contains(ch.box)) {
                    throw ValidationError("char box outside page bounds in " + doc.doc_id);
                }
                ch.confidence = confidence;
                doc.chars.push_back(std::move(ch));
            }
        } else {
            // word-level export: uniform horizontal subdivision
            const auto glyphs = utf8_codepoints(text);
            const double step = word_box.width() / static_cast<double>(glyphs.size());
            for (std::size_t g = 0; g < glyphs.size(); ++g) {
                OcrChar ch;
                ch.glyph = glyphs[g];
                ch.box = Box{word_box.x0 + step * static_cast<double>(g), word_box.y0,
                             word_box.x0 + step * static_cast<double>(g + 1), word_box.y1};
                ch.confidence = confidence;
                doc.chars.push_back(std::move(ch));
            }
        }
        range.end = doc.chars.size();
        if (range.end > range.begin) {
            doc.words.push_back(range);
        }
    }
    return doc;
}

OcrDocument parse_ocr_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("OCR document is not valid JSON: ") + e.what());
    }
    return parse_ocr_json(j);
}

OcrDocument sort_reading_order(const OcrDocument& doc) {
    struct WordView {
        std::size_t index;
        Box box;
    };
    std::vector<WordView> views;
    std::vector<double> heights;
    for (std::size_t w = 0; w < doc.words.size(); ++w) {
        std::vector<Box> boxes;
        for (std::size_t i = doc.words[w].begin; i < doc.words[w].end; ++i) {
            boxes.push_back(doc.chars[i].box);
        }
        views.push_back({w, token_bbox(boxes)});
        heights.push_back(views.back().box.height());
    }
    if (views.empty()) {
        return doc;
    }
    std::sort(heights.begin(), heights.end());
    const double tolerance = std::max(1.0, heights[heights.size() / 2] / 2.0);

    std::stable_sort(views.begin(), views.end(), [](const WordView& a, const WordView& b) {
        return (a.box.y0 + a.box.y1) < (b.box.y0 + b.box.y1);
    });
    // greedy line clustering over the y-sorted words
    std::vector<std::vector<WordView>> lines;
    double line_center = 0.0;
    for (const auto& view : views) {
        const double center = (view.box.y0 + view.box.y1) / 2.0;
        if (lines.empty() || center - line_center > tolerance) {
            lines.emplace_back();
            line_center = center;
        }
        lines.back().push_back(view);
    }
    OcrDocument out;
    out.doc_id = doc.doc_id;
    out.page_width = doc.page_width;
    out.page_height = doc.page_height;
    for (auto& line : lines) {
        std::sort(line.begin(), line.end(),
                  [](const WordView& a, const WordView& b) { return a.box.x0 < b.box.x0; });
        for (const auto& view : line) {
            const WordRange range = doc.words[view.index];
            WordRange rebuilt{out.chars.size(), 0};
            for (std::size_t i = range.begin; i < range.end; ++i) {
                out.chars.push_back(doc.chars[i]);
            }
            rebuilt.end = out.chars.size();
            out.words.push_back(rebuilt);
        }
    }
    return out;
}

nlohmann::json ocr_to_json(const OcrDocument& doc) {
    json j;
    j["doc_id"] = doc.doc_id;
    j["page"] = {{"width", doc.page_width}, {"height", doc.page_height}};
    j["words"] = json::array();
    for (std::size_t w = 0; w < doc.words.size(); ++w) {
        json jw;
        jw["text"] = doc.word_text(w);
        std::vector<Box> boxes;
        for (std::size_t i = doc.words[w].begin; i < doc.words[w].end; ++i) {
            boxes.push_back(doc.chars[i].box);
        }
        jw["box"] = box_to_json(token_bbox(boxes));
        jw["confidence"] = doc.chars[doc.words[w].begin].confidence;
        jw["chars"] = json::array();
        for (std::size_t i = doc.words[w].begin; i < doc.words[w].end; ++i) {
            jw["chars"].push_back({{"c", doc.chars[i].glyph}, {"box", box_to_json(doc.chars[i].box)}});
        }
        j["words"].push_back(std::move(jw));
    }
    return j;
}

}  // namespace docforge
