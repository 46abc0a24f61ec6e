#include "docforge/vocab.hpp"

#include <cctype>
#include <fstream>

#include "docforge/error.hpp"
#include "docforge/ocr.hpp"

namespace docforge {

Vocab Vocab::from_lines(const std::vector<std::string>& lines, std::string vocab_id) {
    Vocab v;
    v.vocab_id_ = std::move(vocab_id);
    v.tokens_.reserve(lines.size());
    for (const auto& line : lines) {
        const std::int32_t id = static_cast<std::int32_t>(v.tokens_.size());
        if (!v.ids_.emplace(line, id).second) {
            throw InvalidVocab("duplicate vocab token '" + line + "'");
        }
        v.tokens_.push_back(line);
    }
    v.unk_id_ = v.id_of("[UNK]");
    v.cls_id_ = v.id_of("[CLS]");
    v.mask_id_ = v.id_of("[MASK]");
    v.pad_id_ = v.id_of("[PAD]");
    if (v.unk_id_ < 0 || v.cls_id_ < 0 || v.mask_id_ < 0 || v.pad_id_ < 0) {
        throw InvalidVocab("vocab must contain [UNK], [CLS], [MASK] and [PAD]");
    }
    return v;
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open vocab file: " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    return from_lines(lines, path);
}

std::int32_t Vocab::id_of(std::string_view token) const {
    const auto it = ids_.find(std::string(token));
    return it == ids_.end() ? -1 : it->second;
}

namespace {

constexpr std::size_t kMaxWordCodepoints = 100;

/// Tokenize one whitespace-free word starting at text byte offset `base`.
void tokenize_word(std::string_view word, std::size_t base, const Vocab& vocab,
                   std::vector<WordPiece>* out) {
    // codepoint boundaries as byte offsets into `word`
    std::vector<std::size_t> bounds;
    bounds.push_back(0);
    {
        std::size_t i = 0;
        while (i < word.size()) {
            const unsigned char c = static_cast<unsigned char>(word[i]);
            std::size_t len = 1;
            if ((c & 0xe0) == 0xc0) len = 2;
            else if ((c & 0xf0) == 0xe0) len = 3;
            else if ((c & 0xf8) == 0xf0) len = 4;
            i = std::min(i + len, word.size());
            bounds.push_back(i);
        }
    }
    const std::size_t n = bounds.size() - 1;  // codepoint count
    if (n == 0) {
        return;
    }
    if (n > kMaxWordCodepoints) {
        out->push_back({vocab.unk_id(), "[UNK]", base, base + word.size()});
        return;
    }

    std::vector<WordPiece> pieces;
    std::size_t start = 0;  // codepoint index
    while (start < n) {
        std::size_t end = n;
        std::int32_t found = -1;
        std::string found_surface;
        while (end > start) {
            std::string candidate(word.substr(bounds[start], bounds[end] - bounds[start]));
            if (start > 0) {
                candidate = "##" + candidate;
            }
            const std::int32_t id = vocab.id_of(candidate);
            if (id >= 0) {
                found = id;
                found_surface = std::move(candidate);
                break;
            }
            --end;
        }
        if (found < 0) {
            out->push_back({vocab.unk_id(), "[UNK]", base, base + word.size()});
            return;
        }
        pieces.push_back({found, std::move(found_surface), base + bounds[start], base + bounds[end]});
        start = end;
    }
    out->insert(out->end(), pieces.begin(), pieces.end());
}

}  // namespace

std::vector<WordPiece> wordpiece_tokenize(std::string_view text, const Vocab& vocab) {
    std::vector<WordPiece> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) {
            ++j;
        }
        if (j > i) {
            tokenize_word(text.substr(i, j - i), i, vocab, &out);
        }
        i = j;
    }
    return out;
}

}  // namespace docforge
