#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace docforge {

/// WordPiece vocabulary: one token per line, id = line number.
/// [UNK], [CLS], [MASK] and [PAD] must all be present.
class Vocab {
public:
    static Vocab from_lines(const std::vector<std::string>& lines, std::string vocab_id = "inline");
    static Vocab load(const std::string& path);

    std::int32_t id_of(std::string_view token) const;  // -1 when absent
    const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return tokens_.size(); }
    const std::string& vocab_id() const { return vocab_id_; }

    std::int32_t unk_id() const { return unk_id_; }
    std::int32_t cls_id() const { return cls_id_; }
    std::int32_t mask_id() const { return mask_id_; }
    std::int32_t pad_id() const { return pad_id_; }
    std::vector<std::int32_t> special_ids() const { return {unk_id_, cls_id_, mask_id_, pad_id_}; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::int32_t> ids_;
    std::string vocab_id_;
    std::int32_t unk_id_ = -1;
    std::int32_t cls_id_ = -1;
    std::int32_t mask_id_ = -1;
    std::int32_t pad_id_ = -1;
};

struct WordPiece {
    std::int32_t text_id = 0;
    std::string surface;          // continuation pieces keep their "##" prefix
    std::size_t byte_begin = 0;   // byte range within the tokenized text
    std::size_t byte_end = 0;
};

/// Greedy longest-match-first WordPiece over whitespace-split words.
/// A word with no full segmentation becomes a single [UNK] piece covering
/// the whole word. Words longer than 100 codepoints also map to [UNK].
std::vector<WordPiece> wordpiece_tokenize(std::string_view text, const Vocab& vocab);

}  // namespace docforge
