#include <doctest.h>

#include <numeric>

#include "docforge/error.hpp"
#include "docforge/rng.hpp"
#include "docforge/synthetic.hpp"
#include "docforge/tokenizer.hpp"
#include "docforge/vocab.hpp"

using namespace docforge;

namespace {

Vocab toy_vocab() {
    return Vocab::from_lines({"[PAD]", "[UNK]", "[CLS]", "[MASK]", "un", "##aff", "##able", "aff",
                              "able", "hello", "world"});
}

OcrDocument three_word_doc() {
    OcrDocument doc;
    doc.doc_id = "t3";
    doc.page_width = 200;
    doc.page_height = 100;
    auto add_word = [&](const std::string& text, double x) {
        WordRange range{doc.chars.size(), 0};
        for (std::size_t i = 0; i < text.size(); ++i) {
            doc.chars.push_back({std::string(1, text[i]),
                                 Box{x + 8.0 * i, 20, x + 8.0 * (i + 1), 34}, 0.9});
        }
        range.end = doc.chars.size();
        doc.words.push_back(range);
    };
    add_word("hello", 10);
    add_word("unaffable", 60);
    add_word("world", 140);
    return doc;
}

}  // namespace

TEST_CASE("wordpiece greedy longest match") {
    const Vocab vocab = toy_vocab();
    const auto pieces = wordpiece_tokenize("unaffable", vocab);
    REQUIRE(pieces.size() == 3);
    CHECK(pieces[0].surface == "un");
    CHECK(pieces[1].surface == "##aff");
    CHECK(pieces[2].surface == "##able");
    CHECK(pieces[0].byte_begin == 0);
    CHECK(pieces[0].byte_end == 2);
    CHECK(pieces[1].byte_begin == 2);
    CHECK(pieces[1].byte_end == 5);
    CHECK(pieces[2].byte_begin == 5);
    CHECK(pieces[2].byte_end == 9);
}

TEST_CASE("wordpiece edge cases") {
    const Vocab vocab = toy_vocab();
    CHECK(wordpiece_tokenize("", vocab).empty());
    CHECK(wordpiece_tokenize("   ", vocab).empty());

    const auto unk = wordpiece_tokenize("xyzzy", vocab);
    REQUIRE(unk.size() == 1);
    CHECK(unk[0].surface == "[UNK]");
    CHECK(unk[0].text_id == vocab.unk_id());
    CHECK(unk[0].byte_begin == 0);
    CHECK(unk[0].byte_end == 5);

    // multiple words with offsets into the whole text
    const auto two = wordpiece_tokenize("hello world", vocab);
    REQUIRE(two.size() == 2);
    CHECK(two[1].byte_begin == 6);
    CHECK(two[1].byte_end == 11);

    const auto oversized = wordpiece_tokenize(std::string(150, 'a'), vocab);
    REQUIRE(oversized.size() == 1);
    CHECK(oversized[0].surface == "[UNK]");
}

TEST_CASE("vocab requires the special tokens") {
    CHECK_THROWS_AS(Vocab::from_lines({"[UNK]", "[CLS]", "[MASK]"}), InvalidVocab);
    CHECK_THROWS_AS(Vocab::from_lines({"a", "b"}), InvalidVocab);
    CHECK_THROWS_AS(Vocab::from_lines({"[PAD]", "[PAD]", "[UNK]", "[CLS]", "[MASK]"}), InvalidVocab);
}

TEST_CASE("tokenizer round-trip rebuilds input words") {
    // vocab with full single-char coverage tokenizes anything losslessly
    const Vocab vocab = Vocab::from_lines(synth_vocab_lines(), "synth");
    Rng rng(31);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
    for (int trial = 0; trial < 50; ++trial) {
        std::string word;
        const std::size_t len = 1 + rng.below(12);
        for (std::size_t i = 0; i < len; ++i) {
            word.push_back(alphabet[rng.below(alphabet.size())]);
        }
        const auto pieces = wordpiece_tokenize(word, vocab);
        std::string rebuilt;
        for (const auto& p : pieces) {
            rebuilt += p.surface.substr(p.surface.rfind('#') == std::string::npos
                                            ? 0
                                            : p.surface.rfind('#') + 1);
        }
        CHECK(rebuilt == word);
    }
}

TEST_CASE("tokenize_document shape and [CLS] head") {
    const Vocab vocab = toy_vocab();
    const OcrDocument doc = three_word_doc();
    const Image image = render_document(doc);
    TokenizeParams params;
    params.patch_size = 4;
    const TokenSequence seq = tokenize_document(doc, image, vocab, params);

    // hello -> 1 piece, unaffable -> 3, world -> 1, plus [CLS]
    REQUIRE(seq.tokens.size() == 1 + 5);
    CHECK(seq.tokens[0].surface == "[CLS]");
    CHECK(seq.tokens[0].text_id == vocab.cls_id());
    CHECK(seq.tokens[0].box == Box{0, 0, 200, 100});
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        CHECK(seq.tokens[i].pos_1d == static_cast<int>(i));
        CHECK(seq.tokens[i].crop.size() == 3u * 4 * 4);
    }
    // union box of the whole word covers its pieces
    CHECK(seq.tokens[2].surface == "un");
    CHECK(seq.tokens[2].box.x0 == doctest::Approx(60.0));
    CHECK(seq.tokens[2].box.x1 == doctest::Approx(60.0 + 16.0));
}

TEST_CASE("token crop boxes contain the token boxes") {
    const Vocab vocab = Vocab::from_lines(synth_vocab_lines(), "synth");
    for (std::uint64_t id = 0; id < 10; ++id) {
        const OcrDocument doc = synth_ocr_document(id, 3);
        const Image image = render_document(doc);
        const TokenSequence seq = tokenize_document(doc, image, vocab, {});
        for (const auto& tok : seq.tokens) {
            CHECK(tok.crop_box.contains(tok.box));
            CHECK(tok.norm_box.x1 >= tok.norm_box.x0);
            CHECK(tok.norm_box.y1 >= tok.norm_box.y0);
            CHECK(tok.norm_box.x1 <= 1000);
            CHECK(tok.norm_box.w == tok.norm_box.x1 - tok.norm_box.x0);
        }
    }
}

TEST_CASE("truncation caps the sequence length exactly") {
    const Vocab vocab = Vocab::from_lines(synth_vocab_lines(), "synth");
    OcrDocument doc;
    doc.doc_id = "long";
    doc.page_width = 5000;
    doc.page_height = 100;
    for (int w = 0; w < 600; ++w) {
        WordRange range{doc.chars.size(), 0};
        doc.chars.push_back({"a", Box{double(w * 8), 10, double(w * 8 + 7), 20}, 0.9});
        range.end = doc.chars.size();
        doc.words.push_back(range);
    }
    const Image image = render_document(doc);
    TokenizeParams params;
    params.max_seq_len = 512;
    params.patch_size = 2;
    const TokenSequence seq = tokenize_document(doc, image, vocab, params);
    CHECK(seq.tokens.size() == 512);
}

TEST_CASE("empty OCR gives only [CLS]") {
    const Vocab vocab = toy_vocab();
    OcrDocument doc;
    doc.doc_id = "empty";
    doc.page_width = 100;
    doc.page_height = 100;
    const Image image = render_document(doc);
    TokenizeParams params;
    params.patch_size = 2;
    const TokenSequence seq = tokenize_document(doc, image, vocab, params);
    REQUIRE(seq.tokens.size() == 1);
    CHECK(seq.tokens[0].surface == "[CLS]");
}

TEST_CASE("sequence json round-trip") {
    const Vocab vocab = Vocab::from_lines(synth_vocab_lines(), "synth");
    const OcrDocument doc = synth_ocr_document(4, 9);
    const Image image = render_document(doc);
    TokenizeParams params;
    params.patch_size = 4;
    const TokenSequence seq = tokenize_document(doc, image, vocab, params);
    const TokenSequence back = sequence_from_json(sequence_to_json(seq));

    REQUIRE(back.tokens.size() == seq.tokens.size());
    CHECK(back.doc_id == seq.doc_id);
    CHECK(back.page_width == seq.page_width);
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        CHECK(back.tokens[i].text_id == seq.tokens[i].text_id);
        CHECK(back.tokens[i].surface == seq.tokens[i].surface);
        CHECK(back.tokens[i].box == seq.tokens[i].box);
        CHECK(back.tokens[i].crop_box == seq.tokens[i].crop_box);
        CHECK(back.tokens[i].norm_box == seq.tokens[i].norm_box);
        CHECK(back.tokens[i].crop == seq.tokens[i].crop);
        CHECK(back.tokens[i].byte_begin == seq.tokens[i].byte_begin);
        CHECK(back.tokens[i].byte_end == seq.tokens[i].byte_end);
    }
}

TEST_CASE("ocr parsing subdivides word boxes when chars are missing") {
    const char* ocr_json = R"({
      "doc_id": "w1",
      "page": {"width": 100, "height": 50},
      "words": [
        {"text": "abcd", "box": [10, 10, 50, 20], "confidence": 0.8},
        {"text": "x", "box": [60, 10, 66, 20], "confidence": 0.9,
         "chars": [{"c": "x", "box": [60, 10, 66, 20]}]}
      ]
    })";
    const OcrDocument doc = parse_ocr_json_text(ocr_json);
    REQUIRE(doc.words.size() == 2);
    REQUIRE(doc.chars.size() == 5);
    CHECK(doc.chars[0].box == Box{10, 10, 20, 20});
    CHECK(doc.chars[3].box == Box{40, 10, 50, 20});
    CHECK(doc.chars[0].confidence == doctest::Approx(0.8));
    CHECK(doc.text() == "abcd x");
    CHECK(doc.word_byte_offsets() == std::vector<std::size_t>{0, 5});

    CHECK_THROWS_AS(parse_ocr_json_text(R"({"doc_id":"b","page":{"width":10,"height":10},
        "words":[{"text":"a","box":[5,5,20,8]}]})"),
                    ValidationError);  // box outside page
}

TEST_CASE("reading order fallback clusters lines top-down, left-right") {
    OcrDocument doc;
    doc.doc_id = "scrambled";
    doc.page_width = 300;
    doc.page_height = 100;
    auto add_word = [&](const std::string& text, double x, double y) {
        WordRange range{doc.chars.size(), 0};
        for (std::size_t i = 0; i < text.size(); ++i) {
            doc.chars.push_back({std::string(1, text[i]),
                                 Box{x + 8.0 * i, y, x + 8.0 * (i + 1), y + 12}, 1.0});
        }
        range.end = doc.chars.size();
        doc.words.push_back(range);
    };
    // emitted out of order: second line first, first line scrambled
    add_word("third", 10, 40);
    add_word("second", 120, 10);
    add_word("first", 10, 11);
    add_word("fourth", 120, 41);

    const OcrDocument sorted = sort_reading_order(doc);
    REQUIRE(sorted.words.size() == 4);
    CHECK(sorted.word_text(0) == "first");
    CHECK(sorted.word_text(1) == "second");
    CHECK(sorted.word_text(2) == "third");
    CHECK(sorted.word_text(3) == "fourth");
    CHECK(sorted.text() == "first second third fourth");
    CHECK(sorted.chars.size() == doc.chars.size());
}
