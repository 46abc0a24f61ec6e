#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docforge/corpus.hpp"
#include "docforge/embedding.hpp"
#include "docforge/fewshot.hpp"
#include "docforge/image.hpp"
#include "docforge/ocr.hpp"

namespace docforge {

/// Random unit-vector store with ids 0..n-1. A dup_fraction of rows are exact
/// copies of earlier rows (same bytes, new id) so dedup has real work.
VectorStore synth_store(std::size_t n, int dimension, std::uint64_t seed, double dup_fraction = 0.02);

/// Deterministic OCR document for (image_id, seed): plausible form-like word
/// salad with emails, prices, dates, phones, names and addresses mixed in.
/// A small fraction of documents is deliberately poor (low confidence, too
/// few words, or punctuation soup) to exercise the quality filter.
OcrDocument synth_ocr_document(std::uint64_t image_id, std::uint64_t seed);

std::string synth_doc_id(std::uint64_t image_id);

/// White page with char boxes drawn dark; the deterministic pixel source for
/// crop extraction when no real raster exists.
Image render_document(const OcrDocument& ocr);

/// WordPiece vocab covering the synthetic lexicon: specials, full words,
/// single characters and ## continuations.
std::vector<std::string> synth_vocab_lines();

/// OCR provider backed by the synthetic generator.
class SyntheticOcrProvider : public OcrProvider {
public:
    explicit SyntheticOcrProvider(std::uint64_t seed) : seed_(seed) {}
    std::optional<OcrDocument> ocr_for(std::uint64_t image_id) const override {
        return synth_ocr_document(image_id, seed_);
    }

private:
    std::uint64_t seed_;
};

/// OCR provider over a JSONL file of OCR documents keyed by doc id.
class JsonlOcrProvider : public OcrProvider {
public:
    explicit JsonlOcrProvider(const std::string& path);
    std::optional<OcrDocument> ocr_for(std::uint64_t image_id) const override;
    const std::vector<OcrDocument>& documents() const { return docs_; }

private:
    std::vector<OcrDocument> docs_;
    std::unordered_map<std::string, std::size_t> by_doc_id_;
};

/// Entity-labeled corpus for few-shot demos: docs with non-overlapping typed
/// spans over `num_types` entity types.
EntityCorpus synth_entity_corpus(std::size_t num_docs, std::size_t num_types, std::uint64_t seed);

}  // namespace docforge
