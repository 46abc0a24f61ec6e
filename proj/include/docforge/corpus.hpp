#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "docforge/embedding.hpp"
#include "docforge/index.hpp"
#include "docforge/ocr.hpp"
#include "docforge/ontology.hpp"
#include "docforge/sha256.hpp"

namespace docforge {

/// One retrieval hit for one keyword.
struct Candidate {
    std::uint64_t image_id = 0;
    Digest256 content_hash{};
    double distance = 0.0;
    std::string keyword;
};

struct Provenance {
    std::string keyword;
    double distance = 0.0;

    bool operator==(const Provenance&) const = default;
};

struct CorpusRecord {
    std::uint64_t image_id = 0;
    Digest256 content_hash{};
    std::vector<Provenance> provenance;  // sorted by keyword, one entry per keyword
    bool kept = true;
    std::string reject_reason;  // empty iff kept

    bool operator==(const CorpusRecord&) const = default;
};

struct FilterReport {
    std::size_t total = 0;
    std::size_t kept = 0;
    std::map<std::string, std::size_t> rejected_by_reason;
};

struct FilterThresholds {
    double min_confidence = 0.6;
    std::size_t min_tokens = 20;
    double alnum_ratio_min = 0.4;
};

/// Source of OCR results keyed by image id; absent result means no OCR.
class OcrProvider {
public:
    virtual ~OcrProvider() = default;
    virtual std::optional<OcrDocument> ocr_for(std::uint64_t image_id) const = 0;
};

/// Top-k retrieval for one ontology keyword; candidates carry the keyword,
/// ranked distances and the content hash of each hit.
std::vector<Candidate> retrieve_for_keyword(const std::string& keyword, const TextEmbedder& embedder,
                                            const VectorStore& store, const PartitionedIndex& index,
                                            std::size_t k, std::size_t probes);

/// Merge exact duplicates (equal content hash) and near-duplicates (embedding
/// dot >= threshold, connected components) into the smallest-id survivor,
/// keeping the per-keyword best distance. Output sorted by image id; the
/// result is independent of candidate order.
std::vector<CorpusRecord> deduplicate(std::span<const Candidate> candidates, const VectorStore& store,
                                      double near_dup_threshold);

struct FilterDecision {
    bool kept = true;
    std::string reason;
};

/// Reasons: no_ocr, low_confidence, too_few_tokens, low_alnum_ratio (checked
/// in that order).
FilterDecision quality_filter(const CorpusRecord& record, const OcrDocument* ocr,
                              const FilterThresholds& thresholds);

struct PipelineConfig {
    std::size_t k = 10000;
    std::size_t probes = 16;
    std::size_t num_cells = 64;
    double near_dup_threshold = 0.98;
    FilterThresholds thresholds;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

struct PipelineResult {
    std::vector<CorpusRecord> manifest;      // kept and rejected, sorted by image id
    std::vector<DistanceStats> stats;        // one row per keyword, retrieval distances
    FilterReport report;
};

/// Fig.-2-shaped run: per-keyword retrieval, cross-keyword dedup, OCR quality
/// filter. Deterministic for a fixed config; independent of the jobs count.
PipelineResult run_pipeline(const OntologyTree& ontology, const VectorStore& store,
                            const OcrProvider& ocr, const PipelineConfig& config);

nlohmann::json record_to_json(const CorpusRecord& record);
CorpusRecord record_from_json(const nlohmann::json& j);

void write_manifest(const std::string& path, std::span<const CorpusRecord> manifest);
std::vector<CorpusRecord> read_manifest(const std::string& path);

void write_stats_csv(const std::string& path, std::span<const DistanceStats> stats);

}  // namespace docforge
