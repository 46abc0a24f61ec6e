#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "docforge/bio.hpp"

namespace docforge {

/// Entity-labeled document as the episode sampler sees it.
struct EntityDoc {
    std::string doc_id;
    std::size_t length = 0;  // token count
    std::vector<EntitySpan> spans;
};

struct EntityCorpus {
    std::vector<EntityDoc> docs;

    std::map<std::string, std::size_t> type_occurrences() const;
};

struct EntityPools {
    std::vector<std::string> meta_train;
    std::vector<std::string> meta_test;
};

/// Frequency-filter the type set, then deterministically split into disjoint
/// meta-train / meta-test pools of the requested sizes.
EntityPools split_pools(const EntityCorpus& corpus, std::uint64_t seed, std::size_t train_count = 18,
                        std::size_t test_count = 5, std::size_t min_occurrences = 10);

struct Episode {
    std::size_t way_n = 0;
    std::size_t shot_k = 0;
    std::vector<std::string> chosen_types;
    std::vector<std::string> support;  // doc ids
    std::vector<std::string> query;    // doc ids, disjoint from support
    std::map<std::string, std::size_t> occurrence_counts;  // per chosen type in support
};

struct EpisodeParams {
    std::size_t slack = 2;       // soft occurrence bound K + slack
    std::size_t query_cap = 64;  // max query documents
};

/// Greedy support selection: repeatedly add the document that most reduces the
/// per-type deficit max(0, K - count), preferring picks whose overflow past
/// K + slack is smallest, until every chosen type reaches K occurrences.
Episode sample_episode(const EntityCorpus& corpus, std::span<const std::string> pool, std::size_t way_n,
                       std::size_t shot_k, std::uint64_t seed, const EpisodeParams& params = {});

struct EpisodeLabels {
    BioSequence simple;               // BIO over the N chosen types
    std::vector<std::uint8_t> level1;  // 1 = entity token, 0 = background
    BioSequence level2;               // B/I + type on entity tokens, O elsewhere
};

/// Remap every type outside the episode to background and derive both heads.
EpisodeLabels episode_labels(const Episode& episode, const BioSequence& doc_bio);

/// simple -> (level1, level2) and back; the two views are mutually exact.
EpisodeLabels split_hierarchical(const BioSequence& simple);
BioSequence merge_hierarchical(std::span<const std::uint8_t> level1, const BioSequence& level2);

nlohmann::json episode_to_json(const Episode& ep);
Episode episode_from_json(const nlohmann::json& j);

nlohmann::json entity_doc_to_json(const EntityDoc& doc);
EntityDoc entity_doc_from_json(const nlohmann::json& j);
EntityCorpus read_entity_corpus(const std::string& path);
void write_entity_corpus(const std::string& path, const EntityCorpus& corpus);

}  // namespace docforge
