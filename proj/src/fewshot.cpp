#include "docforge/fewshot.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include "docforge/error.hpp"
#include "docforge/rng.hpp"

namespace docforge {

namespace {
using nlohmann::json;
}

std::map<std::string, std::size_t> EntityCorpus::type_occurrences() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& doc : docs) {
        for (const auto& span : doc.spans) {
            ++counts[span.type];
        }
    }
    return counts;
}

EntityPools split_pools(const EntityCorpus& corpus, std::uint64_t seed, std::size_t train_count,
                        std::size_t test_count, std::size_t min_occurrences) {
    if (train_count == 0 || test_count == 0) {
        throw InvalidInput("split_pools: pool sizes must be >= 1");
    }
    std::vector<std::string> eligible;
    for (const auto& [type, count] : corpus.type_occurrences()) {
        if (count >= min_occurrences) {
            eligible.push_back(type);
        }
    }
    if (eligible.size() < train_count + test_count) {
        throw InvalidInput("split_pools: only " + std::to_string(eligible.size()) +
                           " types pass the frequency filter, need " +
                           std::to_string(train_count + test_count));
    }
    Rng rng(seed);
    rng.shuffle(eligible);
    EntityPools pools;
    pools.meta_train.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(train_count));
    pools.meta_test.assign(eligible.begin() + static_cast<std::ptrdiff_t>(train_count),
                           eligible.begin() + static_cast<std::ptrdiff_t>(train_count + test_count));
    std::sort(pools.meta_train.begin(), pools.meta_train.end());
    std::sort(pools.meta_test.begin(), pools.meta_test.end());
    return pools;
}

Episode sample_episode(const EntityCorpus& corpus, std::span<const std::string> pool, std::size_t way_n,
                       std::size_t shot_k, std::uint64_t seed, const EpisodeParams& params) {
    if (way_n == 0 || shot_k == 0) {
        throw InvalidInput("sample_episode: N and K must be >= 1");
    }
    if (way_n > pool.size()) {
        throw SamplingError("sample_episode: N=" + std::to_string(way_n) + " exceeds pool size " +
                            std::to_string(pool.size()));
    }

    Episode ep;
    ep.way_n = way_n;
    ep.shot_k = shot_k;
    {
        std::vector<std::string> shuffled(pool.begin(), pool.end());
        std::sort(shuffled.begin(), shuffled.end());  // canonical base order
        Rng rng(seed);
        rng.shuffle(shuffled);
        ep.chosen_types.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(way_n));
        std::sort(ep.chosen_types.begin(), ep.chosen_types.end());
    }
    const std::set<std::string> chosen(ep.chosen_types.begin(), ep.chosen_types.end());

    // per-document occurrence counts of the chosen types
    struct DocInfo {
        std::size_t doc_index;
        std::map<std::string, std::size_t> occurrences;
    };
    std::vector<DocInfo> candidates;
    for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
        DocInfo info{i, {}};
        for (const auto& span : corpus.docs[i].spans) {
            if (chosen.count(span.type) > 0) {
                ++info.occurrences[span.type];
            }
        }
        if (!info.occurrences.empty()) {
            candidates.push_back(std::move(info));
        }
    }
    for (const auto& type : ep.chosen_types) {
        const bool present = std::any_of(candidates.begin(), candidates.end(), [&](const DocInfo& d) {
            return d.occurrences.count(type) > 0;
        });
        if (!present) {
            throw SamplingError("sample_episode: type '" + type + "' never occurs in the corpus");
        }
    }

    std::map<std::string, std::size_t> counts;
    for (const auto& type : ep.chosen_types) {
        counts[type] = 0;
    }
    std::vector<bool> used(candidates.size(), false);
    auto deficit_total = [&]() {
        std::size_t total = 0;
        for (const auto& [type, count] : counts) {
            total += count < shot_k ? shot_k - count : 0;
        }
        return total;
    };

    while (deficit_total() > 0) {
        std::size_t best = candidates.size();
        std::size_t best_reduction = 0;
        std::size_t best_overflow = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (used[i]) {
                continue;
            }
            std::size_t reduction = 0;
            std::size_t overflow = 0;
            for (const auto& [type, occ] : candidates[i].occurrences) {
                const std::size_t have = counts[type];
                reduction += std::min(occ, have < shot_k ? shot_k - have : 0);
                const std::size_t after = have + occ;
                if (after > shot_k + params.slack) {
                    overflow += after - (shot_k + params.slack);
                }
            }
            if (reduction == 0) {
                continue;
            }
            const bool better = best == candidates.size() || reduction > best_reduction ||
                                (reduction == best_reduction && overflow < best_overflow) ||
                                (reduction == best_reduction && overflow == best_overflow &&
                                 corpus.docs[candidates[i].doc_index].doc_id <
                                     corpus.docs[candidates[best].doc_index].doc_id);
            if (better) {
                best = i;
                best_reduction = reduction;
                best_overflow = overflow;
            }
        }
        if (best == candidates.size()) {
            throw SamplingError("sample_episode: cannot satisfy K=" + std::to_string(shot_k) +
                                " for every chosen type");
        }
        used[best] = true;
        ep.support.push_back(corpus.docs[candidates[best].doc_index].doc_id);
        for (const auto& [type, occ] : candidates[best].occurrences) {
            counts[type] += occ;
        }
    }

    std::sort(ep.support.begin(), ep.support.end());
    ep.occurrence_counts = counts;

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!used[i]) {
            ep.query.push_back(corpus.docs[candidates[i].doc_index].doc_id);
        }
    }
    std::sort(ep.query.begin(), ep.query.end());
    if (ep.query.size() > params.query_cap) {
        ep.query.resize(params.query_cap);
    }
    return ep;
}

EpisodeLabels episode_labels(const Episode& episode, const BioSequence& doc_bio) {
    const std::set<std::string> chosen(episode.chosen_types.begin(), episode.chosen_types.end());
    BioSequence simple;
    simple.reserve(doc_bio.size());
    for (const auto& tag : doc_bio) {
        if (tag.kind != BioTag::O && chosen.count(tag.type) > 0) {
            simple.push_back(tag);
        } else {
            simple.push_back(BioTag{});
        }
    }
    // remapping can leave an I run without its B; re-encode through the
    // lenient decoder so the simple view stays well-formed
    simple = bio_encode(bio_decode(simple), simple.size());

    EpisodeLabels out = split_hierarchical(simple);
    return out;
}

EpisodeLabels split_hierarchical(const BioSequence& simple) {
    EpisodeLabels out;
    out.simple = simple;
    out.level1.reserve(simple.size());
    out.level2.reserve(simple.size());
    for (const auto& tag : simple) {
        out.level1.push_back(tag.kind == BioTag::O ? 0 : 1);
        out.level2.push_back(tag);  // O stays O; entity tokens keep B/I + type
    }
    return out;
}

BioSequence merge_hierarchical(std::span<const std::uint8_t> level1, const BioSequence& level2) {
    if (level1.size() != level2.size()) {
        throw InvalidInput("merge_hierarchical: level sizes differ");
    }
    BioSequence out;
    out.reserve(level1.size());
    for (std::size_t i = 0; i < level1.size(); ++i) {
        if (level1[i] == 0) {
            out.push_back(BioTag{});
        } else {
            if (level2[i].kind == BioTag::O) {
                throw InvalidInput("merge_hierarchical: entity token without a level-2 label");
            }
            out.push_back(level2[i]);
        }
    }
    return out;
}

json episode_to_json(const Episode& ep) {
    json j;
    j["N"] = ep.way_n;
    j["K"] = ep.shot_k;
    j["chosen_types"] = ep.chosen_types;
    j["support"] = ep.support;
    j["query"] = ep.query;
    j["counts"] = ep.occurrence_counts;
    return j;
}

Episode episode_from_json(const json& j) {
    Episode ep;
    ep.way_n = j.at("N").get<std::size_t>();
    ep.shot_k = j.at("K").get<std::size_t>();
    ep.chosen_types = j.at("chosen_types").get<std::vector<std::string>>();
    ep.support = j.at("support").get<std::vector<std::string>>();
    ep.query = j.at("query").get<std::vector<std::string>>();
    ep.occurrence_counts = j.at("counts").get<std::map<std::string, std::size_t>>();
    return ep;
}

json entity_doc_to_json(const EntityDoc& doc) {
    json spans = json::array();
    for (const auto& s : doc.spans) {
        spans.push_back({{"type", s.type}, {"start", s.start}, {"end", s.end}});
    }
    return json{{"doc_id", doc.doc_id}, {"length", doc.length}, {"spans", std::move(spans)}};
}

EntityDoc entity_doc_from_json(const json& j) {
    EntityDoc doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.length = j.at("length").get<std::size_t>();
    for (const auto& s : j.at("spans")) {
        doc.spans.push_back(
            {s.at("type").get<std::string>(), s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()});
    }
    return doc;
}

EntityCorpus read_entity_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open entity corpus: " + path);
    }
    EntityCorpus corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            corpus.docs.push_back(entity_doc_from_json(json::parse(line)));
        }
    }
    return corpus;
}

void write_entity_corpus(const std::string& path, const EntityCorpus& corpus) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open entity corpus for writing: " + path);
    }
    for (const auto& doc : corpus.docs) {
        out << entity_doc_to_json(doc).dump() << "\n";
    }
}

}  // namespace docforge
