#include "docforge/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "docforge/error.hpp"

namespace docforge {

namespace {

using nlohmann::json;

/// Union-find keyed by dense indices, smallest root wins on merge.
class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return;
        }
        if (a > b) {
            std::swap(a, b);
        }
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

void merge_provenance(std::map<std::string, double>* into, const std::string& keyword, double distance) {
    const auto it = into->find(keyword);
    if (it == into->end()) {
        into->emplace(keyword, distance);
    } else if (distance > it->second) {
        it->second = distance;  // keep the best (largest dot) per keyword
    }
}

}  // namespace

std::vector<Candidate> retrieve_for_keyword(const std::string& keyword, const TextEmbedder& embedder,
                                            const VectorStore& store, const PartitionedIndex& index,
                                            std::size_t k, std::size_t probes) {
    const UnitVector query = embedder.embed(keyword);
    // `probes` is a floor: deep top-k requests widen the probe set until the
    // scanned cells can supply min(k, n) candidates
    const std::size_t effective =
        probes_for_coverage(query, index, std::min(k, store.size()), probes);
    const auto hits = approx_top_k(query, index, store, k, effective);
    std::vector<Candidate> out;
    out.reserve(hits.size());
    for (const auto& hit : hits) {
        Candidate c;
        c.image_id = hit.id;
        c.content_hash = store.content_hash(store.index_of(hit.id));
        c.distance = hit.distance;
        c.keyword = keyword;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<CorpusRecord> deduplicate(std::span<const Candidate> candidates, const VectorStore& store,
                                      double near_dup_threshold) {
    if (!(near_dup_threshold > 0.0 && near_dup_threshold <= 1.0)) {
        throw InvalidInput("deduplicate: threshold must be in (0, 1]");
    }

    // aggregate by image id, then collapse ids sharing a content hash
    struct Item {
        std::uint64_t id;
        Digest256 hash;
        std::map<std::string, double> provenance;
    };
    std::map<std::uint64_t, Item> by_id;
    for (const auto& c : candidates) {
        auto [it, fresh] = by_id.try_emplace(c.image_id, Item{c.image_id, c.content_hash, {}});
        if (!fresh && it->second.hash != c.content_hash) {
            throw InvalidInput("deduplicate: image id " + std::to_string(c.image_id) +
                               " seen with two different content hashes");
        }
        merge_provenance(&it->second.provenance, c.keyword, c.distance);
    }

    std::map<Digest256, Item> by_hash;
    for (auto& [id, item] : by_id) {
        auto [it, fresh] = by_hash.try_emplace(item.hash, Item{item.id, item.hash, {}});
        it->second.id = std::min(it->second.id, item.id);
        for (const auto& [kw, dist] : item.provenance) {
            merge_provenance(&it->second.provenance, kw, dist);
        }
    }

    // near-duplicate components over the unique representatives
    std::vector<Item> items;
    items.reserve(by_hash.size());
    for (auto& [hash, item] : by_hash) {
        items.push_back(std::move(item));
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.id < b.id; });

    const std::size_t m = items.size();
    DisjointSets sets(m);
    if (m > 1 && near_dup_threshold < 1.0) {
        Eigen::MatrixXf vectors(m, store.dimension());
        for (std::size_t i = 0; i < m; ++i) {
            vectors.row(static_cast<Eigen::Index>(i)) =
                store.vectors().row(static_cast<Eigen::Index>(store.index_of(items[i].id))).cast<float>();
        }
        const float threshold = static_cast<float>(near_dup_threshold);
        const Eigen::Index block = 2048;
        Eigen::MatrixXf sims;
        for (Eigen::Index row0 = 0; row0 < vectors.rows(); row0 += block) {
            const Eigen::Index rows = std::min(block, vectors.rows() - row0);
            sims.noalias() = vectors.middleRows(row0, rows) * vectors.transpose();
            for (Eigen::Index r = 0; r < rows; ++r) {
                const Eigen::Index i = row0 + r;
                for (Eigen::Index j = i + 1; j < vectors.rows(); ++j) {
                    if (sims(r, j) >= threshold) {
                        sets.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                    }
                }
            }
        }
    }
    // threshold 1.0 merges byte-identical embeddings only, which the hash pass covers

    std::map<std::size_t, CorpusRecord> merged;
    std::map<std::size_t, std::map<std::string, double>> merged_prov;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t root = sets.find(i);
        auto [it, fresh] = merged.try_emplace(root);
        CorpusRecord& rec = it->second;
        if (fresh || items[i].id < rec.image_id) {
            rec.image_id = items[i].id;
            rec.content_hash = items[i].hash;
        }
        for (const auto& [kw, dist] : items[i].provenance) {
            merge_provenance(&merged_prov[root], kw, dist);
        }
    }

    std::vector<CorpusRecord> out;
    out.reserve(merged.size());
    for (auto& [root, rec] : merged) {
        for (const auto& [kw, dist] : merged_prov[root]) {
            rec.provenance.push_back({kw, dist});
        }
        out.push_back(std::move(rec));
    }
    std::sort(out.begin(), out.end(),
              [](const CorpusRecord& a, const CorpusRecord& b) { return a.image_id < b.image_id; });
    return out;
}

FilterDecision quality_filter(const CorpusRecord& record, const OcrDocument* ocr,
                              const FilterThresholds& thresholds) {
    (void)record;
    if (ocr == nullptr) {
        return {false, "no_ocr"};
    }
    if (ocr->mean_confidence() < thresholds.min_confidence) {
        return {false, "low_confidence"};
    }
    if (ocr->words.size() < thresholds.min_tokens) {
        return {false, "too_few_tokens"};
    }
    if (ocr->alnum_ratio() < thresholds.alnum_ratio_min) {
        return {false, "low_alnum_ratio"};
    }
    return {true, ""};
}

PipelineResult run_pipeline(const OntologyTree& ontology, const VectorStore& store,
                            const OcrProvider& ocr, const PipelineConfig& config) {
    if (store.size() == 0) {
        throw EmptyStore("run_pipeline: store is empty");
    }
    const auto keywords = leaf_keywords(ontology);
    const PartitionedIndex index =
        build_partitioned_index(store, std::min(config.num_cells, store.size()), config.seed);
    const SyntheticTextEmbedder embedder(store.dimension(), config.seed);
    const std::size_t probes = std::min(config.probes, index.num_cells());

    // per-keyword retrieval, parallel over keywords, result slots keep order
    std::vector<std::vector<Candidate>> per_keyword(keywords.size());
    const std::size_t jobs = std::max<std::size_t>(1, config.jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= keywords.size()) {
                return;
            }
            per_keyword[i] =
                retrieve_for_keyword(keywords[i].keyword, embedder, store, index, config.k, probes);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    PipelineResult result;
    std::vector<Candidate> all;
    for (std::size_t i = 0; i < keywords.size(); ++i) {
        std::vector<double> distances;
        distances.reserve(per_keyword[i].size());
        for (const auto& c : per_keyword[i]) {
            distances.push_back(c.distance);
        }
        result.stats.push_back(distance_stats(distances, keywords[i].keyword));
        all.insert(all.end(), per_keyword[i].begin(), per_keyword[i].end());
    }

    result.manifest = deduplicate(all, store, config.near_dup_threshold);

    result.report.total = result.manifest.size();
    for (auto& rec : result.manifest) {
        const auto doc = ocr.ocr_for(rec.image_id);
        const FilterDecision decision = quality_filter(rec, doc.has_value() ? &*doc : nullptr,
                                                       config.thresholds);
        rec.kept = decision.kept;
        rec.reject_reason = decision.reason;
        if (decision.kept) {
            ++result.report.kept;
        } else {
            ++result.report.rejected_by_reason[decision.reason];
        }
    }
    return result;
}

json record_to_json(const CorpusRecord& record) {
    json j;
    j["image_id"] = record.image_id;
    j["content_hash"] = hex_digest(record.content_hash);
    json prov = json::array();
    for (const auto& p : record.provenance) {
        prov.push_back({{"keyword", p.keyword}, {"distance", p.distance}});
    }
    j["provenance"] = std::move(prov);
    j["status"] = record.kept ? "kept" : "rejected";
    if (!record.kept) {
        j["reason"] = record.reject_reason;
    }
    return j;
}

CorpusRecord record_from_json(const json& j) {
    CorpusRecord rec;
    rec.image_id = j.at("image_id").get<std::uint64_t>();
    rec.content_hash = digest_from_hex(j.at("content_hash").get<std::string>());
    for (const auto& p : j.at("provenance")) {
        rec.provenance.push_back({p.at("keyword").get<std::string>(), p.at("distance").get<double>()});
    }
    const std::string status = j.at("status").get<std::string>();
    rec.kept = status == "kept";
    if (!rec.kept) {
        rec.reject_reason = j.value("reason", "");
    }
    return rec;
}

void write_manifest(const std::string& path, std::span<const CorpusRecord> manifest) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open manifest for writing: " + path);
    }
    for (const auto& rec : manifest) {
        out << record_to_json(rec).dump() << "\n";
    }
    if (!out) {
        throw IoError("failed while writing manifest: " + path);
    }
}

std::vector<CorpusRecord> read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open manifest: " + path);
    }
    std::vector<CorpusRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        out.push_back(record_from_json(json::parse(line)));
    }
    return out;
}

namespace {
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string quoted = "\"";
    for (const char c : s) {
        if (c == '"') {
            quoted += "\"\"";
        } else {
            quoted += c;
        }
    }
    quoted += "\"";
    return quoted;
}
}  // namespace

void write_stats_csv(const std::string& path, std::span<const DistanceStats> stats) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open stats file for writing: " + path);
    }
    out << "keyword,mean,std,count\n";
    char buf[64];
    for (const auto& s : stats) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f", s.mean, s.stddev);
        out << csv_field(s.keyword) << "," << buf << "," << s.count << "\n";
    }
    if (!out) {
        throw IoError("failed while writing stats file: " + path);
    }
}

}  // namespace docforge
