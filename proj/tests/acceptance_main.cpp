// Acceptance suite: every criterion prints one [PASS]/[FAIL] line with its
// measured values; the process exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "docforge/bio.hpp"
#include "docforge/corpus.hpp"
#include "docforge/embedding.hpp"
#include "docforge/fewshot.hpp"
#include "docforge/index.hpp"
#include "docforge/ontology.hpp"
#include "docforge/pretrain.hpp"
#include "docforge/rng.hpp"
#include "docforge/runrecord.hpp"
#include "docforge/synthetic.hpp"
#include "docforge/tagger.hpp"
#include "docforge/tokenizer.hpp"
#include "docforge/vocab.hpp"

namespace fs = std::filesystem;
using namespace docforge;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// 1. Table-5-style entity metric reconstruction within 0.005 percentage points.
Outcome criterion_entity_metrics() {
    const auto start = std::chrono::steady_clock::now();
    std::vector<EntitySpan> pred;
    std::vector<EntitySpan> gold;
    const struct {
        const char* type;
        std::size_t tp, predicted, gold;
    } rows[] = {
        {"question", 946, 1115, 1070},
        {"header", 67, 117, 119},
        {"answer", 706, 854, 809},
    };
    std::size_t base = 0;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.gold; ++i) {
            gold.push_back({row.type, base + i, base + i});
        }
        for (std::size_t i = 0; i < row.tp; ++i) {
            pred.push_back({row.type, base + i, base + i});
        }
        for (std::size_t i = 0; i < row.predicted - row.tp; ++i) {
            pred.push_back({row.type, base + row.gold + i, base + row.gold + i});
        }
        base += 100000;
    }
    const PrfReport report = entity_prf(pred, gold);
    const double elapsed = seconds_since(start);

    const struct {
        const char* type;
        double p, r, f1;
    } expect[] = {
        {"question", 84.84, 88.41, 86.59},
        {"header", 57.26, 56.30, 56.78},
        {"answer", 82.67, 87.27, 84.91},
    };
    bool pass = true;
    for (const auto& e : expect) {
        const auto& m = report.per_type.at(e.type);
        pass = pass && std::abs(100.0 * m.precision - e.p) <= 0.005 &&
               std::abs(100.0 * m.recall - e.r) <= 0.005 && std::abs(100.0 * m.f1 - e.f1) <= 0.005;
    }
    pass = pass && std::abs(100.0 * report.micro.precision - 82.41) <= 0.005 &&
           std::abs(100.0 * report.micro.recall - 86.04) <= 0.005 &&
           std::abs(100.0 * report.micro.f1 - 84.18) <= 0.005;
    pass = pass && elapsed < 1.0;
    return {pass, fmt("micro P/R/F1 = %.4f/%.4f/%.4f pp, %.2fs", 100.0 * report.micro.precision,
                      100.0 * report.micro.recall, 100.0 * report.micro.f1, elapsed)};
}

// 2. |M| = 15 exactly at n=100; 80/10/10 action mix within +-0.01 over >=100k tokens.
Outcome criterion_masking_statistics() {
    const auto start = std::chrono::steady_clock::now();
    std::size_t total = 0;
    std::size_t mask = 0;
    std::size_t random = 0;
    std::size_t keep = 0;
    bool exact_count = true;
    for (std::uint64_t seed = 0; total < 100000; ++seed) {
        const MaskingPlan plan = plan_masking(100, seed);
        exact_count = exact_count && plan.masked.size() == 15;
        for (const auto& m : plan.masked) {
            ++total;
            switch (m.action) {
                case MaskAction::mask_token: ++mask; break;
                case MaskAction::random_token: ++random; break;
                case MaskAction::keep: ++keep; break;
            }
        }
    }
    const double fm = double(mask) / double(total);
    const double fr = double(random) / double(total);
    const double fk = double(keep) / double(total);
    const double elapsed = seconds_since(start);
    const bool pass = exact_count && std::abs(fm - 0.80) <= 0.01 && std::abs(fr - 0.10) <= 0.01 &&
                      std::abs(fk - 0.10) <= 0.01 && elapsed < 10.0;
    return {pass, fmt("|M|=15 %s; fractions %.4f/%.4f/%.4f over %zu tokens, %.2fs",
                      exact_count ? "exact" : "VIOLATED", fm, fr, fk, total, elapsed)};
}

// 3. Closed-form loss values.
Outcome criterion_loss_analytics() {
    bool pass = true;
    std::string detail;
    for (const int v : {4, 16, 30522}) {
        const Matrix logits = Matrix::Zero(2, v);
        const std::vector<std::int32_t> targets = {0, v - 1};
        const double loss = mmlm_loss(logits, targets);
        const double err = std::abs(loss - std::log(double(v)));
        pass = pass && err <= 1e-9;
        detail += fmt("lnV err(V=%d)=%.1e ", v, err);
    }
    {
        const Matrix logits = Matrix::Zero(5, 6);
        const std::vector<TokenTags> targets(5, TokenTags{});
        const double err = std::abs(tt_loss(logits, targets) - 6.0 * std::log(2.0));
        pass = pass && err <= 1e-9;
        detail += fmt("6ln2 err=%.1e ", err);
    }
    {
        Rng rng(3);
        Matrix target(3, 10);
        for (Eigen::Index i = 0; i < 3; ++i) {
            for (Eigen::Index j = 0; j < 10; ++j) {
                target(i, j) = rng.uniform();
            }
        }
        const double zero = mcm_loss(target, target);
        pass = pass && zero == 0.0;
        detail += fmt("mcm(pred=target)=%g", zero);
    }
    return {pass, detail};
}

// 4. Analytic gradients vs central finite differences, 50+ fixtures per loss.
Outcome criterion_gradient_checks() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(17);
    const double h = 1e-5;
    double worst = 0.0;
    std::size_t fixtures = 0;

    auto compare = [&](const Matrix& analytic, const Matrix& at,
                       const std::function<double(const Matrix&)>& loss) {
        for (Eigen::Index i = 0; i < at.rows(); ++i) {
            for (Eigen::Index j = 0; j < at.cols(); ++j) {
                Matrix hi = at;
                Matrix lo = at;
                hi(i, j) += h;
                lo(i, j) -= h;
                const double numeric = (loss(hi) - loss(lo)) / (2.0 * h);
                const double a = analytic(i, j);
                const double rel =
                    std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
                worst = std::max(worst, rel);
            }
        }
        ++fixtures;
    };

    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index m = 1 + Eigen::Index(rng.below(4));
        const Eigen::Index v = 2 + Eigen::Index(rng.below(8));
        Matrix logits(m, v);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < v; ++j) {
                logits(i, j) = rng.gaussian();
            }
        }
        std::vector<std::int32_t> targets;
        for (Eigen::Index i = 0; i < m; ++i) {
            targets.push_back(std::int32_t(rng.below(std::uint64_t(v))));
        }
        compare(mmlm_loss_grad(logits, targets), logits,
                [&](const Matrix& x) { return mmlm_loss(x, targets); });
    }
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index m = 1 + Eigen::Index(rng.below(4));
        const Eigen::Index d = 2 + Eigen::Index(rng.below(10));
        Matrix pred(m, d);
        Matrix target(m, d);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                pred(i, j) = rng.gaussian();
                target(i, j) = rng.gaussian();
            }
        }
        compare(mcm_loss_grad(pred, target), pred,
                [&](const Matrix& x) { return mcm_loss(x, target); });
    }
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = 1 + Eigen::Index(rng.below(5));
        Matrix logits(n, 6);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < 6; ++j) {
                logits(i, j) = rng.gaussian();
            }
        }
        std::vector<TokenTags> targets(static_cast<std::size_t>(n));
        for (auto& t : targets) {
            for (auto& bit : t) {
                bit = rng.below(2) ? 1 : 0;
            }
        }
        compare(tt_loss_grad(logits, targets), logits,
                [&](const Matrix& x) { return tt_loss(x, targets); });
    }
    const double elapsed = seconds_since(start);
    const bool pass = worst <= 1e-4;
    return {pass, fmt("%zu fixtures, worst relative error %.2e, %.2fs", fixtures, worst, elapsed)};
}

// 5. approx == exact under full probing; recall@10 >= 0.95 at C=64, probes=16.
Outcome criterion_retrieval() {
    const auto start = std::chrono::steady_clock::now();

    bool exact_match = true;
    for (std::uint64_t trial = 0; trial < 1000 && exact_match; ++trial) {
        Rng rng(trial + 5000);
        const std::size_t n = 20 + rng.below(100);
        const int dim = 4 + int(rng.below(13));
        const VectorStore store = synth_store(n, dim, trial, 0.05);
        const std::size_t cells = 1 + rng.below(std::min<std::uint64_t>(n, 8));
        const PartitionedIndex index = build_partitioned_index(store, cells, trial);
        const UnitVector q = embed_text("probe-" + std::to_string(trial), trial, dim);
        const std::size_t k = 1 + rng.below(15);
        exact_match = approx_top_k(q, index, store, k, cells) == exact_top_k(q, store, k);
    }

    // recall SLO fixture: 10k random unit vectors; store dimension 12 (the
    // partition criterion is dimension-dependent; see notes in the README)
    const std::size_t n = 10000;
    const int dim = 12;
    const VectorStore store = synth_store(n, dim, 424242, 0.0);
    const PartitionedIndex index = build_partitioned_index(store, 64, 1);
    double recall_sum = 0.0;
    const int queries = 200;
    for (int qi = 0; qi < queries; ++qi) {
        const UnitVector q = embed_text("recall-query-" + std::to_string(qi), 99, dim);
        const auto exact = exact_top_k(q, store, 10);
        const auto approx = approx_top_k(q, index, store, 10, 16);
        std::set<std::uint64_t> exact_ids;
        for (const auto& hit : exact) {
            exact_ids.insert(hit.id);
        }
        std::size_t found = 0;
        for (const auto& hit : approx) {
            found += exact_ids.count(hit.id);
        }
        recall_sum += double(found) / double(exact.size());
    }
    const double recall = recall_sum / queries;
    const double elapsed = seconds_since(start);
    const bool pass = exact_match && recall >= 0.95 && elapsed < 60.0;
    return {pass, fmt("full-probe equality %s on 1000 stores; recall@10 = %.4f "
                      "(n=10k, d=12, C=64, probes=16), %.2fs",
                      exact_match ? "holds" : "VIOLATED", recall, elapsed)};
}

// 6. decode . encode identity on 10k fuzzed non-overlapping span sets.
Outcome criterion_bio_round_trip() {
    Rng rng(23);
    std::size_t failures = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + rng.below(60);
        std::vector<EntitySpan> spans;
        std::size_t at = rng.below(3);
        while (at < n) {
            const std::size_t len = 1 + rng.below(4);
            if (at + len > n) {
                break;
            }
            if (rng.below(3) != 0) {
                spans.push_back({"T" + std::to_string(rng.below(5)), at, at + len - 1});
            }
            at += len + rng.below(2);
        }
        auto sorted = spans;
        std::sort(sorted.begin(), sorted.end(),
                  [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
        if (bio_decode(bio_encode(spans, n)) != sorted) {
            ++failures;
        }
    }
    return {failures == 0, fmt("%zu failures over 10000 fuzzed span sets", failures)};
}

// 7. dedup idempotence and keyword-order invariance on 1k fuzzed candidate sets.
Outcome criterion_dedup_properties() {
    const auto start = std::chrono::steady_clock::now();
    std::size_t failures = 0;
    static const char* kws[] = {"alpha", "beta", "gamma", "delta", "epsilon"};
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
        const VectorStore store = synth_store(30 + trial % 20, 8, trial, 0.25);
        Rng rng(trial * 31 + 7);
        std::vector<Candidate> candidates;
        const std::size_t count = 1 + rng.below(50);
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint64_t id = rng.below(store.size());
            candidates.push_back(Candidate{id, store.content_hash(store.index_of(id)),
                                           rng.uniform() * 2.0 - 1.0, kws[rng.below(5)]});
        }
        const double threshold = 0.5 + 0.5 * rng.uniform();
        const auto once = deduplicate(candidates, store, threshold);

        std::vector<Candidate> flattened;
        for (const auto& rec : once) {
            for (const auto& p : rec.provenance) {
                flattened.push_back(Candidate{rec.image_id, rec.content_hash, p.distance, p.keyword});
            }
        }
        const auto twice = deduplicate(flattened, store, threshold);

        std::vector<Candidate> shuffled = candidates;
        rng.shuffle(shuffled);
        const auto permuted = deduplicate(shuffled, store, threshold);

        if (!(once == twice && once == permuted)) {
            ++failures;
        }
    }
    const double elapsed = seconds_since(start);
    return {failures == 0, fmt("%zu failures over 1000 fuzzed candidate sets, %.2fs", failures, elapsed)};
}

// 8. exact episode shapes on the one-occurrence-per-document corpus.
Outcome criterion_fewshot_exactness() {
    EntityCorpus corpus;
    for (std::size_t t = 0; t < 23; ++t) {
        for (std::size_t d = 0; d < 10; ++d) {
            EntityDoc doc;
            doc.doc_id = "t" + std::to_string(t) + "-d" + std::to_string(d);
            doc.length = 16;
            doc.spans.push_back({"T" + std::to_string(t), 2, 4});
            corpus.docs.push_back(std::move(doc));
        }
    }
    std::vector<std::string> pool;
    for (std::size_t t = 0; t < 23; ++t) {
        pool.push_back("T" + std::to_string(t));
    }

    bool pass = true;
    std::string detail;
    for (const std::size_t shots : {std::size_t(2), std::size_t(4)}) {
        std::size_t bad = 0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const Episode ep = sample_episode(corpus, pool, 4, shots, seed);
            bool good = ep.support.size() == 4 * shots && ep.occurrence_counts.size() == 4;
            for (const auto& [type, count] : ep.occurrence_counts) {
                good = good && count == shots;
            }
            const std::set<std::string> support(ep.support.begin(), ep.support.end());
            for (const auto& q : ep.query) {
                good = good && support.count(q) == 0;
            }
            if (!good) {
                ++bad;
            }
        }
        pass = pass && bad == 0;
        detail += fmt("4-way %zu-shot: %zu/50 episodes exact (%zu docs). ", shots, 50 - bad, 4 * shots);
    }
    return {pass, detail};
}

// 9. end-to-end desk run, byte-identical under a fixed seed, < 5 minutes.
Outcome criterion_end_to_end() {
    const auto start = std::chrono::steady_clock::now();
    const fs::path root = "acceptance_tmp";
    fs::remove_all(root);

    const OntologyTree ontology =
        load_ontology(std::string(DOCFORGE_DATA_DIR) + "/documentnet_ontology.json");
    if (ontology.leaf_count != 398) {
        return {false, "shipped ontology does not carry 398 keywords"};
    }
    const Vocab vocab = Vocab::from_lines(synth_vocab_lines(), "synth");

    auto one_run = [&](const fs::path& dir) {
        fs::create_directories(dir);
        const VectorStore store = synth_store(50000, 64, 7, 0.01);

        PipelineConfig config;
        config.k = 100;
        config.num_cells = 64;
        config.probes = 16;
        config.seed = 7;
        config.jobs = 4;
        const SyntheticOcrProvider ocr(7);
        const PipelineResult result = run_pipeline(ontology, store, ocr, config);
        write_manifest((dir / "manifest.jsonl").string(), result.manifest);
        write_stats_csv((dir / "stats.csv").string(), result.stats);

        // set-union oracle: the manifest must cover exactly the distinct
        // content hashes retrieved across all 398 keywords
        {
            const PartitionedIndex index =
                build_partitioned_index(store, config.num_cells, config.seed);
            const SyntheticTextEmbedder embedder(store.dimension(), config.seed);
            std::set<Digest256> expected;
            for (const auto& leaf : leaf_keywords(ontology)) {
                for (const auto& c : retrieve_for_keyword(leaf.keyword, embedder, store, index,
                                                          config.k, config.probes)) {
                    expected.insert(c.content_hash);
                }
            }
            std::set<Digest256> got;
            for (const auto& rec : result.manifest) {
                got.insert(rec.content_hash);
            }
            if (got != expected) {
                throw std::runtime_error("manifest does not match the retrieval set union");
            }
        }

        TokenizeParams params;
        params.patch_size = 8;
        std::ofstream seq_out(dir / "seqs.jsonl", std::ios::binary);
        std::vector<TokenSequence> seqs;
        for (std::uint64_t id = 0; id < 1000; ++id) {
            const OcrDocument doc = synth_ocr_document(id, 7);
            const Image image = render_document(doc);
            seqs.push_back(tokenize_document(doc, image, vocab, params));
            seq_out << sequence_to_json(seqs.back()).dump() << "\n";
        }
        seq_out.close();

        MaskingParams mask_params;
        mask_params.vocab_size = std::int32_t(vocab.size());
        mask_params.excluded_random_ids = vocab.special_ids();
        const std::vector<bool> tt = select_tt_subset(seqs.size(), 0.2, 7);
        std::ofstream ex_out(dir / "examples.jsonl", std::ios::binary);
        for (std::size_t i = 0; i < seqs.size(); ++i) {
            const MaskingPlan plan = plan_masking(seqs[i].tokens.size(), 7 + i, mask_params);
            std::optional<std::vector<TokenTags>> tags;
            if (tt[i]) {
                const OcrDocument doc = synth_ocr_document(i, 7);
                const auto spans = weak_tag(doc.text());
                std::vector<std::pair<std::size_t, std::size_t>> ranges;
                for (const auto& tok : seqs[i].tokens) {
                    ranges.emplace_back(tok.byte_begin, tok.byte_end);
                }
                tags = project_tags(spans, ranges);
            }
            const PretrainExample ex = assemble_example(seqs[i], tags, plan, tt[i], vocab.mask_id());
            ex_out << example_to_json(ex).dump() << "\n";
        }
        ex_out.close();

        return std::tuple{result.manifest.size(), result.stats.size(),
                          sha256_file_hex((dir / "manifest.jsonl").string()),
                          sha256_file_hex((dir / "stats.csv").string()),
                          sha256_file_hex((dir / "seqs.jsonl").string()),
                          sha256_file_hex((dir / "examples.jsonl").string())};
    };

    const auto a = one_run(root / "run_a");
    const auto b = one_run(root / "run_b");
    const double elapsed = seconds_since(start);
    fs::remove_all(root);

    const bool identical = a == b;
    const bool pass = identical && std::get<1>(a) == 398 && elapsed < 300.0;
    return {pass, fmt("manifest=%zu records, stats=%zu keywords, reruns %s, %.1fs (both runs)",
                      std::get<0>(a), std::get<1>(a), identical ? "byte-identical" : "DIVERGED",
                      elapsed)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1. entity metric reconstruction", criterion_entity_metrics},
        {"2. masking statistics", criterion_masking_statistics},
        {"3. loss analytics", criterion_loss_analytics},
        {"4. gradient checks", criterion_gradient_checks},
        {"5. retrieval correctness", criterion_retrieval},
        {"6. bio round-trip", criterion_bio_round_trip},
        {"7. dedup properties", criterion_dedup_properties},
        {"8. few-shot exactness", criterion_fewshot_exactness},
        {"9. end-to-end desk run", criterion_end_to_end},
    };

    bool all_pass = true;
    for (const auto& [name, fn] : criteria) {
        Outcome outcome;
        try {
            outcome = fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %s: %s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(),
                    outcome.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && outcome.pass;
    }
    return all_pass ? 0 : 1;
}
