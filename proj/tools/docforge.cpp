#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "docforge/bio.hpp"
#include "docforge/corpus.hpp"
#include "docforge/embedding.hpp"
#include "docforge/error.hpp"
#include "docforge/fewshot.hpp"
#include "docforge/index.hpp"
#include "docforge/ontology.hpp"
#include "docforge/pretrain.hpp"
#include "docforge/runrecord.hpp"
#include "docforge/synthetic.hpp"
#include "docforge/tagger.hpp"
#include "docforge/tokenizer.hpp"
#include "docforge/vocab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace docforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitValidation = 4;

/// Flat key=value configuration file; '#' starts a comment. Values apply only
/// to options not already given on the command line, so flags always win.
class FlatConfig {
public:
    static FlatConfig load(const std::string& path) {
        FlatConfig cfg;
        if (path.empty()) {
            return cfg;
        }
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw IoError("cannot open config file: " + path);
        }
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                line.resize(hash);
            }
            const auto strip = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            const std::string stripped = strip(line);
            if (stripped.empty()) {
                continue;
            }
            const auto eq = stripped.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("config line " + std::to_string(lineno) + " is not key=value: " + stripped);
            }
            cfg.values_[strip(stripped.substr(0, eq))] = strip(stripped.substr(eq + 1));
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    template <typename T>
    void apply(const CLI::Option* flag, const std::string& key, T* target) const {
        if (flag != nullptr && flag->count() > 0) {
            return;  // command line wins
        }
        const auto it = values_.find(key);
        if (it == values_.end()) {
            return;
        }
        std::istringstream ss(it->second);
        T value{};
        if (!(ss >> value) || !(ss >> std::ws).eof()) {
            throw ConfigError("config key '" + key + "' has a bad value: " + it->second);
        }
        *target = value;
    }

private:
    std::map<std::string, std::string> values_;
};

std::uint64_t resolve_seed(const CLI::Option* seed_opt, const FlatConfig& cfg, std::uint64_t parsed) {
    if (seed_opt->count() > 0) {
        return parsed;
    }
    if (cfg.has("seed")) {
        std::uint64_t from_cfg = parsed;
        cfg.apply(nullptr, "seed", &from_cfg);
        return from_cfg;
    }
    if (const char* env = std::getenv("DOCFORGE_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw ConfigError("DOCFORGE_SEED is not an integer: " + std::string(env));
        }
    }
    return parsed;
}

void require_file(const std::string& path) {
    if (!fs::exists(path)) {
        throw IoError("input does not exist: " + path);
    }
}

std::vector<OcrDocument> read_ocr_jsonl(const std::string& path) {
    require_file(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open OCR file: " + path);
    }
    std::vector<OcrDocument> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            docs.push_back(parse_ocr_json_text(line));
        }
    }
    return docs;
}

void write_lines_sorted(const std::string& path, std::vector<std::pair<std::string, std::string>> keyed) {
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open output for writing: " + path);
    }
    for (const auto& [key, line] : keyed) {
        out << line << "\n";
    }
}

/// Run fn(i) for i in [0, n) on `jobs` threads.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max<std::size_t>(1, jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < jobs; ++t) {
        pool.emplace_back([&]() {
            while (!failed.load()) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (const std::exception& e) {
                    std::scoped_lock lock(error_mutex);
                    failed.store(true);
                    if (error_message.empty()) {
                        error_message = e.what();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failed.load()) {
        throw InvalidInput(error_message);
    }
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string out_dir;
    std::size_t store_size = 50000;
    int dim = 64;
    std::size_t docs = 1000;
    double dup_fraction = 0.02;
    std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& args) {
    fs::create_directories(args.out_dir);
    const VectorStore store = synth_store(args.store_size, args.dim, args.seed, args.dup_fraction);
    store.save(args.out_dir + "/store.dnvs");

    {
        std::ofstream out(args.out_dir + "/ocr.jsonl", std::ios::binary | std::ios::trunc);
        for (std::size_t i = 0; i < args.docs; ++i) {
            out << ocr_to_json(synth_ocr_document(i, args.seed)).dump() << "\n";
        }
    }
    {
        std::ofstream out(args.out_dir + "/vocab.txt", std::ios::binary | std::ios::trunc);
        for (const auto& line : synth_vocab_lines()) {
            out << line << "\n";
        }
    }
    write_entity_corpus(args.out_dir + "/entity_corpus.jsonl",
                        synth_entity_corpus(std::max<std::size_t>(args.docs, 200), 30, args.seed));

    RunRecord record;
    record.subcommand = "synth";
    record.config = {{"store_size", args.store_size}, {"dim", args.dim},     {"docs", args.docs},
                     {"dup_fraction", args.dup_fraction}, {"seed", args.seed}, {"out", args.out_dir}};
    record.write(args.out_dir + "/run_record.json");
    std::cout << "store=" << args.store_size << " docs=" << args.docs << " -> " << args.out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------- build-corpus

struct BuildCorpusArgs {
    std::string ontology_path;
    std::string store_path;
    std::string out_dir;
    std::string ocr_path;  // optional JSONL; synthetic provider otherwise
    PipelineConfig config;
};

int run_build_corpus(const BuildCorpusArgs& args) {
    require_file(args.ontology_path);
    require_file(args.store_path);
    const OntologyTree ontology = load_ontology(args.ontology_path);
    const VectorStore store = VectorStore::load(args.store_path);

    std::unique_ptr<OcrProvider> provider;
    if (!args.ocr_path.empty()) {
        require_file(args.ocr_path);
        provider = std::make_unique<JsonlOcrProvider>(args.ocr_path);
    } else {
        provider = std::make_unique<SyntheticOcrProvider>(args.config.seed);
    }

    const PipelineResult result = run_pipeline(ontology, store, *provider, args.config);

    fs::create_directories(args.out_dir);
    write_manifest(args.out_dir + "/manifest.jsonl", result.manifest);
    write_stats_csv(args.out_dir + "/stats.csv", result.stats);
    {
        json report;
        report["total"] = result.report.total;
        report["kept"] = result.report.kept;
        report["rejected_by_reason"] = result.report.rejected_by_reason;
        std::ofstream out(args.out_dir + "/filter_report.json", std::ios::binary | std::ios::trunc);
        out << report.dump(2) << "\n";
    }

    RunRecord record;
    record.subcommand = "build-corpus";
    record.config = {{"k", args.config.k},
                     {"probes", args.config.probes},
                     {"num_cells", args.config.num_cells},
                     {"near_dup_threshold", args.config.near_dup_threshold},
                     {"min_confidence", args.config.thresholds.min_confidence},
                     {"min_tokens", args.config.thresholds.min_tokens},
                     {"alnum_ratio_min", args.config.thresholds.alnum_ratio_min},
                     {"seed", args.config.seed},
                     {"jobs", args.config.jobs}};
    record.add_input(args.ontology_path);
    record.add_input(args.store_path);
    if (!args.ocr_path.empty()) {
        record.add_input(args.ocr_path);
    }
    record.write(args.out_dir + "/run_record.json");

    std::cout << "manifest records=" << result.manifest.size() << " kept=" << result.report.kept
              << " -> " << args.out_dir << "\n";
    return kExitOk;
}

// ------------------------------------------------------------------ stats

int run_stats(const std::string& manifest_path, const std::string& out_path) {
    require_file(manifest_path);
    const auto manifest = read_manifest(manifest_path);
    std::map<std::string, std::vector<double>> per_keyword;
    for (const auto& rec : manifest) {
        for (const auto& p : rec.provenance) {
            per_keyword[p.keyword].push_back(p.distance);
        }
    }
    std::vector<DistanceStats> stats;
    stats.reserve(per_keyword.size());
    for (const auto& [keyword, distances] : per_keyword) {
        stats.push_back(distance_stats(distances, keyword));
    }
    write_stats_csv(out_path, stats);

    RunRecord record;
    record.subcommand = "stats";
    record.config = {{"manifest", manifest_path}, {"out", out_path}};
    record.add_input(manifest_path);
    record.write(out_path + ".run.json");
    std::cout << "keywords=" << stats.size() << " -> " << out_path << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- tokenize

struct TokenizeArgs {
    std::string in_path;
    std::string vocab_path;
    std::string out_path;
    TokenizeParams params;
    std::string reading_order = "input";  // or "sort": line-cluster fallback
    std::size_t jobs = 1;
};

int run_tokenize(const TokenizeArgs& args) {
    require_file(args.in_path);
    require_file(args.vocab_path);
    if (args.reading_order != "input" && args.reading_order != "sort") {
        throw ConfigError("--reading-order must be 'input' or 'sort'");
    }
    const Vocab vocab = Vocab::load(args.vocab_path);
    auto docs = read_ocr_jsonl(args.in_path);
    if (args.reading_order == "sort") {
        for (auto& doc : docs) {
            doc = sort_reading_order(doc);
        }
    }

    std::vector<std::pair<std::string, std::string>> lines(docs.size());
    parallel_for(docs.size(), args.jobs, [&](std::size_t i) {
        const Image image = render_document(docs[i]);
        const TokenSequence seq = tokenize_document(docs[i], image, vocab, args.params);
        lines[i] = {seq.doc_id, sequence_to_json(seq).dump()};
    });
    write_lines_sorted(args.out_path, std::move(lines));

    RunRecord record;
    record.subcommand = "tokenize";
    record.config = {{"r", args.params.context_ratio},
                     {"P", args.params.patch_size},
                     {"max_seq_len", args.params.max_seq_len},
                     {"reading_order", args.reading_order},
                     {"jobs", args.jobs}};
    record.add_input(args.in_path);
    record.add_input(args.vocab_path);
    record.write(args.out_path + ".run.json");
    std::cout << "sequences=" << docs.size() << " -> " << args.out_path << "\n";
    return kExitOk;
}

// -------------------------------------------------------------------- tag

int run_tag(const std::string& in_path, const std::string& out_path) {
    const auto docs = read_ocr_jsonl(in_path);
    std::vector<std::pair<std::string, std::string>> lines(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const std::string text = docs[i].text();
        json spans = json::array();
        for (const auto& span : weak_tag(text)) {
            spans.push_back({{"class", tag_class_name(span.cls)}, {"start", span.begin}, {"end", span.end}});
        }
        json j = {{"doc_id", docs[i].doc_id}, {"spans", std::move(spans)}};
        lines[i] = {docs[i].doc_id, j.dump()};
    }
    write_lines_sorted(out_path, std::move(lines));

    RunRecord record;
    record.subcommand = "tag";
    record.config = {{"in", in_path}};
    record.add_input(in_path);
    record.write(out_path + ".run.json");
    std::cout << "documents=" << docs.size() << " -> " << out_path << "\n";
    return kExitOk;
}

// ------------------------------------------------------- assemble-pretrain

struct AssembleArgs {
    std::string in_path;
    std::string vocab_path;
    std::string tags_path;  // optional
    std::string out_path;
    double tt_fraction = 0.2;
    double alpha = 1.0;  // loss weights, recorded for downstream trainers
    double beta = 1.0;
    std::uint64_t seed = 0;
};

int run_assemble(const AssembleArgs& args) {
    require_file(args.in_path);
    require_file(args.vocab_path);
    const Vocab vocab = Vocab::load(args.vocab_path);

    std::vector<TokenSequence> seqs;
    {
        std::ifstream in(args.in_path, std::ios::binary);
        if (!in) {
            throw IoError("cannot open sequence file: " + args.in_path);
        }
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) {
                seqs.push_back(sequence_from_json(json::parse(line)));
            }
        }
    }
    std::sort(seqs.begin(), seqs.end(),
              [](const TokenSequence& a, const TokenSequence& b) { return a.doc_id < b.doc_id; });

    std::map<std::string, std::vector<TagSpan>> spans_by_doc;
    if (!args.tags_path.empty()) {
        require_file(args.tags_path);
        std::ifstream in(args.tags_path, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            const json j = json::parse(line);
            auto& spans = spans_by_doc[j.at("doc_id").get<std::string>()];
            for (const auto& s : j.at("spans")) {
                spans.push_back({tag_class_from_name(s.at("class").get<std::string>()),
                                 s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()});
            }
        }
    } else if (args.tt_fraction > 0.0) {
        throw ConfigError("assemble-pretrain: --tags is required when --tt-fraction > 0");
    }

    const std::vector<bool> tt = select_tt_subset(seqs.size(), args.tt_fraction, args.seed);

    MaskingParams mask_params;
    mask_params.vocab_size = static_cast<std::int32_t>(vocab.size());
    mask_params.excluded_random_ids = vocab.special_ids();

    std::ofstream out(args.out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open output for writing: " + args.out_path);
    }
    std::size_t tt_count = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const MaskingPlan plan = plan_masking(seqs[i].tokens.size(), args.seed + i, mask_params);
        std::optional<std::vector<TokenTags>> tags;
        if (tt[i]) {
            std::vector<std::pair<std::size_t, std::size_t>> ranges;
            ranges.reserve(seqs[i].tokens.size());
            for (const auto& tok : seqs[i].tokens) {
                ranges.emplace_back(tok.byte_begin, tok.byte_end);
            }
            const auto it = spans_by_doc.find(seqs[i].doc_id);
            const std::vector<TagSpan> empty;
            tags = project_tags(it == spans_by_doc.end() ? empty : it->second, ranges);
            ++tt_count;
        }
        const PretrainExample ex = assemble_example(seqs[i], tags, plan, tt[i], vocab.mask_id());
        out << example_to_json(ex).dump() << "\n";
    }

    RunRecord record;
    record.subcommand = "assemble-pretrain";
    record.config = {{"tt_fraction", args.tt_fraction},
                     {"alpha", args.alpha},
                     {"beta", args.beta},
                     {"seed", args.seed}};
    record.add_input(args.in_path);
    record.add_input(args.vocab_path);
    if (!args.tags_path.empty()) {
        record.add_input(args.tags_path);
    }
    record.write(args.out_path + ".run.json");
    std::cout << "examples=" << seqs.size() << " tt=" << tt_count << " -> " << args.out_path << "\n";
    return kExitOk;
}

// ------------------------------------------------------------ eval-entities

std::map<std::string, std::vector<EntitySpan>> read_span_file(const std::string& path) {
    require_file(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open span file: " + path);
    }
    std::map<std::string, std::vector<EntitySpan>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const json j = json::parse(line);
        auto& spans = out[j.at("doc_id").get<std::string>()];
        for (const auto& s : j.at("spans")) {
            spans.push_back({s.at("type").get<std::string>(), s.at("start").get<std::size_t>(),
                             s.at("end").get<std::size_t>()});
        }
    }
    return out;
}

json report_to_json(const PrfReport& report) {
    json per_type = json::object();
    for (const auto& [type, m] : report.per_type) {
        per_type[type] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
    }
    json counts = json::object();
    for (const auto& [type, c] : report.counts) {
        counts[type] = {{"tp", c.tp}, {"predicted", c.predicted}, {"gold", c.gold}};
    }
    return json{{"per_type", std::move(per_type)},
                {"micro",
                 {{"precision", report.micro.precision},
                  {"recall", report.micro.recall},
                  {"f1", report.micro.f1},
                  {"support", report.micro.support}}},
                {"counts", std::move(counts)}};
}

int run_eval_entities(const std::string& gold_path, const std::string& pred_path,
                      const std::string& out_path) {
    const auto gold = read_span_file(gold_path);
    const auto pred = read_span_file(pred_path);

    std::map<std::string, PrfCounts> counts;
    std::vector<EntitySpan> empty;
    std::set<std::string> doc_ids;
    for (const auto& [id, spans] : gold) {
        doc_ids.insert(id);
    }
    for (const auto& [id, spans] : pred) {
        doc_ids.insert(id);
    }
    for (const auto& id : doc_ids) {
        const auto git = gold.find(id);
        const auto pit = pred.find(id);
        const PrfReport doc_report = entity_prf(pit == pred.end() ? empty : pit->second,
                                                git == gold.end() ? empty : git->second);
        for (const auto& [type, c] : doc_report.counts) {
            counts[type].tp += c.tp;
            counts[type].predicted += c.predicted;
            counts[type].gold += c.gold;
        }
    }
    const PrfReport report = prf_from_counts(counts);
    {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open report for writing: " + out_path);
        }
        out << report_to_json(report).dump(2) << "\n";
    }
    RunRecord record;
    record.subcommand = "eval-entities";
    record.config = json::object();
    record.add_input(gold_path);
    record.add_input(pred_path);
    record.write(out_path + ".run.json");

    char buf[128];
    std::snprintf(buf, sizeof(buf), "micro P=%.2f R=%.2f F1=%.2f", 100.0 * report.micro.precision,
                  100.0 * report.micro.recall, 100.0 * report.micro.f1);
    std::cout << buf << " -> " << out_path << "\n";
    return kExitOk;
}

int run_eval_docs(const std::string& gold_path, const std::string& pred_path,
                  const std::string& out_path) {
    require_file(gold_path);
    require_file(pred_path);
    auto read_labels = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw IoError("cannot open label file: " + path);
        }
        std::map<std::string, std::size_t> out;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            const json j = json::parse(line);
            out[j.at("doc_id").get<std::string>()] = j.at("label").get<std::size_t>();
        }
        return out;
    };
    const auto gold = read_labels(gold_path);
    const auto pred = read_labels(pred_path);

    std::vector<std::size_t> gold_v;
    std::vector<std::size_t> pred_v;
    for (const auto& [id, label] : gold) {
        const auto it = pred.find(id);
        if (it == pred.end()) {
            throw InvalidInput("eval-docs: no prediction for doc " + id);
        }
        gold_v.push_back(label);
        pred_v.push_back(it->second);
    }
    const double acc = dc_accuracy(pred_v, gold_v);
    if (!out_path.empty()) {
        json j = {{"accuracy", acc}, {"documents", gold_v.size()}};
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open result for writing: " + out_path);
        }
        out << j.dump(2) << "\n";
        RunRecord record;
        record.subcommand = "eval-docs";
        record.config = json::object();
        record.add_input(gold_path);
        record.add_input(pred_path);
        record.write(out_path + ".run.json");
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "accuracy=%.6f n=%zu", acc, gold_v.size());
    std::cout << buf << "\n";
    return kExitOk;
}

// --------------------------------------------------------- sample-episodes

struct EpisodesArgs {
    std::string corpus_path;
    std::string out_dir;
    std::size_t way_n = 4;
    std::size_t shot_k = 2;
    std::size_t episodes = 100;
    std::uint64_t seed = 0;
    std::size_t slack = 2;
    std::size_t query_cap = 64;
    std::string pool = "train";
    std::size_t train_count = 18;
    std::size_t test_count = 5;
    std::size_t min_occurrences = 10;
};

int run_sample_episodes(const EpisodesArgs& args) {
    require_file(args.corpus_path);
    const EntityCorpus corpus = read_entity_corpus(args.corpus_path);
    const EntityPools pools =
        split_pools(corpus, args.seed, args.train_count, args.test_count, args.min_occurrences);
    if (args.pool != "train" && args.pool != "test") {
        throw ConfigError("--pool must be 'train' or 'test'");
    }
    if (args.pool == "test" && args.way_n != pools.meta_test.size()) {
        throw ConfigError("meta-test episodes are fixed at N=" + std::to_string(pools.meta_test.size()) +
                          " (the full test pool); got --n " + std::to_string(args.way_n));
    }
    const auto& pool = args.pool == "train" ? pools.meta_train : pools.meta_test;

    fs::create_directories(args.out_dir);
    {
        json j = {{"meta_train", pools.meta_train}, {"meta_test", pools.meta_test}, {"disjoint", true}};
        std::ofstream out(args.out_dir + "/pools.json", std::ios::binary | std::ios::trunc);
        out << j.dump(2) << "\n";
    }
    EpisodeParams params;
    params.slack = args.slack;
    params.query_cap = args.query_cap;
    for (std::size_t e = 0; e < args.episodes; ++e) {
        const Episode ep = sample_episode(corpus, pool, args.way_n, args.shot_k, args.seed + 1 + e, params);
        char name[32];
        std::snprintf(name, sizeof(name), "episode_%04zu.json", e);
        std::ofstream out(args.out_dir + "/" + name, std::ios::binary | std::ios::trunc);
        out << episode_to_json(ep).dump(2) << "\n";
    }

    RunRecord record;
    record.subcommand = "sample-episodes";
    record.config = {{"n", args.way_n},         {"k", args.shot_k},
                     {"episodes", args.episodes}, {"seed", args.seed},
                     {"slack", args.slack},     {"query_cap", args.query_cap},
                     {"pool", args.pool},       {"train_count", args.train_count},
                     {"test_count", args.test_count}, {"min_occurrences", args.min_occurrences}};
    record.add_input(args.corpus_path);
    record.write(args.out_dir + "/run_record.json");
    std::cout << "episodes=" << args.episodes << " pool=" << args.pool << " -> " << args.out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- selfcheck

int run_selfcheck() {
    bool ok = true;
    auto line = [&](const std::string& name, bool pass, const std::string& detail) {
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
        ok = ok && pass;
    };

    {
        // FUNSD-style counts fixture
        std::map<std::string, PrfCounts> counts;
        counts["question"] = {946, 1115, 1070};
        counts["header"] = {67, 117, 119};
        counts["answer"] = {706, 854, 809};
        const PrfReport report = prf_from_counts(counts);
        char buf[96];
        std::snprintf(buf, sizeof(buf), "micro P=%.2f R=%.2f F1=%.2f", 100.0 * report.micro.precision,
                      100.0 * report.micro.recall, 100.0 * report.micro.f1);
        const bool pass = std::abs(100.0 * report.micro.precision - 82.41) <= 0.005 &&
                          std::abs(100.0 * report.micro.recall - 86.04) <= 0.005 &&
                          std::abs(100.0 * report.micro.f1 - 84.18) <= 0.005;
        line("entity-metric fixture", pass, buf);
    }
    {
        const MaskingPlan plan = plan_masking(100, 7);
        line("masking count", plan.masked.size() == 15,
             "n=100 -> |M|=" + std::to_string(plan.masked.size()));
    }
    {
        Matrix logits = Matrix::Zero(3, 4);
        std::vector<std::int32_t> targets = {0, 1, 2};
        const double loss = mmlm_loss(logits, targets);
        const bool pass = std::abs(loss - std::log(4.0)) < 1e-9;
        line("uniform-logit mlm", pass, "loss=" + std::to_string(loss));
    }
    {
        Matrix logits = Matrix::Zero(2, 6);
        std::vector<TokenTags> targets(2, TokenTags{});
        const double loss = tt_loss(logits, targets);
        const bool pass = std::abs(loss - 6.0 * std::log(2.0)) < 1e-9;
        line("zero-logit tagging", pass, "loss=" + std::to_string(loss));
    }
    {
        const auto vocab = Vocab::from_lines({"[PAD]", "[UNK]", "[CLS]", "[MASK]", "un", "##aff", "##able"});
        const auto pieces = wordpiece_tokenize("unaffable", vocab);
        const bool pass = pieces.size() == 3 && pieces[0].surface == "un" &&
                          pieces[1].surface == "##aff" && pieces[2].surface == "##able";
        line("wordpiece greedy match", pass, "pieces=" + std::to_string(pieces.size()));
    }
    {
        const BioSequence tags = bio_encode({{{"Q", 2, 4}}}, 6);
        const auto spans = bio_decode(tags);
        const bool pass = spans.size() == 1 && spans[0] == EntitySpan{"Q", 2, 4};
        line("bio round-trip", pass, "spans=" + std::to_string(spans.size()));
    }
    return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"docforge: document corpus construction and multimodal pretraining data toolkit"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);  // parse errors print full usage

    // synth
    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic store + OCR corpus");
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();
    synth->add_option("--store-size", synth_args.store_size, "number of store vectors");
    synth->add_option("--dim", synth_args.dim, "embedding dimension");
    synth->add_option("--docs", synth_args.docs, "number of OCR documents");
    synth->add_option("--dup-fraction", synth_args.dup_fraction, "fraction of duplicated vectors");
    auto* synth_seed = synth->add_option("--seed", synth_args.seed, "RNG seed");

    // build-corpus
    BuildCorpusArgs bc;
    std::string build_config_path;
    auto* build = app.add_subcommand("build-corpus", "retrieve, dedup and filter the corpus manifest");
    build->add_option("--config", build_config_path, "flat key=value config file");
    build->add_option("--ontology", bc.ontology_path, "ontology JSON")->required();
    build->add_option("--store", bc.store_path, "DNVS vector store")->required();
    build->add_option("--out", bc.out_dir, "output directory")->required();
    build->add_option("--ocr", bc.ocr_path, "OCR JSONL (synthetic OCR when omitted)");
    auto* build_k = build->add_option("--k", bc.config.k, "top-k per keyword");
    auto* build_probes = build->add_option("--probes", bc.config.probes, "probed cells per query");
    auto* build_cells = build->add_option("--num-cells", bc.config.num_cells, "partition cell count");
    auto* build_ndt =
        build->add_option("--near-dup-threshold", bc.config.near_dup_threshold, "dot threshold for near dups");
    auto* build_conf =
        build->add_option("--min-confidence", bc.config.thresholds.min_confidence, "OCR confidence floor");
    auto* build_tokens =
        build->add_option("--min-tokens", bc.config.thresholds.min_tokens, "minimum OCR token count");
    auto* build_alnum = build->add_option("--alnum-ratio-min", bc.config.thresholds.alnum_ratio_min,
                                          "alphanumeric ratio floor");
    auto* build_jobs = build->add_option("--jobs", bc.config.jobs, "worker threads");
    auto* build_seed = build->add_option("--seed", bc.config.seed, "RNG seed");

    // stats
    std::string stats_manifest;
    std::string stats_out;
    auto* stats = app.add_subcommand("stats", "per-keyword distance stats CSV from a manifest");
    stats->add_option("--manifest", stats_manifest, "manifest JSONL")->required();
    stats->add_option("--out", stats_out, "output CSV")->required();

    // tokenize
    TokenizeArgs tok;
    std::string tok_config_path;
    auto* tokenize = app.add_subcommand("tokenize", "multimodal tokenization of OCR documents");
    tokenize->add_option("--config", tok_config_path, "flat key=value config file");
    tokenize->add_option("--in", tok.in_path, "OCR JSONL")->required();
    tokenize->add_option("--vocab", tok.vocab_path, "wordpiece vocab")->required();
    tokenize->add_option("--out", tok.out_path, "output sequences JSONL")->required();
    auto* tok_r = tokenize->add_option("--r,--context-ratio", tok.params.context_ratio, "crop context ratio");
    auto* tok_p = tokenize->add_option("--P,--patch-size", tok.params.patch_size, "crop patch size");
    auto* tok_len = tokenize->add_option("--max-seq-len", tok.params.max_seq_len, "sequence length cap");
    auto* tok_jobs = tokenize->add_option("--jobs", tok.jobs, "worker threads");
    tokenize->add_option("--reading-order", tok.reading_order,
                         "'input' trusts the OCR order, 'sort' applies the line-cluster fallback");

    // tag
    std::string tag_in;
    std::string tag_out;
    auto* tag = app.add_subcommand("tag", "weak semantic tagging of OCR documents");
    tag->add_option("--in", tag_in, "OCR JSONL")->required();
    tag->add_option("--out", tag_out, "output tag spans JSONL")->required();

    // assemble-pretrain
    AssembleArgs asm_args;
    std::string asm_config_path;
    auto* assemble = app.add_subcommand("assemble-pretrain", "masking plans and MMLM/MCM/TT targets");
    assemble->add_option("--config", asm_config_path, "flat key=value config file");
    assemble->add_option("--in", asm_args.in_path, "token sequences JSONL")->required();
    assemble->add_option("--vocab", asm_args.vocab_path, "wordpiece vocab")->required();
    assemble->add_option("--out", asm_args.out_path, "output examples JSONL")->required();
    assemble->add_option("--tags", asm_args.tags_path, "weak tag spans JSONL");
    auto* asm_tt = assemble->add_option("--tt-fraction", asm_args.tt_fraction,
                                        "fraction of examples with TT targets");
    auto* asm_alpha = assemble->add_option("--alpha", asm_args.alpha, "crop-loss weight, recorded for trainers");
    auto* asm_beta = assemble->add_option("--beta", asm_args.beta, "tag-loss weight, recorded for trainers");
    auto* asm_seed = assemble->add_option("--seed", asm_args.seed, "base masking seed");

    // eval-entities
    std::string ee_gold;
    std::string ee_pred;
    std::string ee_out;
    auto* eval_entities = app.add_subcommand("eval-entities", "entity span precision/recall/F1");
    eval_entities->add_option("--gold", ee_gold, "gold spans JSONL")->required();
    eval_entities->add_option("--pred", ee_pred, "predicted spans JSONL")->required();
    eval_entities->add_option("--out", ee_out, "output report JSON")->required();

    // eval-docs
    std::string dc_gold;
    std::string dc_pred;
    std::string dc_out;
    auto* eval_docs = app.add_subcommand("eval-docs", "document classification accuracy");
    eval_docs->add_option("--gold", dc_gold, "gold labels JSONL")->required();
    eval_docs->add_option("--pred", dc_pred, "predicted labels JSONL")->required();
    eval_docs->add_option("--out", dc_out, "optional JSON result path");

    // sample-episodes
    EpisodesArgs ep;
    std::string ep_config_path;
    auto* episodes = app.add_subcommand("sample-episodes", "N-way K-shot episode construction");
    episodes->add_option("--config", ep_config_path, "flat key=value config file");
    episodes->add_option("--corpus", ep.corpus_path, "entity corpus JSONL")->required();
    episodes->add_option("--out", ep.out_dir, "output directory")->required();
    auto* ep_n = episodes->add_option("--n", ep.way_n, "ways (entity types per episode)");
    auto* ep_k = episodes->add_option("--k", ep.shot_k, "shots (occurrences per type)");
    auto* ep_count = episodes->add_option("--episodes", ep.episodes, "episode count");
    auto* ep_slack = episodes->add_option("--slack", ep.slack, "occurrence overflow tolerance");
    auto* ep_qcap = episodes->add_option("--query-cap", ep.query_cap, "query set size cap");
    episodes->add_option("--pool", ep.pool, "train or test pool");
    auto* ep_train = episodes->add_option("--train-count", ep.train_count, "meta-train pool size");
    auto* ep_test = episodes->add_option("--test-count", ep.test_count, "meta-test pool size");
    auto* ep_minocc = episodes->add_option("--min-occurrences", ep.min_occurrences, "type frequency filter");
    auto* ep_seed = episodes->add_option("--seed", ep.seed, "RNG seed");

    // selfcheck
    auto* selfcheck = app.add_subcommand("selfcheck", "run the bundled oracle fixtures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (synth->parsed()) {
            synth_args.seed = resolve_seed(synth_seed, FlatConfig{}, synth_args.seed);
            return run_synth(synth_args);
        }
        if (build->parsed()) {
            const FlatConfig cfg = FlatConfig::load(build_config_path);
            cfg.apply(build_k, "k", &bc.config.k);
            cfg.apply(build_probes, "probes", &bc.config.probes);
            cfg.apply(build_cells, "num_cells", &bc.config.num_cells);
            cfg.apply(build_ndt, "near_dup_threshold", &bc.config.near_dup_threshold);
            cfg.apply(build_conf, "min_confidence", &bc.config.thresholds.min_confidence);
            cfg.apply(build_tokens, "min_tokens", &bc.config.thresholds.min_tokens);
            cfg.apply(build_alnum, "alnum_ratio_min", &bc.config.thresholds.alnum_ratio_min);
            cfg.apply(build_jobs, "jobs", &bc.config.jobs);
            bc.config.seed = resolve_seed(build_seed, cfg, bc.config.seed);
            return run_build_corpus(bc);
        }
        if (stats->parsed()) {
            return run_stats(stats_manifest, stats_out);
        }
        if (tokenize->parsed()) {
            const FlatConfig cfg = FlatConfig::load(tok_config_path);
            cfg.apply(tok_r, "r", &tok.params.context_ratio);
            cfg.apply(tok_p, "P", &tok.params.patch_size);
            cfg.apply(tok_len, "max_seq_len", &tok.params.max_seq_len);
            cfg.apply(tok_jobs, "jobs", &tok.jobs);
            return run_tokenize(tok);
        }
        if (tag->parsed()) {
            return run_tag(tag_in, tag_out);
        }
        if (assemble->parsed()) {
            const FlatConfig cfg = FlatConfig::load(asm_config_path);
            cfg.apply(asm_tt, "tt_fraction", &asm_args.tt_fraction);
            cfg.apply(asm_alpha, "alpha", &asm_args.alpha);
            cfg.apply(asm_beta, "beta", &asm_args.beta);
            asm_args.seed = resolve_seed(asm_seed, cfg, asm_args.seed);
            return run_assemble(asm_args);
        }
        if (eval_entities->parsed()) {
            return run_eval_entities(ee_gold, ee_pred, ee_out);
        }
        if (eval_docs->parsed()) {
            return run_eval_docs(dc_gold, dc_pred, dc_out);
        }
        if (episodes->parsed()) {
            const FlatConfig cfg = FlatConfig::load(ep_config_path);
            cfg.apply(ep_n, "N", &ep.way_n);
            cfg.apply(ep_k, "K", &ep.shot_k);
            cfg.apply(ep_count, "episodes", &ep.episodes);
            cfg.apply(ep_slack, "slack", &ep.slack);
            cfg.apply(ep_qcap, "query_cap", &ep.query_cap);
            cfg.apply(ep_train, "train_count", &ep.train_count);
            cfg.apply(ep_test, "test_count", &ep.test_count);
            cfg.apply(ep_minocc, "min_occurrences", &ep.min_occurrences);
            ep.seed = resolve_seed(ep_seed, cfg, ep.seed);
            return run_sample_episodes(ep);
        }
        if (selfcheck->parsed()) {
            return run_selfcheck();
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitConfig;
}
