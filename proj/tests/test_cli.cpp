#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "docforge/runrecord.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DOCFORGE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string cli_output(const std::string& args) {
    const std::string tmp = "cli_out.txt";
    const std::string cmd = std::string(DOCFORGE_CLI_PATH) + " " + args + " > " + tmp + " 2>&1";
    const int status = std::system(cmd.c_str());
    (void)status;  // output is what matters here
    std::ifstream in(tmp);
    std::ostringstream ss;
    ss << in.rdbuf();
    fs::remove(tmp);
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("cli_test_tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all("cli_test_tmp"); }
    std::string operator/(const std::string& child) const { return (path / child).string(); }
};

}  // namespace

TEST_CASE("selfcheck passes") {
    CHECK(run_cli("selfcheck") == 0);
    const std::string out = cli_output("selfcheck");
    CHECK(out.find("82.41") != std::string::npos);
    CHECK(out.find("86.04") != std::string::npos);
    CHECK(out.find("84.18") != std::string::npos);
    CHECK(out.find("[FAIL]") == std::string::npos);
}

TEST_CASE("unknown flags and missing subcommands exit 2") {
    CHECK(run_cli("selfcheck --bogus-flag") == 2);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("no-such-subcommand") == 2);
    const std::string out = cli_output("--bogus");
    CHECK(out.find("Usage") != std::string::npos);
}

TEST_CASE("missing inputs exit 3") {
    TempDir dir("missing");
    CHECK(run_cli("stats --manifest nope.jsonl --out " + (dir / "s.csv")) == 3);
    CHECK(run_cli("build-corpus --ontology nope.json --store nope.dnvs --out " + (dir / "x")) == 3);
}

TEST_CASE("cli pipeline end-to-end on a tiny synthetic corpus") {
    TempDir dir("e2e");
    const std::string data = dir / "data";
    REQUIRE(run_cli("synth --out " + data + " --store-size 300 --dim 16 --docs 25 --seed 5") == 0);
    CHECK(fs::exists(data + "/store.dnvs"));
    CHECK(fs::exists(data + "/ocr.jsonl"));
    CHECK(fs::exists(data + "/vocab.txt"));
    CHECK(fs::exists(data + "/run_record.json"));

    const std::string ontology = std::string(DOCFORGE_DATA_DIR) + "/documentnet_ontology.json";
    const std::string corpus_a = dir / "corpus_a";
    const std::string corpus_b = dir / "corpus_b";
    const std::string base_flags = " --ontology " + ontology + " --store " + data +
                                   "/store.dnvs --ocr " + data + "/ocr.jsonl" +
                                   " --k 20 --num-cells 8 --probes 8 --seed 5";
    REQUIRE(run_cli("build-corpus --out " + corpus_a + base_flags) == 0);
    REQUIRE(run_cli("build-corpus --out " + corpus_b + base_flags + " --jobs 4") == 0);

    // byte-identical manifests regardless of the jobs count
    CHECK(docforge::sha256_file_hex(corpus_a + "/manifest.jsonl") ==
          docforge::sha256_file_hex(corpus_b + "/manifest.jsonl"));
    CHECK(docforge::sha256_file_hex(corpus_a + "/stats.csv") ==
          docforge::sha256_file_hex(corpus_b + "/stats.csv"));
    CHECK(fs::exists(corpus_a + "/run_record.json"));
    CHECK(fs::exists(corpus_a + "/filter_report.json"));

    {
        std::ifstream in(corpus_a + "/stats.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "keyword,mean,std,count");
    }

    REQUIRE(run_cli("stats --manifest " + corpus_a + "/manifest.jsonl --out " + (dir / "restats.csv")) == 0);
    CHECK(fs::exists(dir / "restats.csv"));
    CHECK(fs::exists(dir / "restats.csv.run.json"));

    const std::string seqs = dir / "seqs.jsonl";
    REQUIRE(run_cli("tokenize --in " + data + "/ocr.jsonl --vocab " + data + "/vocab.txt --out " +
                    seqs + " --patch-size 4 --jobs 3") == 0);
    CHECK(fs::exists(seqs));

    const std::string tags = dir / "tags.jsonl";
    REQUIRE(run_cli("tag --in " + data + "/ocr.jsonl --out " + tags) == 0);

    const std::string examples = dir / "examples.jsonl";
    REQUIRE(run_cli("assemble-pretrain --in " + seqs + " --vocab " + data + "/vocab.txt --tags " +
                    tags + " --seed 5 --tt-fraction 0.2 --out " + examples) == 0);
    CHECK(fs::exists(examples));
    CHECK(fs::exists(examples + ".run.json"));

    // tt-fraction without tags is a config error
    CHECK(run_cli("assemble-pretrain --in " + seqs + " --vocab " + data +
                  "/vocab.txt --seed 5 --tt-fraction 0.2 --out " + (dir / "x.jsonl")) == 2);

    const std::string episodes = dir / "episodes";
    REQUIRE(run_cli("sample-episodes --corpus " + data + "/entity_corpus.jsonl --n 4 --k 2 " +
                    "--episodes 3 --seed 9 --out " + episodes) == 0);
    CHECK(fs::exists(episodes + "/episode_0000.json"));
    CHECK(fs::exists(episodes + "/pools.json"));
}

TEST_CASE("eval subcommands") {
    TempDir dir("eval");
    {
        std::ofstream gold(dir / "gold.jsonl");
        gold << R"({"doc_id":"d1","spans":[{"type":"q","start":0,"end":1},{"type":"a","start":3,"end":3}]})"
             << "\n";
        gold << R"({"doc_id":"d2","spans":[{"type":"q","start":2,"end":2}]})" << "\n";
        std::ofstream pred(dir / "pred.jsonl");
        pred << R"({"doc_id":"d1","spans":[{"type":"q","start":0,"end":1}]})" << "\n";
        pred << R"({"doc_id":"d2","spans":[{"type":"q","start":2,"end":2},{"type":"a","start":0,"end":0}]})"
             << "\n";
    }
    REQUIRE(run_cli("eval-entities --gold " + (dir / "gold.jsonl") + " --pred " + (dir / "pred.jsonl") +
                    " --out " + (dir / "report.json")) == 0);
    std::ifstream in(dir / "report.json");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string report = ss.str();
    // tp=2 (q spans) of pred=3, gold=3
    CHECK(report.find("\"micro\"") != std::string::npos);
    CHECK(report.find("\"tp\": 2") != std::string::npos);

    {
        std::ofstream gold(dir / "labels_gold.jsonl");
        gold << R"({"doc_id":"d1","label":3})" << "\n";
        gold << R"({"doc_id":"d2","label":1})" << "\n";
        std::ofstream pred(dir / "labels_pred.jsonl");
        pred << R"({"doc_id":"d1","label":3})" << "\n";
        pred << R"({"doc_id":"d2","label":0})" << "\n";
    }
    const std::string out = cli_output("eval-docs --gold " + (dir / "labels_gold.jsonl") +
                                       " --pred " + (dir / "labels_pred.jsonl"));
    CHECK(out.find("accuracy=0.500000") != std::string::npos);
}

TEST_CASE("DOCFORGE_SEED env var is the fallback seed") {
    TempDir dir("envseed");
    const std::string cmd_env = "DOCFORGE_SEED=77 " + std::string(DOCFORGE_CLI_PATH) + " synth --out " +
                                (dir / "a") + " --store-size 50 --dim 8 --docs 2 > /dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd_env.c_str())) == 0);
    REQUIRE(run_cli("synth --out " + (dir / "b") + " --store-size 50 --dim 8 --docs 2 --seed 77") == 0);
    REQUIRE(run_cli("synth --out " + (dir / "c") + " --store-size 50 --dim 8 --docs 2 --seed 78") == 0);
    CHECK(docforge::sha256_file_hex(dir / "a/store.dnvs") == docforge::sha256_file_hex(dir / "b/store.dnvs"));
    CHECK(docforge::sha256_file_hex(dir / "a/store.dnvs") != docforge::sha256_file_hex(dir / "c/store.dnvs"));
}

TEST_CASE("flat key=value config file feeds build-corpus") {
    TempDir dir("config");
    const std::string data = dir / "data";
    REQUIRE(run_cli("synth --out " + data + " --store-size 120 --dim 8 --docs 5 --seed 3") == 0);
    {
        std::ofstream cfg(dir / "pipeline.cfg");
        cfg << "k=15\nnum_cells=4\nprobes=4\nseed=3  # pipeline defaults\n";
    }
    const std::string ontology = std::string(DOCFORGE_DATA_DIR) + "/documentnet_ontology.json";
    REQUIRE(run_cli("build-corpus --config " + (dir / "pipeline.cfg") + " --ontology " + ontology +
                    " --store " + data + "/store.dnvs --ocr " + data + "/ocr.jsonl --out " +
                    (dir / "out")) == 0);
    // flag overrides the config file value; both runs must succeed and differ in k
    REQUIRE(run_cli("build-corpus --config " + (dir / "pipeline.cfg") + " --ontology " + ontology +
                    " --store " + data + "/store.dnvs --ocr " + data + "/ocr.jsonl --k 7 --out " +
                    (dir / "out2")) == 0);
    std::ifstream a(dir / "out/run_record.json");
    std::ostringstream sa;
    sa << a.rdbuf();
    CHECK(sa.str().find("\"k\": 15") != std::string::npos);
    std::ifstream b(dir / "out2/run_record.json");
    std::ostringstream sb;
    sb << b.rdbuf();
    CHECK(sb.str().find("\"k\": 7") != std::string::npos);
}

TEST_CASE("meta-test episodes pin N to the test pool size") {
    TempDir dir("metatest");
    const std::string data = dir / "data";
    REQUIRE(run_cli("synth --out " + data + " --store-size 60 --dim 8 --docs 2 --seed 4") == 0);
    // entity corpus from synth has 30 types; 18 train + 5 test
    CHECK(run_cli("sample-episodes --corpus " + data + "/entity_corpus.jsonl --pool test --n 4 --k 1 "
                  "--episodes 1 --seed 2 --out " + (dir / "eps")) == 2);
    CHECK(run_cli("sample-episodes --corpus " + data + "/entity_corpus.jsonl --pool test --n 5 --k 1 "
                  "--episodes 2 --seed 2 --out " + (dir / "eps2")) == 0);
    CHECK(fs::exists(dir / "eps2/episode_0001.json"));
}

TEST_CASE("tokenize output is byte-identical across jobs counts") {
    TempDir dir("tokjobs");
    const std::string data = dir / "data";
    REQUIRE(run_cli("synth --out " + data + " --store-size 40 --dim 8 --docs 12 --seed 6") == 0);
    REQUIRE(run_cli("tokenize --in " + data + "/ocr.jsonl --vocab " + data +
                    "/vocab.txt --patch-size 4 --jobs 1 --out " + (dir / "a.jsonl")) == 0);
    REQUIRE(run_cli("tokenize --in " + data + "/ocr.jsonl --vocab " + data +
                    "/vocab.txt --patch-size 4 --jobs 4 --out " + (dir / "b.jsonl")) == 0);
    CHECK(docforge::sha256_file_hex(dir / "a.jsonl") == docforge::sha256_file_hex(dir / "b.jsonl"));
}
