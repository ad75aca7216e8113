#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "persum/util/io.hpp"

using namespace persum;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(PERSUM_SOURCE_DIR) / "tests" / "data";

fs::path work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "persum_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct Run {
    int code = -1;
    std::string err;
};

Run run(const std::string& args) {
    auto err = work_dir() / "stderr.txt";
    auto cmd = std::string(PERSUM_CLI_PATH) + " " + args + " 2>" + err.string() + " >/dev/null";
    int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = read_file(err);
    return r;
}

std::string data(const char* name) { return (kData / name).string(); }
std::string out(const std::string& name) { return (work_dir() / name).string(); }
std::string cfg() { return " --config " + data("config.json"); }

} // namespace

TEST_CASE("build-testset is reproducible byte for byte") {
    auto a = run("build-testset" + cfg() + " --annotations " + data("annotations.json") + " --out " + out("ts1.jsonl"));
    REQUIRE(a.code == 0);
    REQUIRE(run("build-testset" + cfg() + " --annotations " + data("annotations.json") + " --out " + out("ts2.jsonl")).code == 0);
    CHECK(read_file(out("ts1.jsonl")) == read_file(out("ts2.jsonl")));
    auto lines = read_jsonl(out("ts1.jsonl"));
    REQUIRE(lines.size() > 1);
    const auto& h = lines[0]["header"];
    CHECK(h["command"] == "build-testset");
    CHECK(h["seed"] == 7);
    CHECK(h["inputs"].contains("annotations"));
    CHECK(h["config"]["jobs"] == 2);
    CHECK(lines[1].contains("coverage"));

    REQUIRE(run("build-testset" + cfg() + " --seed 8 --annotations " + data("annotations.json") + " --out " + out("ts3.jsonl")).code == 0);
    CHECK(read_file(out("ts1.jsonl")) != read_file(out("ts3.jsonl")));
}

TEST_CASE("replay re-runs the recorded command") {
    REQUIRE(run("build-testset" + cfg() + " --annotations " + data("annotations.json") + " --out " + out("ts1.jsonl")).code == 0);
    auto r = run("replay --from " + out("ts1.jsonl") + " --out " + out("ts_replay.jsonl"));
    REQUIRE(r.code == 0);
    CHECK(read_file(out("ts1.jsonl")) == read_file(out("ts_replay.jsonl")));
}

TEST_CASE("eval-metrics scores the test set with configured metrics") {
    REQUIRE(run("build-testset" + cfg() + " --annotations " + data("annotations.json") + " --out " + out("ts1.jsonl")).code == 0);
    auto r = run("eval-metrics" + cfg() + " --testset " + out("ts1.jsonl") + " --annotations " + data("annotations.json") +
                 " --bootstrap 50 --out " + out("eval.json") + " --table " + out("eval.txt") + " --scores-out " + out("scores.jsonl"));
    REQUIRE(r.code == 0);
    auto report = read_json(out("eval.json"));
    CHECK(report["results"].size() == 10);
    CHECK(read_file(out("eval.txt")).find("rouge_l_r") != std::string::npos);
    auto again = run("eval-metrics" + cfg() + " --testset " + out("ts1.jsonl") + " --scores " + out("scores.jsonl") +
                     " --bootstrap 50 --out " + out("eval2.json"));
    REQUIRE(again.code == 0);
    CHECK(read_json(out("eval2.json"))["results"] == report["results"]);
}

TEST_CASE("generation, ranking and abstractiveness") {
    for (std::string method : {"zero_shot", "self_refine", "debate"}) {
        auto r = run("generate" + cfg() + " --pairs " + data("pairs.json") + " --method " + method + " --iterations 1 --agents 2 --rounds 1 --out " +
                     out("gen_" + method + ".jsonl") + " --transcripts " + out("tr_" + method + ".jsonl"));
        REQUIRE(r.code == 0);
    }
    auto recs = read_jsonl(out("gen_debate.jsonl"));
    REQUIRE(recs.size() == 5);
    CHECK(recs[1]["calls"] == 2 + 2 + 1);
    CHECK(recs[1]["summary"].get<std::string>().starts_with("The "));

    std::string all;
    for (std::string method : {"zero_shot", "self_refine", "debate"}) {
        auto lines = read_jsonl(out("gen_" + method + ".jsonl"));
        for (std::size_t i = 1; i < lines.size(); ++i) all += lines[i].dump() + "\n";
    }
    write_file_atomic(out("all_summaries.jsonl"), all);
    auto rank = run("rank-methods" + cfg() + " --summaries " + out("all_summaries.jsonl") + " --pairs " + data("pairs.json") +
                    " --metric native_rouge_proxy --bootstrap 50 --out " + out("rank.json"));
    REQUIRE(rank.code == 0);
    CHECK(read_json(out("rank.json"))["ranking"]["methods"].size() == 3);

    auto abs = run("abstractiveness" + cfg() + " --summaries " + out("all_summaries.jsonl") + " --pairs " + data("pairs.json") +
                   " --out " + out("abs.json"));
    REQUIRE(abs.code == 0);
    CHECK(read_json(out("abs.json")).dump().find("zero_shot") != std::string::npos);
}

TEST_CASE("rerank and preference export") {
    auto r = run("rerank" + cfg() + " --pairs " + data("pairs.json") + " --n 3 --out " + out("rerank.jsonl"));
    REQUIRE(r.code == 0);
    CHECK(read_jsonl(out("rerank.jsonl")).size() == 5);
    auto d = run("export-dpo" + cfg() + " --pairs " + data("pairs.json") + " --epochs 2 --candidates 3 --scorer rouge_proxy --margin 0 --out-dir " +
                 out("dpo"));
    REQUIRE(d.code == 0);
    CHECK(fs::exists(work_dir() / "dpo" / "pairs_epoch_00.jsonl"));
    CHECK(fs::exists(work_dir() / "dpo" / "pairs_epoch_01.jsonl"));
    auto halt = run("export-dpo" + cfg() + " --pairs " + data("pairs.json") + " --epochs 2 --schedule 0=gen --scorer rouge_proxy --out-dir " +
                    out("dpo_halt"));
    CHECK(halt.code != 0);
    CHECK(fs::exists(work_dir() / "dpo_halt" / "pairs_epoch_00.jsonl"));
}

TEST_CASE("agreement and human evaluation reports") {
    REQUIRE(run("iaa" + cfg() + " --annotations " + data("annotations.json") + " --trials 100 --out " + out("iaa.json")).code == 0);
    auto iaa = read_json(out("iaa.json"));
    CHECK(iaa.dump().find("baseline") != std::string::npos);
    REQUIRE(run("human-scores" + cfg() + " --records " + data("human_eval.json") + " --out " + out("human.json")).code == 0);
    CHECK(read_json(out("human.json")).dump().find("debate") != std::string::npos);
}

TEST_CASE("errors are structured JSON on stderr") {
    auto missing = run("build-testset" + cfg() + " --annotations /nonexistent.json --out " + out("x.jsonl"));
    CHECK(missing.code == 2);
    auto e = Json::parse(missing.err);
    CHECK(e["error"]["kind"] == "config");
    CHECK(e["error"]["command"] == "build-testset");

    auto usage = run("build-testset");
    CHECK(usage.code == 2);
    CHECK(Json::parse(usage.err)["error"]["kind"] == "usage");

    write_file_atomic(out("bad.json"), "{\"articles\": [{\"topic\": \"t\"}]}");
    auto bad = run("build-testset" + cfg() + " --annotations " + out("bad.json") + " --out " + out("x.jsonl"));
    CHECK(bad.code == 2);
    CHECK(Json::parse(bad.err)["error"]["kind"] == "parse");
    CHECK_FALSE(fs::exists(out("x.jsonl")));
}
