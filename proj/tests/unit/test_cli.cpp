#include <doctest.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <set>
#include <sstream>

#include "factkb/cli.hpp"
#include "support/fixtures.hpp"

using namespace factkb;
namespace cli = factkb::cli;
using fixtures::slurp;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "factkb");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void collect_flags(const CLI::App* app, std::set<std::string>& out) {
  for (const auto* opt : app->get_options()) {
    for (const auto& name : opt->get_lnames()) {
      if (name != "help") out.insert("--" + name);
    }
  }
  for (const auto* sub : app->get_subcommands([](const CLI::App*) { return true; })) {
    collect_flags(sub, out);
  }
}

std::string all_help(const CLI::App* app) {
  std::string text = app->help();
  for (const auto* sub : app->get_subcommands([](const CLI::App*) { return true; })) {
    text += all_help(sub);
  }
  return text;
}

const std::string kGold =
    R"({"id":"1","summary":"s","document":"d","label":"factual","subset":"a","human_score":1.0,"error_categories":[]})"
    "\n"
    R"({"id":"2","summary":"s","document":"d","label":"non_factual","subset":"a","human_score":0.0,"error_categories":["discourse"]})"
    "\n"
    R"({"id":"3","summary":"s","document":"d","label":"factual","subset":"b","human_score":0.75,"error_categories":[]})"
    "\n"
    R"({"id":"4","summary":"s","document":"d","label":"non_factual","subset":"b","human_score":0.25,"error_categories":["semantic_frame"]})"
    "\n";

const std::string kPerfectPred =
    R"({"id":"1","pred_label":"factual","score_factual":0.9})"
    "\n"
    R"({"id":"2","pred_label":"non_factual","score_factual":0.1})"
    "\n"
    R"({"id":"3","pred_label":"factual","score_factual":0.7})"
    "\n"
    R"({"id":"4","pred_label":"non_factual","score_factual":0.3})"
    "\n";

}  // namespace

TEST_CASE("every RunConfig flag is exposed and every exposed flag is listed") {
  cli::RunConfig config;
  const auto app = cli::build_app(config);
  std::set<std::string> exposed;
  collect_flags(app.get(), exposed);
  const std::set<std::string> listed(cli::run_config_flags().begin(),
                                     cli::run_config_flags().end());
  CHECK(exposed == listed);
  const auto help = all_help(app.get());
  for (const auto& flag : listed) {
    INFO(flag);
    CHECK(help.find(flag) != std::string::npos);
  }
}

TEST_CASE("exit codes") {
  fixtures::TempDir dir;
  const auto kb = dir.file("kb.tsv", fixtures::kKepler);
  CHECK(invoke({"--help"}).code == cli::kExitOk);
  CHECK(invoke({}).code == cli::kExitUsage);
  CHECK(invoke({"synth", "walk", "--kb", kb, "--k", "0"}).code == cli::kExitUsage);
  CHECK(invoke({"synth", "walk", "--kb", kb, "--mask-prob", "1.5"}).code == cli::kExitUsage);
  CHECK(invoke({"synth", "walk", "--kb", kb, "--dead-end", "explode"}).code == cli::kExitUsage);
  CHECK(invoke({"synth", "walk", "--bogus"}).code == cli::kExitUsage);
  CHECK(invoke({"synth", "evidence", "--kb", kb, "--descriptions", kb, "--with-replacement",
             "--without-replacement"})
            .code == cli::kExitUsage);
  const auto missing = invoke({"stats", "--kb", dir.path("nope.tsv")});
  CHECK(missing.code == cli::kExitDomainError);
  CHECK(missing.err.find("factkb: error:") != std::string::npos);
  const auto bad = dir.file("bad.tsv", "A\tr\n");
  CHECK(invoke({"stats", "--kb", bad}).code == cli::kExitDomainError);
}

TEST_CASE("stats prints KB summary JSON") {
  fixtures::TempDir dir;
  const auto kb = dir.file("kb.tsv", fixtures::complete_digraph(4));
  const auto r = invoke({"stats", "--kb", kb});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["num_entities"] == 4);
  CHECK(j["num_triples"] == 12);
  CHECK(j["out_degree_histogram"]["3"] == 4);
}

TEST_CASE("synth is deterministic for a seed and independent of workers") {
  fixtures::TempDir dir;
  const auto kb = dir.file("kb.tsv", fixtures::random_kb(80, 4, 500, 1));
  const std::vector<std::string> base = {"synth", "walk", "--kb", kb, "--n", "500",
                                         "--k", "3", "--seed", "42"};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  };
  const auto a = invoke(with({"--out", dir.path("a.jsonl")}));
  const auto b = invoke(with({"--out", dir.path("b.jsonl"), "--workers", "4"}));
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(dir.path("a.jsonl")) == slurp(dir.path("b.jsonl")));
  CHECK(slurp(dir.path("a.jsonl.meta.json")) == slurp(dir.path("b.jsonl.meta.json")));

  const auto meta = nlohmann::json::parse(slurp(dir.path("a.jsonl.meta.json")));
  CHECK(meta["config"]["seed"] == 42);
  CHECK(meta["config"]["k"] == 3);
  CHECK(meta["config"]["dead_end"] == "truncate");
  CHECK(meta["summary"]["documents"] == 500);

  const auto stdout_run = invoke(base);
  CHECK(stdout_run.out == slurp(dir.path("a.jsonl")));

  auto reseeded = base;
  reseeded.back() = "43";
  const auto other = invoke(reseeded);
  CHECK(other.out != stdout_run.out);
}

TEST_CASE("synth without a seed reports the one it drew") {
  fixtures::TempDir dir;
  const auto kb = dir.file("kb.tsv", fixtures::kKepler);
  const auto r = invoke({"synth", "entity-wiki", "--kb", kb});
  CHECK(r.code == 0);
  CHECK(r.err.find("entropy seed") != std::string::npos);
}

TEST_CASE("synth evidence and resample policy") {
  fixtures::TempDir dir;
  const auto kb = dir.file("kb.tsv", "A\tlikes\tB\nB\tlikes\tC\n");
  const auto desc = dir.file("desc.tsv", "A\tA is a test.\n");
  const auto r = invoke({"synth", "evidence", "--kb", kb, "--descriptions", desc, "--n", "2",
                      "--seed", "1", "--mask-prob", "0"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["masked_text"] == "A likes [MASK] A is a test.");
    CHECK(j["text"] == "A likes B A is a test.");
    ++count;
  }
  CHECK(count == 2);

  const auto empty = invoke({"synth", "evidence", "--kb", kb, "--descriptions",
                          dir.file("none.tsv", "C\tsink\n"), "--seed", "1"});
  CHECK(empty.code == 0);
  CHECK(empty.out.empty());
  CHECK(empty.err.find("warning") != std::string::npos);

  const auto walk = invoke({"synth", "walk", "--kb", kb, "--n", "3", "--k", "2", "--seed", "1",
                         "--dead-end", "resample", "--mask-prob", "0"});
  REQUIRE(walk.code == 0);
  CHECK(walk.out.find("\"text\":\"A likes B likes C\"") != std::string::npos);
}

TEST_CASE("config file supplies defaults that command-line flags override") {
  fixtures::TempDir dir;
  const auto kb = dir.file("kb.tsv", fixtures::random_kb(30, 3, 100, 2));
  const auto conf = dir.file("run.conf", "# walk settings\nn = 7\nk = 2\nseed = 5\n");
  const auto r = invoke({"synth", "walk", "--kb", kb, "--config", conf, "--n", "3"});
  REQUIRE(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
  const auto direct = invoke({"synth", "walk", "--kb", kb, "--n", "3", "--k", "2", "--seed", "5"});
  CHECK(r.out == direct.out);
  CHECK(invoke({"synth", "walk", "--kb", kb, "--config", dir.path("missing.conf")}).code ==
        cli::kExitUsage);
}

TEST_CASE("dataset prepare and verify") {
  fixtures::TempDir dir;
  const auto src = dir.file(
      "scifact.jsonl",
      R"({"id":"1","claim":"c","evidence":"e","label":"SUPPORT","split":"train"})"
      "\n"
      R"({"id":"2","claim":"c","evidence":"e","label":"NEI","split":"train"})"
      "\n"
      R"({"id":"3","claim":"c","evidence":"e","label":"CONTRADICT","split":"dev"})"
      "\n"
      R"({"id":"4","claim":"c","evidence":"e","label":"SUPPORT","split":"test"})"
      "\n");
  CHECK(invoke({"dataset", "prepare", "--format", "scifact", "--in", src}).code ==
        cli::kExitDomainError);
  for (const char* split : {"train", "dev", "test"}) {
    const auto r = invoke({"dataset", "prepare", "--format", "scifact", "--in", src, "--drop-nei",
                        "--split", split, "--out", dir.path(std::string(split) + ".jsonl")});
    REQUIRE(r.code == 0);
  }
  const auto meta = nlohmann::json::parse(slurp(dir.path("train.jsonl.meta.json")));
  CHECK(meta["nei_removed"] == 1);
  CHECK(meta["written"] == 1);

  auto verify = invoke({"dataset", "verify", "--train", dir.path("train.jsonl"), "--dev",
                     dir.path("dev.jsonl"), "--test", dir.path("test.jsonl"), "--expected",
                     "1,1,1"});
  CHECK(verify.code == 0);
  CHECK(nlohmann::json::parse(verify.out)["passed"] == true);

  verify = invoke({"dataset", "verify", "--train", dir.path("train.jsonl"), "--dev",
                dir.path("dev.jsonl"), "--test", dir.path("train.jsonl")});
  CHECK(verify.code == cli::kExitDomainError);
  CHECK(nlohmann::json::parse(verify.out)["overlaps"].size() == 1);
}

TEST_CASE("eval classify gives BACC 1 on perfect predictions") {
  fixtures::TempDir dir;
  const auto gold = dir.file("gold.jsonl", kGold);
  const auto pred = dir.file("pred.jsonl", kPerfectPred);
  const auto r = invoke({"eval", "classify", "--gold", gold, "--pred", pred, "--group-by", "subset"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["rows"][0]["group"] == "all");
  CHECK(j["rows"][0]["balanced_accuracy"] == 1.0);
  CHECK(j["rows"][0]["micro_f1"] == 1.0);
  CHECK(j["rows"].size() == 3);
  CHECK(r.err.find("BACC") != std::string::npos);

  const auto short_pred = dir.file("short.jsonl", R"({"id":"1","pred_label":"factual","score_factual":0.9})");
  CHECK(invoke({"eval", "classify", "--gold", gold, "--pred", short_pred}).code ==
        cli::kExitDomainError);
}

TEST_CASE("eval correlate with ablation") {
  fixtures::TempDir dir;
  const auto gold = dir.file("gold.jsonl", kGold);
  const auto pred = dir.file("pred.jsonl", kPerfectPred);
  const auto r = invoke({"eval", "correlate", "--gold", gold, "--pred", pred, "--ablation",
                      "--p-value", "permutation"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["spearman"]["coefficient"].get<double>() == doctest::Approx(1.0));
  CHECK(j["ablation"].size() == 3);
  CHECK(j["config"]["p_value"] == "permutation");

  const auto binary = invoke({"eval", "correlate", "--gold", gold, "--pred", pred, "--binary"});
  REQUIRE(binary.code == 0);
  CHECK(nlohmann::json::parse(binary.out)["config"]["score_source"] == "binary");
}
