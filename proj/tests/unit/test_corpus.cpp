#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "factkb/corpus.hpp"
#include "factkb/errors.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace factkb;
using fixtures::kb_from;

namespace {

std::vector<std::string> surfaces(const Document& doc) {
  std::vector<std::string> out;
  for (const auto& u : doc.units) out.push_back(u.surface);
  return out;
}

std::vector<UnitKind> kinds(const Document& doc) {
  std::vector<UnitKind> out;
  for (const auto& u : doc.units) out.push_back(u.kind);
  return out;
}

std::set<oracle::StrTriple> triple_set(const std::string& tsv) {
  std::set<oracle::StrTriple> out;
  std::istringstream in(tsv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto a = line.find('\t');
    const auto b = line.find('\t', a + 1);
    out.emplace(line.substr(0, a), line.substr(a + 1, b - a - 1), line.substr(b + 1));
  }
  return out;
}

DescriptionStore descriptions(const KnowledgeBase& kb, const std::string& text) {
  std::istringstream in(text);
  return load_descriptions(in, kb);
}

SynthConfig config(std::uint64_t n, std::uint32_t k, std::uint64_t seed = 7) {
  SynthConfig cfg;
  cfg.n = n;
  cfg.k = k;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("entity wiki concatenates one-hop facts, each followed by [SEP]") {
  const auto kb = kb_from(fixtures::kKepler);
  const auto docs = synth_entity_wiki(kb, config(1, 1));
  REQUIRE(docs.size() == 1);
  const std::vector<std::string> expected = {"Johannes Kepler", "born in", "Italy", "[SEP]",
                                             "Johannes Kepler", "author of", "Astronomia nova",
                                             "[SEP]"};
  CHECK(surfaces(docs[0]) == expected);
  CHECK(kinds(docs[0]) == std::vector<UnitKind>{UnitKind::entity, UnitKind::relation,
                                                UnitKind::entity, UnitKind::separator,
                                                UnitKind::entity, UnitKind::relation,
                                                UnitKind::entity, UnitKind::separator});
  CHECK(docs[0].render() ==
        "Johannes Kepler born in Italy [SEP] Johannes Kepler author of Astronomia nova [SEP]");
  CHECK(docs[0].provenance == std::vector<TripleId>{0, 1});
  CHECK(docs[0].strategy == Strategy::entity_wiki);
}

TEST_CASE("entity wiki emits one document per entity with out-edges") {
  // 4 entities, 3 with out-edges
  const std::string tsv = "a\tr\tb\nb\tr\tc\nc\tr\ta\nc\ts\td\n";
  const auto kb = kb_from(tsv);
  std::size_t expected = 0;
  for (EntityId e = 0; e < kb.num_entities(); ++e) expected += kb.out_degree(e) >= 1;
  const auto docs = synth_entity_wiki(kb, config(1, 1));
  CHECK(docs.size() == expected);
  CHECK(docs.size() == 3);
  for (const auto& d : docs) {
    CHECK(d.units.front().surface != "d");  // the sink never starts a document
    CHECK(oracle::provenance_sound(d, triple_set(tsv)));
  }
}

TEST_CASE("entity wiki truncates at a fact boundary") {
  std::string tsv;
  for (int i = 0; i < 10; ++i) tsv += "hub\tr\tleaf" + std::to_string(i) + "\n";
  const auto kb = kb_from(tsv);
  auto cfg = config(1, 1);
  cfg.max_units_per_doc = 14;  // room for 3 facts of 4 units
  auto docs = synth_entity_wiki(kb, cfg);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].units.size() == 12);
  CHECK(docs[0].units.back().kind == UnitKind::separator);
  CHECK(docs[0].provenance.size() == 3);

  cfg.max_units_per_doc = 3;
  docs = synth_entity_wiki(kb, cfg);
  CHECK(docs[0].units.size() == 3);
}

TEST_CASE("entity wiki on an empty KB is empty") {
  CHECK(synth_entity_wiki(kb_from(""), config(1, 1)).empty());
}

TEST_CASE("evidence documents follow subject relation [MASK] description") {
  const auto kb = kb_from("A\tlikes\tB\n");
  const auto desc = descriptions(kb, "A\tA is a test.\n");
  const auto docs = synth_evidence(kb, desc, config(3, 1));
  REQUIRE(docs.size() == 3);
  for (const auto& d : docs) {
    CHECK(d.render_formula() == "A likes [MASK] A is a test.");
    CHECK(d.render() == "A likes B A is a test.");
    CHECK(d.units[2].forced_mask);
    CHECK(d.units[3].kind == UnitKind::auxiliary);
  }
}

TEST_CASE("evidence on the Clinton shape") {
  const auto kb = kb_from("Hillary Clinton\tparty affiliation\tDemocratic Party\n");
  const auto desc = descriptions(
      kb, "Hillary Clinton\tHillary Diane Rodham Clinton is an American politician, ...\n");
  const auto docs = synth_evidence(kb, desc, config(1, 1));
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].render_formula() ==
        "Hillary Clinton party affiliation [MASK] Hillary Diane Rodham Clinton is an American "
        "politician, ...");
}

TEST_CASE("evidence never samples a triple whose subject lacks a description") {
  const auto kb = kb_from("A\tr\tB\nC\tr\tD\nC\ts\tA\n");
  const auto desc = descriptions(kb, "A\tAbout A.\n");
  const auto eligible = eligible_evidence_triples(kb, desc);
  CHECK(eligible.size() == 1);
  const auto docs = synth_evidence(kb, desc, config(200, 1));
  CHECK(docs.size() == 200);
  for (const auto& d : docs) CHECK(d.units[0].surface == "A");
}

TEST_CASE("evidence without replacement is bounded by the eligible triples") {
  const auto kb = kb_from("A\tr\tB\nA\ts\tC\nB\tr\tC\nC\tr\tA\n");
  const auto desc = descriptions(kb, "A\tabout A\nB\tabout B\n");
  auto cfg = config(100, 1);
  cfg.sample_with_replacement = false;
  const auto docs = synth_evidence(kb, desc, cfg);
  CHECK(docs.size() == 3);
  CHECK(docs.size() <= kb.num_triples());
  std::set<TripleId> used;
  for (const auto& d : docs) used.insert(d.provenance.at(0));
  CHECK(used.size() == docs.size());
}

TEST_CASE("evidence with nothing eligible is empty; n < 1 is a config error") {
  const auto kb = kb_from("A\tr\tB\n");
  const auto desc = descriptions(kb, "B\tabout B\n");
  CHECK(synth_evidence(kb, desc, config(5, 1)).empty());
  CHECK_THROWS_AS(synth_evidence(kb, desc, config(0, 1)), ConfigError);
}

TEST_CASE("sample_walk honours the dead-end policy") {
  const auto kb = kb_from("A\tr\tB\n");
  Rng rng(1);
  WalkOptions truncate;
  const auto w = sample_walk(kb, *kb.find_entity("A"), 2, rng, truncate);
  CHECK(w.hops() == 1);
  WalkOptions resample{DeadEndPolicy::resample, false, 8};
  CHECK(sample_walk(kb, *kb.find_entity("A"), 2, rng, resample).hops() == 1);
  CHECK_THROWS_AS(sample_walk(kb, *kb.find_entity("B"), 2, rng), SynthesisError);
}

TEST_CASE("resample policy finds the full-length walk when one exists") {
  // From A: either the dead end D or the chain B -> C -> E.
  const auto kb = kb_from("A\tr\tD\nA\tr\tB\nB\tr\tC\nC\tr\tE\n");
  WalkOptions resample{DeadEndPolicy::resample, false, 64};
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(s);
    CHECK(sample_walk(kb, *kb.find_entity("A"), 3, rng, resample).hops() == 3);
  }
}

TEST_CASE("a cycle has exactly one walk") {
  const auto kb = kb_from("A\tr\tB\nB\tr\tC\nC\tr\tA\n");
  const auto doc_of = [&](std::uint64_t seed) {
    Rng rng(seed);
    return walk_document(kb, sample_walk(kb, *kb.find_entity("A"), 3, rng), "x", 0);
  };
  for (std::uint64_t s = 0; s < 20; ++s) CHECK(doc_of(s).render() == "A r B r C r A");
}

TEST_CASE("no_revisit rejects walks through visited entities") {
  const auto kb = kb_from("A\tr\tB\nB\tr\tA\nB\tr\tC\nC\tr\tD\n");
  WalkOptions options{DeadEndPolicy::truncate, true, 32};
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(s);
    const auto w = sample_walk(kb, *kb.find_entity("A"), 3, rng, options);
    std::set<EntityId> seen{w.start};
    for (const auto& step : w.steps) CHECK(seen.insert(step.target).second);
  }
}

TEST_CASE("K4 two-hop walks stay in the enumerated set") {
  const auto tsv = fixtures::complete_digraph(4);
  const auto kb = kb_from(tsv);
  const auto set = triple_set(tsv);
  const std::vector<oracle::StrTriple> triples(set.begin(), set.end());
  const auto all = oracle::enumerate_walks(triples, 2);
  CHECK(all.size() == 36);

  // From one start: 3 * 3 continuations.
  std::size_t from_n0 = 0;
  for (const auto& w : all) from_n0 += w.front() == "n0";
  CHECK(from_n0 == 9);

  const auto docs = synth_knowledge_walk(kb, config(2000, 2));
  for (const auto& d : docs) {
    CHECK(d.units.size() == 5);
    CHECK(all.contains(surfaces(d)));
  }
}

TEST_CASE("knowledge walk documents are verbalized walks without separators") {
  const std::string tsv =
      "University of Edinburgh\tlocated in\tScotland\nScotland\tlocated in\tEurope\n";
  const auto kb = kb_from(tsv);
  Rng rng(3);
  const auto walk = sample_walk(kb, *kb.find_entity("University of Edinburgh"), 2, rng);
  const auto doc = walk_document(kb, walk, "w", 0);
  CHECK(doc.render() == "University of Edinburgh located in Scotland located in Europe");
  CHECK(doc.provenance.size() == 2);

  SUBCASE("k = 1 is one verbalized triple") {
    const auto docs = synth_knowledge_walk(kb, config(20, 1));
    for (const auto& d : docs) {
      CHECK(d.units.size() == 3);
      CHECK(oracle::provenance_sound(d, triple_set(tsv)));
    }
  }
}

TEST_CASE("knowledge walk needs an entity with out-edges") {
  CHECK_THROWS_AS(synth_knowledge_walk(kb_from(""), config(1, 1)), SynthesisError);
}

TEST_CASE("walk start entities are never sinks") {
  const auto kb = kb_from("A\tr\tB\nB\tr\tC\n");
  for (const auto& d : synth_knowledge_walk(kb, config(200, 1))) {
    CHECK(d.units.front().surface != "C");
  }
}

TEST_CASE("one-hop walks on K4 hit every edge uniformly") {
  const auto kb = kb_from(fixtures::complete_digraph(4));
  const std::size_t n = 100000;
  const auto docs = synth_knowledge_walk(kb, config(n, 1, 11));
  std::map<std::string, std::size_t> counts;
  for (const auto& d : docs) ++counts[d.render()];
  CHECK(counts.size() == 12);
  const double p = 1.0 / 12.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (const auto& [edge, c] : counts) {
    CHECK(std::fabs(static_cast<double>(c) - n * p) <= 3 * sigma);
  }
}

TEST_CASE("synthesis is identical across worker counts") {
  const auto tsv = fixtures::random_kb(200, 5, 1500, 3);
  const auto kb = kb_from(tsv);
  std::string desc_text;
  for (int i = 0; i < 200; i += 3) desc_text += "entity " + std::to_string(i) + "\tabout\n";
  const auto desc = descriptions(kb, desc_text);
  auto cfg = config(3000, 4, 99);
  const auto wiki1 = synth_entity_wiki(kb, cfg);
  const auto ev1 = synth_evidence(kb, desc, cfg);
  const auto walk1 = synth_knowledge_walk(kb, cfg);
  cfg.workers = 4;
  CHECK(synth_entity_wiki(kb, cfg) == wiki1);
  CHECK(synth_evidence(kb, desc, cfg) == ev1);
  CHECK(synth_knowledge_walk(kb, cfg) == walk1);
  const auto triples = triple_set(tsv);
  for (const auto& d : walk1) CHECK(oracle::provenance_sound(d, triples));
  for (const auto& d : ev1) CHECK(oracle::provenance_sound(d, triples));
  for (const auto& d : wiki1) CHECK(oracle::provenance_sound(d, triples));
}

TEST_CASE("different seeds give different walk corpora") {
  const auto kb = kb_from(fixtures::random_kb(100, 3, 600, 5));
  CHECK(synth_knowledge_walk(kb, config(200, 3, 1)) != synth_knowledge_walk(kb, config(200, 3, 2)));
}

TEST_CASE("SynthConfig validation") {
  SynthConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.n == 100000);
  CHECK(cfg.k == 5);
  CHECK(cfg.mask_prob == doctest::Approx(0.15));
  cfg.k = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.mask_prob = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.max_units_per_doc = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
