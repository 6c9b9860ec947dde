#pragma once
// Factuality-pretraining document synthesis.
//
// Three strategies, each producing documents as ordered sequences of typed
// units (entity / relation / separator / auxiliary):
//
//   entity wiki     d = concat over out-edges (r, t) of e:  e r t [SEP]
//   evidence        d = s r [MASK] description(s)   for a sampled triple (s, r, o)
//   knowledge walk  d = e0 r01 e1 r12 e2 ... rK-1K eK   for a sampled K-hop walk
//
// Rendering joins unit surfaces with single spaces. Randomness for document i
// comes from derive_seed(seed, strategy, i), so the output does not depend on
// the number of workers.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "factkb/kb_store.hpp"
#include "factkb/rng.hpp"

namespace factkb {

inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kMaskToken = "[MASK]";

enum class UnitKind { entity, relation, separator, auxiliary };
enum class Strategy { entity_wiki, evidence, knowledge_walk };
enum class DeadEndPolicy { truncate, resample };

std::string_view to_string(UnitKind kind);
std::string_view to_string(Strategy strategy);
std::string_view to_string(DeadEndPolicy policy);
std::optional<Strategy> parse_strategy(std::string_view name);

struct Unit {
  UnitKind kind;
  std::string surface;
  // The evidence object slot: masked by construction, not by sampling.
  bool forced_mask = false;

  friend bool operator==(const Unit&, const Unit&) = default;
};

struct Document {
  std::string id;
  Strategy strategy;
  std::vector<Unit> units;
  std::vector<TripleId> provenance;
  std::uint64_t seed_offset = 0;

  // Unmasked text: unit surfaces joined by single spaces.
  std::string render() const;
  // Text with forced-mask units shown as [MASK]; this is the document exactly
  // as the strategy's formula writes it.
  std::string render_formula() const;
  // Distinct entity surfaces in order of first appearance.
  std::vector<std::string> entity_surfaces() const;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Walk {
  EntityId start = 0;
  std::vector<Edge> steps;

  std::size_t hops() const { return steps.size(); }
  friend bool operator==(const Walk&, const Walk&) = default;
};

struct WalkOptions {
  DeadEndPolicy dead_end_policy = DeadEndPolicy::truncate;
  // Reject walks that revisit an entity and resample them.
  bool no_revisit = false;
  // Whole-walk attempts before falling back to the longest partial walk.
  unsigned max_attempts = 8;
};

struct SynthConfig {
  std::uint64_t n = 100000;
  std::uint32_t k = 5;
  double mask_prob = 0.15;
  std::uint64_t seed = 0;
  std::size_t max_units_per_doc = 480;
  DeadEndPolicy dead_end_policy = DeadEndPolicy::truncate;
  bool sample_with_replacement = true;
  bool no_revisit = false;
  unsigned max_walk_attempts = 8;
  unsigned workers = 1;

  // Throws ConfigError on a violated invariant.
  void validate() const;
  WalkOptions walk_options() const {
    return WalkOptions{dead_end_policy, no_revisit, max_walk_attempts};
  }
};

// One document per entity with out-degree >= 1, in entity id order. cfg.n is
// not consulted: the corpus size is fixed by the KB.
std::vector<Document> synth_entity_wiki(const KnowledgeBase& kb, const SynthConfig& cfg);

// Triples whose subject has a description, in triple-id order.
std::vector<TripleId> eligible_evidence_triples(const KnowledgeBase& kb,
                                                const DescriptionStore& desc);

// cfg.n documents sampled uniformly from the eligible triples (fewer when
// sampling without replacement runs out). Empty when nothing is eligible.
std::vector<Document> synth_evidence(const KnowledgeBase& kb, const DescriptionStore& desc,
                                     const SynthConfig& cfg);

// Random walk of up to k hops from `start`, each step uniform over the
// current entity's out-edges. Throws SynthesisError if `start` is a sink.
Walk sample_walk(const KnowledgeBase& kb, EntityId start, std::uint32_t k, Rng& rng,
                 const WalkOptions& options = {});

Document walk_document(const KnowledgeBase& kb, const Walk& walk, std::string id,
                       std::uint64_t seed_offset);

// cfg.n verbalized walks with start entities uniform over entities with
// out-degree >= 1. Throws SynthesisError when no entity has out-edges.
std::vector<Document> synth_knowledge_walk(const KnowledgeBase& kb, const SynthConfig& cfg);

std::string document_id(Strategy strategy, std::uint64_t index);

}  // namespace factkb
