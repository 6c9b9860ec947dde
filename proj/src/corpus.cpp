#include "factkb/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "factkb/errors.hpp"
#include "parallel.hpp"

namespace factkb {

std::string_view to_string(UnitKind kind) {
  switch (kind) {
    case UnitKind::entity: return "entity";
    case UnitKind::relation: return "relation";
    case UnitKind::separator: return "separator";
    case UnitKind::auxiliary: return "auxiliary";
  }
  return "?";
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::entity_wiki: return "entity_wiki";
    case Strategy::evidence: return "evidence";
    case Strategy::knowledge_walk: return "knowledge_walk";
  }
  return "?";
}

std::string_view to_string(DeadEndPolicy policy) {
  return policy == DeadEndPolicy::truncate ? "truncate" : "resample";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "entity_wiki") return Strategy::entity_wiki;
  if (name == "evidence") return Strategy::evidence;
  if (name == "knowledge_walk") return Strategy::knowledge_walk;
  return std::nullopt;
}

namespace {

std::string join_units(const std::vector<Unit>& units, bool show_forced_masks) {
  std::string out;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i) out.push_back(' ');
    if (show_forced_masks && units[i].forced_mask) {
      out.append(kMaskToken);
    } else {
      out.append(units[i].surface);
    }
  }
  return out;
}

}  // namespace

std::string Document::render() const { return join_units(units, false); }

std::string Document::render_formula() const { return join_units(units, true); }

std::vector<std::string> Document::entity_surfaces() const {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (const auto& unit : units) {
    if (unit.kind == UnitKind::entity && seen.insert(unit.surface).second) {
      out.push_back(unit.surface);
    }
  }
  return out;
}

void SynthConfig::validate() const {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(mask_prob >= 0.0 && mask_prob <= 1.0)) {
    throw ConfigError("mask probability must lie in [0, 1]");
  }
  if (max_units_per_doc < 3) throw ConfigError("max_units_per_doc must be >= 3");
  if (max_walk_attempts < 1) throw ConfigError("max_walk_attempts must be >= 1");
}

std::string document_id(Strategy strategy, std::uint64_t index) {
  return std::string(to_string(strategy)) + "-" + std::to_string(index);
}

std::vector<Document> synth_entity_wiki(const KnowledgeBase& kb, const SynthConfig& cfg) {
  cfg.validate();
  const auto subjects = kb.entities_with_out_edges();
  std::vector<Document> docs(subjects.size());

  detail::parallel_for(subjects.size(), cfg.workers, [&](std::size_t i) {
    const EntityId e = subjects[i];
    Document& doc = docs[i];
    doc.id = document_id(Strategy::entity_wiki, i);
    doc.strategy = Strategy::entity_wiki;
    doc.seed_offset = i;

    const auto& subject = kb.entity_name(e);
    const auto edges = kb.out_neighborhood(e);
    const TripleId first = kb.first_triple_id(e);
    for (std::size_t j = 0; j < edges.size(); ++j) {
      // Truncate at a fact boundary.
      if (doc.units.size() + 4 > cfg.max_units_per_doc) {
        if (doc.units.empty()) {
          // Not even one full fact fits; keep it without its separator.
          doc.units.push_back({UnitKind::entity, subject});
          doc.units.push_back({UnitKind::relation, kb.relation_name(edges[j].relation)});
          doc.units.push_back({UnitKind::entity, kb.entity_name(edges[j].target)});
          doc.provenance.push_back(first + j);
        }
        break;
      }
      doc.units.push_back({UnitKind::entity, subject});
      doc.units.push_back({UnitKind::relation, kb.relation_name(edges[j].relation)});
      doc.units.push_back({UnitKind::entity, kb.entity_name(edges[j].target)});
      doc.units.push_back({UnitKind::separator, std::string(kSepToken)});
      doc.provenance.push_back(first + j);
    }
  });
  return docs;
}

std::vector<TripleId> eligible_evidence_triples(const KnowledgeBase& kb,
                                                const DescriptionStore& desc) {
  std::vector<TripleId> eligible;
  const auto offsets = kb.offsets();
  for (EntityId e = 0; e < kb.num_entities(); ++e) {
    if (!desc.contains(e)) continue;
    for (auto id = offsets[e]; id < offsets[e + 1]; ++id) eligible.push_back(id);
  }
  return eligible;
}

std::vector<Document> synth_evidence(const KnowledgeBase& kb, const DescriptionStore& desc,
                                     const SynthConfig& cfg) {
  cfg.validate();
  const auto eligible = eligible_evidence_triples(kb, desc);
  if (eligible.empty()) return {};

  std::vector<TripleId> chosen;
  if (cfg.sample_with_replacement) {
    chosen.resize(cfg.n);
    detail::parallel_for(chosen.size(), cfg.workers, [&](std::size_t i) {
      Rng rng(derive_seed(cfg.seed, "evidence", i));
      chosen[i] = eligible[rng.uniform_index(eligible.size())];
    });
  } else {
    // Partial Fisher-Yates over the eligible set from a single stream.
    std::vector<TripleId> pool = eligible;
    const auto m = static_cast<std::size_t>(std::min<std::uint64_t>(cfg.n, pool.size()));
    Rng rng(derive_seed(cfg.seed, "evidence-without-replacement", 0));
    for (std::size_t i = 0; i < m; ++i) {
      const auto j = i + rng.uniform_index(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    chosen = std::move(pool);
  }

  std::vector<Document> docs(chosen.size());
  detail::parallel_for(chosen.size(), cfg.workers, [&](std::size_t i) {
    const Triple t = kb.triple(chosen[i]);
    Document& doc = docs[i];
    doc.id = document_id(Strategy::evidence, i);
    doc.strategy = Strategy::evidence;
    doc.seed_offset = i;
    doc.units.push_back({UnitKind::entity, kb.entity_name(t.subject)});
    doc.units.push_back({UnitKind::relation, kb.relation_name(t.relation)});
    doc.units.push_back({UnitKind::entity, kb.entity_name(t.object), true});
    doc.units.push_back({UnitKind::auxiliary, *desc.find(t.subject)});
    doc.provenance.push_back(chosen[i]);
  });
  return docs;
}

namespace {

enum class WalkStop { complete, dead_end, revisit };

WalkStop attempt_walk(const KnowledgeBase& kb, EntityId start, std::uint32_t k, Rng& rng,
                      bool no_revisit, Walk& walk) {
  walk.start = start;
  walk.steps.clear();
  EntityId current = start;
  while (walk.steps.size() < k) {
    const auto edges = kb.out_neighborhood(current);
    if (edges.empty()) return WalkStop::dead_end;
    const Edge step = edges[rng.uniform_index(edges.size())];
    if (no_revisit) {
      const bool seen = step.target == start ||
                        std::any_of(walk.steps.begin(), walk.steps.end(),
                                    [&](const Edge& s) { return s.target == step.target; });
      if (seen) return WalkStop::revisit;
    }
    walk.steps.push_back(step);
    current = step.target;
  }
  return WalkStop::complete;
}

}  // namespace

Walk sample_walk(const KnowledgeBase& kb, EntityId start, std::uint32_t k, Rng& rng,
                 const WalkOptions& options) {
  if (kb.out_degree(start) == 0) {
    throw SynthesisError("walk start '" + kb.entity_name(start) + "' has no out-edges");
  }
  Walk best;
  Walk walk;
  const unsigned attempts = std::max(1U, options.max_attempts);
  for (unsigned attempt = 0; attempt < attempts; ++attempt) {
    const auto stop = attempt_walk(kb, start, k, rng, options.no_revisit, walk);
    if (stop == WalkStop::complete) return walk;
    if (attempt == 0 || walk.hops() > best.hops()) best = walk;
    if (stop == WalkStop::dead_end && options.dead_end_policy == DeadEndPolicy::truncate) {
      return walk;
    }
  }
  return best;
}

Document walk_document(const KnowledgeBase& kb, const Walk& walk, std::string id,
                       std::uint64_t seed_offset) {
  Document doc;
  doc.id = std::move(id);
  doc.strategy = Strategy::knowledge_walk;
  doc.seed_offset = seed_offset;
  doc.units.reserve(1 + 2 * walk.hops());
  doc.units.push_back({UnitKind::entity, kb.entity_name(walk.start)});
  EntityId current = walk.start;
  for (const auto& step : walk.steps) {
    doc.units.push_back({UnitKind::relation, kb.relation_name(step.relation)});
    doc.units.push_back({UnitKind::entity, kb.entity_name(step.target)});
    const auto id_of = kb.find_triple(current, step.relation, step.target);
    if (!id_of) throw IntegrityError("walk step is not a stored edge");
    doc.provenance.push_back(*id_of);
    current = step.target;
  }
  return doc;
}

std::vector<Document> synth_knowledge_walk(const KnowledgeBase& kb, const SynthConfig& cfg) {
  cfg.validate();
  const auto starts = kb.entities_with_out_edges();
  if (starts.empty()) throw SynthesisError("no entity has out-edges; cannot sample walks");

  const auto options = cfg.walk_options();
  std::vector<Document> docs(cfg.n);
  detail::parallel_for(docs.size(), cfg.workers, [&](std::size_t i) {
    Rng rng(derive_seed(cfg.seed, "knowledge_walk", i));
    const EntityId start = starts[rng.uniform_index(starts.size())];
    const Walk walk = sample_walk(kb, start, cfg.k, rng, options);
    docs[i] = walk_document(kb, walk, document_id(Strategy::knowledge_walk, i), i);
  });
  return docs;
}

}  // namespace factkb
