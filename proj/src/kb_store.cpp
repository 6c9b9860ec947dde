#include "factkb/kb_store.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "factkb/errors.hpp"
#include "text_util.hpp"

namespace factkb {

namespace {

class Interner {
 public:
  std::uint32_t intern(const std::string& name) {
    auto [it, inserted] = index_.try_emplace(name, static_cast<std::uint32_t>(names_.size()));
    if (inserted) names_.push_back(name);
    return it->second;
  }
  std::vector<std::string> release() { return std::move(names_); }
  std::size_t size() const { return names_.size(); }
  const std::string& name(std::uint32_t id) const { return names_[id]; }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> names_;
};

}  // namespace

std::span<const Edge> KnowledgeBase::out_neighborhood(EntityId entity) const {
  if (entity >= num_entities()) {
    throw LookupError("entity id " + std::to_string(entity) + " out of range (|E| = " +
                      std::to_string(num_entities()) + ")");
  }
  return std::span<const Edge>(edges_).subspan(offsets_[entity],
                                                offsets_[entity + 1] - offsets_[entity]);
}

std::size_t KnowledgeBase::out_degree(EntityId entity) const {
  return out_neighborhood(entity).size();
}

TripleId KnowledgeBase::first_triple_id(EntityId entity) const {
  if (entity >= num_entities()) {
    throw LookupError("entity id " + std::to_string(entity) + " out of range");
  }
  return offsets_[entity];
}

Triple KnowledgeBase::triple(TripleId id) const {
  if (id >= edges_.size()) {
    throw LookupError("triple id " + std::to_string(id) + " out of range");
  }
  // offsets_ is non-decreasing; the owning subject is the last entity whose
  // first edge is <= id.
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), static_cast<std::size_t>(id));
  const auto subject = static_cast<EntityId>(std::distance(offsets_.begin(), it) - 1);
  return Triple{subject, edges_[id].relation, edges_[id].target};
}

const std::string& KnowledgeBase::entity_name(EntityId entity) const {
  if (entity >= num_entities()) {
    throw LookupError("entity id " + std::to_string(entity) + " out of range");
  }
  return entity_names_[entity];
}

const std::string& KnowledgeBase::relation_name(RelationId relation) const {
  if (relation >= num_relations()) {
    throw LookupError("relation id " + std::to_string(relation) + " out of range");
  }
  return relation_names_[relation];
}

std::optional<EntityId> KnowledgeBase::find_entity(std::string_view name) const {
  auto it = entity_index_.find(std::string(name));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeBase::find_relation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<TripleId> KnowledgeBase::find_triple(EntityId subject, RelationId relation,
                                                   EntityId object) const {
  if (subject >= num_entities()) return std::nullopt;
  auto edges = out_neighborhood(subject);
  const Edge key{relation, object};
  auto it = std::lower_bound(edges.begin(), edges.end(), key);
  if (it == edges.end() || *it != key) return std::nullopt;
  return offsets_[subject] + static_cast<TripleId>(std::distance(edges.begin(), it));
}

bool KnowledgeBase::has_edge(EntityId subject, RelationId relation, EntityId object) const {
  return find_triple(subject, relation, object).has_value();
}

std::vector<EntityId> KnowledgeBase::entities_with_out_edges() const {
  std::vector<EntityId> out;
  for (EntityId e = 0; e < num_entities(); ++e) {
    if (offsets_[e + 1] > offsets_[e]) out.push_back(e);
  }
  return out;
}

KnowledgeBase KnowledgeBase::from_triples(std::vector<std::string> entity_names,
                                          std::vector<std::string> relation_names,
                                          std::vector<Triple> triples) {
  KnowledgeBase kb;
  kb.entity_names_ = std::move(entity_names);
  kb.relation_names_ = std::move(relation_names);
  for (std::size_t i = 0; i < kb.entity_names_.size(); ++i) {
    if (text::trim(kb.entity_names_[i]).empty()) {
      throw IntegrityError("entity " + std::to_string(i) + " has an empty name");
    }
    if (!kb.entity_index_.try_emplace(kb.entity_names_[i], static_cast<EntityId>(i)).second) {
      throw IntegrityError("duplicate entity name '" + kb.entity_names_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < kb.relation_names_.size(); ++i) {
    if (text::trim(kb.relation_names_[i]).empty()) {
      throw IntegrityError("relation " + std::to_string(i) + " has an empty name");
    }
    if (!kb.relation_index_.try_emplace(kb.relation_names_[i], static_cast<RelationId>(i))
             .second) {
      throw IntegrityError("duplicate relation name '" + kb.relation_names_[i] + "'");
    }
  }
  for (const auto& t : triples) {
    if (t.subject >= kb.entity_names_.size() || t.object >= kb.entity_names_.size() ||
        t.relation >= kb.relation_names_.size()) {
      throw IntegrityError("triple references an out-of-range id");
    }
  }

  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());

  kb.offsets_.assign(kb.entity_names_.size() + 1, 0);
  for (const auto& t : triples) ++kb.offsets_[t.subject + 1];
  for (std::size_t e = 0; e < kb.entity_names_.size(); ++e) kb.offsets_[e + 1] += kb.offsets_[e];
  kb.edges_.reserve(triples.size());
  for (const auto& t : triples) kb.edges_.push_back(Edge{t.relation, t.object});
  return kb;
}

KnowledgeBase load_kb(std::istream& in, const LoadOptions& options) {
  Interner entities;
  Interner relations;
  std::vector<Triple> triples;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    text::strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    if (text::trim(line).empty()) continue;

    const auto fields = text::split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(options.source_name, line_no,
                       "expected 3 tab-separated fields, found " + std::to_string(fields.size()));
    }
    std::string names[3];
    for (int i = 0; i < 3; ++i) {
      names[i] = std::string(text::trim(fields[i]));
      if (names[i].empty()) {
        static constexpr const char* kField[] = {"subject", "relation", "object"};
        throw ParseError(options.source_name, line_no, std::string("empty ") + kField[i]);
      }
    }
    const EntityId s = entities.intern(names[0]);
    const RelationId r = relations.intern(names[1]);
    const EntityId o = entities.intern(names[2]);
    triples.push_back(Triple{s, r, o});
  }
  if (in.bad()) throw Error("I/O error reading " + options.source_name);

  if (options.add_inverse) {
    // Inverse relations are interned after all forward relations, in forward
    // relation id order.
    const auto forward_relations = relations.size();
    std::vector<RelationId> inverse_of(forward_relations);
    for (RelationId r = 0; r < forward_relations; ++r) {
      inverse_of[r] = relations.intern("inverse " + relations.name(r));
    }
    const auto forward_count = triples.size();
    triples.reserve(forward_count * 2);
    for (std::size_t i = 0; i < forward_count; ++i) {
      const auto t = triples[i];
      triples.push_back(Triple{t.object, inverse_of[t.relation], t.subject});
    }
  }

  return KnowledgeBase::from_triples(entities.release(), relations.release(), std::move(triples));
}

KnowledgeBase load_kb_file(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open triples file " + path);
  LoadOptions named = options;
  named.source_name = path;
  return load_kb(in, named);
}

KbStats kb_stats(const KnowledgeBase& kb) {
  KbStats stats;
  stats.num_entities = kb.num_entities();
  stats.num_relations = kb.num_relations();
  stats.num_triples = kb.num_triples();
  const auto offsets = kb.offsets();
  for (std::size_t e = 0; e < kb.num_entities(); ++e) {
    const auto degree = offsets[e + 1] - offsets[e];
    ++stats.out_degree_histogram[degree];
    if (degree > 0) ++stats.num_entities_with_out_edges;
  }
  return stats;
}

void write_triples(const KnowledgeBase& kb, std::ostream& out) {
  for (TripleId id = 0; id < kb.num_triples(); ++id) {
    const auto t = kb.triple(id);
    out << kb.entity_name(t.subject) << '\t' << kb.relation_name(t.relation) << '\t'
        << kb.entity_name(t.object) << '\n';
  }
}

const std::string* DescriptionStore::find(EntityId entity) const {
  auto it = paragraphs_.find(entity);
  return it == paragraphs_.end() ? nullptr : &it->second;
}

DescriptionStore load_descriptions(std::istream& in, const KnowledgeBase& kb,
                                   const std::string& source_name) {
  DescriptionStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    text::strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    if (text::trim(line).empty()) continue;

    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(source_name, line_no, "expected entity<TAB>paragraph");
    }
    const auto name = text::trim(std::string_view(line).substr(0, tab));
    const auto paragraph = text::trim(std::string_view(line).substr(tab + 1));
    if (name.empty()) throw ParseError(source_name, line_no, "empty entity name");
    if (paragraph.empty()) throw ParseError(source_name, line_no, "empty paragraph");

    const auto entity = kb.find_entity(name);
    if (!entity) {
      ++store.skipped_unknown_;
      continue;
    }
    if (!store.paragraphs_.try_emplace(*entity, std::string(paragraph)).second) {
      ++store.skipped_duplicates_;
    }
  }
  if (in.bad()) throw Error("I/O error reading " + source_name);
  return store;
}

DescriptionStore load_descriptions_file(const std::string& path, const KnowledgeBase& kb) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open descriptions file " + path);
  return load_descriptions(in, kb, path);
}

}  // namespace factkb
