#pragma once
// Immutable knowledge base: KB = (entities, relations, adjacency, names).
//
// Entities and relations are interned to dense ids in order of first
// appearance in the triples file. Adjacency is stored in CSR form: the
// out-edges of entity e are edges()[offsets[e] .. offsets[e+1]), sorted by
// (relation, target). An edge's position in that array is its triple id.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace factkb {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using TripleId = std::uint64_t;

struct Edge {
  RelationId relation;
  EntityId target;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Triple {
  EntityId subject;
  RelationId relation;
  EntityId object;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct LoadOptions {
  // Materialize (o, "inverse " + r, s) for every stored (s, r, o).
  bool add_inverse = false;
  // Name used in parse error messages.
  std::string source_name = "<triples>";
};

struct KbStats {
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;
  std::size_t num_triples = 0;
  std::size_t num_entities_with_out_edges = 0;
  // out-degree -> number of entities with that out-degree
  std::map<std::size_t, std::size_t> out_degree_histogram;
};

class KnowledgeBase {
 public:
  KnowledgeBase() : offsets_{0} {}

  std::size_t num_entities() const { return entity_names_.size(); }
  std::size_t num_relations() const { return relation_names_.size(); }
  std::size_t num_triples() const { return edges_.size(); }

  // Sorted out-edges of `entity`. Throws LookupError when out of range.
  std::span<const Edge> out_neighborhood(EntityId entity) const;
  std::size_t out_degree(EntityId entity) const;

  // Triple id of the first out-edge of `entity`; out_neighborhood(e)[i] has
  // id first_triple_id(e) + i.
  TripleId first_triple_id(EntityId entity) const;
  Triple triple(TripleId id) const;

  const std::string& entity_name(EntityId entity) const;
  const std::string& relation_name(RelationId relation) const;
  std::optional<EntityId> find_entity(std::string_view name) const;
  std::optional<RelationId> find_relation(std::string_view name) const;

  // True iff (subject, relation, object) is a stored triple.
  bool has_edge(EntityId subject, RelationId relation, EntityId object) const;
  std::optional<TripleId> find_triple(EntityId subject, RelationId relation,
                                      EntityId object) const;

  // Entities with out-degree >= 1, ascending.
  std::vector<EntityId> entities_with_out_edges() const;

  std::span<const Edge> edges() const { return edges_; }
  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const std::string> entity_names() const { return entity_names_; }
  std::span<const std::string> relation_names() const { return relation_names_; }

  // Builds a KB from already-interned names and triples. Duplicate triples are
  // collapsed; ids must be in range (IntegrityError otherwise).
  static KnowledgeBase from_triples(std::vector<std::string> entity_names,
                                    std::vector<std::string> relation_names,
                                    std::vector<Triple> triples);

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

 private:
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
  std::vector<std::size_t> offsets_;
  std::vector<Edge> edges_;
};

// Parses `subject<TAB>relation<TAB>object` lines. Blank lines and lines whose
// first character is '#' are skipped. Fields are trimmed of surrounding
// whitespace and must be non-empty.
KnowledgeBase load_kb(std::istream& in, const LoadOptions& options = {});
KnowledgeBase load_kb_file(const std::string& path, const LoadOptions& options = {});

KbStats kb_stats(const KnowledgeBase& kb);

// Writes every stored triple back as a TSV line, in triple-id order.
void write_triples(const KnowledgeBase& kb, std::ostream& out);

// Entity descriptions (the auxiliary paragraph used by evidence documents).
class DescriptionStore {
 public:
  std::size_t size() const { return paragraphs_.size(); }
  bool contains(EntityId entity) const { return paragraphs_.contains(entity); }
  const std::string* find(EntityId entity) const;

  // Lines whose entity is not in the KB.
  std::size_t skipped_unknown() const { return skipped_unknown_; }
  // Repeated lines for an entity already described; the first one is kept.
  std::size_t skipped_duplicates() const { return skipped_duplicates_; }

 private:
  friend DescriptionStore load_descriptions(std::istream&, const KnowledgeBase&,
                                            const std::string&);
  std::unordered_map<EntityId, std::string> paragraphs_;
  std::size_t skipped_unknown_ = 0;
  std::size_t skipped_duplicates_ = 0;
};

// Parses `entity<TAB>paragraph` lines; the paragraph is everything after the
// first tab.
DescriptionStore load_descriptions(std::istream& in, const KnowledgeBase& kb,
                                   const std::string& source_name = "<descriptions>");
DescriptionStore load_descriptions_file(const std::string& path, const KnowledgeBase& kb);

}  // namespace factkb
