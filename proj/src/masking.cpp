#include "factkb/masking.hpp"

#include <nlohmann/json.hpp>

#include "factkb/errors.hpp"
#include "parallel.hpp"
#include "text_util.hpp"

namespace factkb {

using ordered_json = nlohmann::ordered_json;

bool is_maskable(const Unit& unit) {
  return !unit.forced_mask && (unit.kind == UnitKind::entity || unit.kind == UnitKind::relation);
}

MaskedDocument mask_document(const Document& doc, double p, Rng& rng,
                             const MaskOptions& options) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("mask probability must lie in [0, 1]");

  const bool random_masking =
      !(options.evidence_forced_only && doc.strategy == Strategy::evidence);

  std::vector<bool> masked(doc.units.size(), false);
  std::vector<std::size_t> maskable;
  bool any = false;
  for (std::size_t i = 0; i < doc.units.size(); ++i) {
    const auto& unit = doc.units[i];
    if (unit.forced_mask) {
      masked[i] = true;
      any = true;
    } else if (is_maskable(unit)) {
      maskable.push_back(i);
      // A draw is consumed for every maskable unit even when p is 0 or 1, so
      // the stream position does not depend on p.
      const bool hit = rng.bernoulli(p);
      if (random_masking && hit) {
        masked[i] = true;
        any = true;
      }
    }
  }
  if (p > 0.0 && random_masking && !any && !options.allow_unmasked && !maskable.empty()) {
    masked[maskable[rng.uniform_index(maskable.size())]] = true;
  }

  MaskedDocument md;
  md.document = doc;
  for (std::size_t i = 0; i < doc.units.size(); ++i) {
    if (i) md.masked_text.push_back(' ');
    if (masked[i]) {
      md.masked_unit_indices.push_back(i);
      md.targets.push_back(MaskTarget{i, doc.units[i].surface});
      md.masked_text.append(kMaskToken);
    } else {
      md.masked_text.append(doc.units[i].surface);
    }
  }
  return md;
}

std::uint64_t mask_seed(std::uint64_t master_seed, std::string_view document_id) {
  return derive_seed(master_seed ^ fnv1a64("mask"), document_id, 0);
}

std::vector<MaskedDocument> mask_corpus(std::span<const Document> docs, double p,
                                        std::uint64_t master_seed, const MaskOptions& options,
                                        unsigned workers) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("mask probability must lie in [0, 1]");
  std::vector<MaskedDocument> out(docs.size());
  detail::parallel_for(docs.size(), workers, [&](std::size_t i) {
    Rng rng(mask_seed(master_seed, docs[i].id));
    out[i] = mask_document(docs[i], p, rng, options);
  });
  return out;
}

std::string unmask(const MaskedDocument& md) {
  const auto& units = md.document.units;
  if (md.targets.size() != md.masked_unit_indices.size()) {
    throw IntegrityError(md.document.id + ": " + std::to_string(md.targets.size()) +
                         " targets for " + std::to_string(md.masked_unit_indices.size()) +
                         " masked units");
  }
  std::vector<bool> masked(units.size(), false);
  for (std::size_t j = 0; j < md.targets.size(); ++j) {
    const auto index = md.masked_unit_indices[j];
    if (index >= units.size() || md.targets[j].unit != index) {
      throw IntegrityError(md.document.id + ": dangling target index " +
                           std::to_string(md.targets[j].unit));
    }
    if (j > 0 && index <= md.masked_unit_indices[j - 1]) {
      throw IntegrityError(md.document.id + ": masked indices not strictly ascending");
    }
    const auto& unit = units[index];
    if (unit.kind == UnitKind::separator || unit.kind == UnitKind::auxiliary) {
      throw IntegrityError(md.document.id + ": unit " + std::to_string(index) +
                           " is not maskable");
    }
    if (unit.surface != md.targets[j].surface) {
      throw IntegrityError(md.document.id + ": target surface mismatch at unit " +
                           std::to_string(index));
    }
    masked[index] = true;
  }

  std::string expected_masked;
  std::string text;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i) {
      expected_masked.push_back(' ');
      text.push_back(' ');
    }
    expected_masked.append(masked[i] ? std::string(kMaskToken) : units[i].surface);
    text.append(units[i].surface);
  }
  if (expected_masked != md.masked_text) {
    throw IntegrityError(md.document.id + ": masked_text disagrees with mask indices");
  }
  return text;
}

CorpusRecord to_record(const MaskedDocument& md, std::uint64_t seed) {
  CorpusRecord r;
  r.id = md.document.id;
  r.strategy = std::string(to_string(md.document.strategy));
  r.text = md.document.render();
  r.masked_text = md.masked_text;
  r.targets = md.targets;
  r.source_entities = md.document.entity_surfaces();
  r.seed = seed;
  return r;
}

std::string unmask_record(const CorpusRecord& record) {
  std::string out;
  std::size_t pos = 0;
  std::size_t next = 0;
  while (true) {
    const auto hit = record.masked_text.find(kMaskToken, pos);
    if (hit == std::string::npos) break;
    if (next == record.targets.size()) {
      throw IntegrityError(record.id + ": more [MASK] tokens than targets");
    }
    out.append(record.masked_text, pos, hit - pos);
    out.append(record.targets[next++].surface);
    pos = hit + kMaskToken.size();
  }
  out.append(record.masked_text, pos, std::string::npos);
  if (next != record.targets.size()) {
    throw IntegrityError(record.id + ": fewer [MASK] tokens than targets");
  }
  return out;
}

std::string serialize_record(const CorpusRecord& record) {
  ordered_json j;
  j["id"] = record.id;
  j["strategy"] = record.strategy;
  j["text"] = record.text;
  j["masked_text"] = record.masked_text;
  auto targets = ordered_json::array();
  for (const auto& t : record.targets) {
    ordered_json tj;
    tj["unit"] = t.unit;
    tj["surface"] = t.surface;
    targets.push_back(std::move(tj));
  }
  j["targets"] = std::move(targets);
  j["source_entities"] = record.source_entities;
  j["seed"] = record.seed;
  try {
    return j.dump();
  } catch (const nlohmann::json::exception& e) {
    throw Error(record.id + ": cannot serialize record: " + e.what());
  }
}

namespace {

template <typename T>
T field(const ordered_json& j, const char* name, const std::string& source, std::size_t line) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(source, line, std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(source, line, std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

CorpusRecord parse_record(std::string_view line, const std::string& source_name,
                          std::size_t line_no) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source_name, line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(source_name, line_no, "record is not a JSON object");

  CorpusRecord r;
  r.id = field<std::string>(j, "id", source_name, line_no);
  r.strategy = field<std::string>(j, "strategy", source_name, line_no);
  if (!parse_strategy(r.strategy)) {
    throw ParseError(source_name, line_no, "unknown strategy '" + r.strategy + "'");
  }
  r.text = field<std::string>(j, "text", source_name, line_no);
  r.masked_text = field<std::string>(j, "masked_text", source_name, line_no);
  const auto targets = field<ordered_json>(j, "targets", source_name, line_no);
  if (!targets.is_array()) throw ParseError(source_name, line_no, "'targets' is not an array");
  for (const auto& t : targets) {
    if (!t.is_object() || !t.contains("unit") || !t.contains("surface") ||
        !t["unit"].is_number_unsigned() || !t["surface"].is_string()) {
      throw ParseError(source_name, line_no, "malformed target");
    }
    r.targets.push_back(MaskTarget{t["unit"].get<std::size_t>(), t["surface"].get<std::string>()});
  }
  r.source_entities = field<std::vector<std::string>>(j, "source_entities", source_name, line_no);
  const auto seed = j.find("seed");
  if (seed == j.end() || !seed->is_number_integer()) {
    throw ParseError(source_name, line_no, "missing or non-integer field 'seed'");
  }
  r.seed = seed->get<std::uint64_t>();
  return r;
}

std::size_t write_corpus(std::span<const CorpusRecord> records, std::ostream& out) {
  for (const auto& r : records) out << serialize_record(r) << '\n';
  if (!out) throw Error("write error while emitting corpus");
  return records.size();
}

std::size_t write_corpus(std::span<const MaskedDocument> docs, std::uint64_t seed,
                         std::ostream& out) {
  for (const auto& md : docs) out << serialize_record(to_record(md, seed)) << '\n';
  if (!out) throw Error("write error while emitting corpus");
  return docs.size();
}

std::vector<CorpusRecord> read_corpus(std::istream& in, const std::string& source_name) {
  std::vector<CorpusRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    text::strip_cr(line);
    if (text::trim(line).empty()) continue;
    records.push_back(parse_record(line, source_name, line_no));
  }
  if (in.bad()) throw Error("I/O error reading " + source_name);
  return records;
}

}  // namespace factkb
