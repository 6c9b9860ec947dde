#pragma once
// Unit-level masking of synthesized documents and the JSONL corpus format.

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "factkb/corpus.hpp"
#include "factkb/rng.hpp"

namespace factkb {

struct MaskTarget {
  std::size_t unit = 0;
  std::string surface;

  friend bool operator==(const MaskTarget&, const MaskTarget&) = default;
};

struct MaskOptions {
  // Skip the at-least-one-mask guarantee when p > 0.
  bool allow_unmasked = false;
  // Evidence documents keep only the built-in object mask.
  bool evidence_forced_only = false;
};

struct MaskedDocument {
  Document document;
  std::vector<std::size_t> masked_unit_indices;  // ascending
  std::vector<MaskTarget> targets;               // parallel to masked_unit_indices
  std::string masked_text;

  friend bool operator==(const MaskedDocument&, const MaskedDocument&) = default;
};

// True for entity and relation units that random masking may select. Forced
// evidence slots are masked unconditionally and are not counted here.
bool is_maskable(const Unit& unit);

// Masks each maskable unit independently with probability p; forced units are
// always masked; separators and auxiliary text never are. When p > 0 and the
// document would otherwise carry no mask, one maskable unit chosen uniformly
// is masked (unless options.allow_unmasked).
MaskedDocument mask_document(const Document& doc, double p, Rng& rng,
                             const MaskOptions& options = {});

// Seed of the masking stream for one document.
std::uint64_t mask_seed(std::uint64_t master_seed, std::string_view document_id);

// Masks every document with its own stream; output order = input order.
std::vector<MaskedDocument> mask_corpus(std::span<const Document> docs, double p,
                                        std::uint64_t master_seed,
                                        const MaskOptions& options = {}, unsigned workers = 1);

// Recovers the unmasked rendering. Throws IntegrityError when targets and
// indices disagree with the document or with masked_text.
std::string unmask(const MaskedDocument& md);

struct CorpusRecord {
  std::string id;
  std::string strategy;
  std::string text;
  std::string masked_text;
  std::vector<MaskTarget> targets;
  std::vector<std::string> source_entities;
  std::uint64_t seed = 0;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

CorpusRecord to_record(const MaskedDocument& md, std::uint64_t seed);

// Rebuilds `text` from `masked_text` by substituting each [MASK] occurrence
// with the next target surface. Throws IntegrityError on a count mismatch.
std::string unmask_record(const CorpusRecord& record);

std::string serialize_record(const CorpusRecord& record);
CorpusRecord parse_record(std::string_view line, const std::string& source_name = "<corpus>",
                          std::size_t line_no = 0);

// One JSON object per line, LF-terminated. Returns the number of records.
std::size_t write_corpus(std::span<const CorpusRecord> records, std::ostream& out);
std::size_t write_corpus(std::span<const MaskedDocument> docs, std::uint64_t seed,
                         std::ostream& out);
std::vector<CorpusRecord> read_corpus(std::istream& in,
                                      const std::string& source_name = "<corpus>");

}  // namespace factkb
