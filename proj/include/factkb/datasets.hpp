#pragma once
// Factuality-evaluation dataset adapters.
//
// Source records (CSV or JSON lines) are mapped onto canonical labeled pairs
// through an adapter manifest naming the source columns for each canonical
// field. Three-way datasets (HealthVer, SciFact) load with their raw label
// and are binarized by drop_nei().

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace factkb {

enum class Label { factual, non_factual };
enum class ErrorCategory { semantic_frame, discourse, content_verifiability };
enum class DatasetFormat { factcollect, covidfact, healthver, scifact, frank };

inline constexpr std::array<ErrorCategory, 3> kErrorCategories = {
    ErrorCategory::semantic_frame, ErrorCategory::discourse,
    ErrorCategory::content_verifiability};

std::string_view to_string(Label label);
std::string_view to_string(ErrorCategory category);
std::string_view to_string(DatasetFormat format);
std::optional<Label> parse_label(std::string_view text);
std::optional<ErrorCategory> parse_error_category(std::string_view text);
std::optional<DatasetFormat> parse_format(std::string_view text);

struct LabeledPair {
  std::string id;
  std::string summary;
  std::string document;
  Label label = Label::factual;
  std::optional<std::string> subset;
  std::optional<double> human_score;
  std::set<ErrorCategory> error_categories;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

// A loaded source record. `label` is unset for three-way datasets until
// drop_nei() resolves `raw_label`.
struct SourcePair {
  std::string id;
  std::string summary;
  std::string document;
  std::optional<Label> label;
  std::string raw_label;
  std::optional<std::string> subset;
  std::optional<std::string> split;
  std::optional<double> human_score;
  std::set<ErrorCategory> error_categories;

  friend bool operator==(const SourcePair&, const SourcePair&) = default;
};

enum class RawClass { factual, non_factual, nei };

struct AdapterManifest {
  DatasetFormat format = DatasetFormat::factcollect;
  // Empty id column: ids are generated as "<format>-<record index>".
  std::string id_column;
  std::string summary_column;
  std::string document_column;
  // Empty label column is only valid with a score column (FRANK): the pair is
  // factual iff human_score >= factual_score_threshold.
  std::string label_column;
  std::string subset_column;
  std::string split_column;
  std::string score_column;
  std::string categories_column;
  bool three_way = false;
  // Lower-cased raw label -> class (binary formats only).
  std::map<std::string, RawClass> labels;
  // Lower-cased error code -> category.
  std::map<std::string, ErrorCategory> category_codes;
  double factual_score_threshold = 1.0;
};

AdapterManifest builtin_manifest(DatasetFormat format);

// Overlays the keys present in a JSON manifest file onto the built-in
// manifest of its "format" (or of `fallback` when the file names none).
AdapterManifest load_manifest(std::istream& in, DatasetFormat fallback,
                              const std::string& source_name = "<manifest>");

enum class SourceType { auto_detect, jsonl, csv };

std::vector<SourcePair> load_pairs(std::istream& in, const AdapterManifest& manifest,
                                   SourceType type = SourceType::jsonl,
                                   const std::string& source_name = "<pairs>");
std::vector<SourcePair> load_pairs_file(const std::string& path, const AdapterManifest& manifest,
                                        SourceType type = SourceType::auto_detect);

// Removes not-enough-information records and maps support -> factual,
// refute -> non_factual. Records that already carry a label pass through.
// Throws DatasetError on an unmapped raw label.
std::vector<SourcePair> drop_nei(const std::vector<SourcePair>& pairs);

// Throws DatasetError if any record lacks a binary label.
std::vector<LabeledPair> to_labeled(const std::vector<SourcePair>& pairs);

std::vector<LabeledPair> exclude_subset(const std::vector<LabeledPair>& pairs,
                                        std::string_view subset);

// "summary [SEP] document"; [SEP] inside either text passes through verbatim.
std::string format_pair_input(const LabeledPair& pair);

// Canonical pairs file: one JSON object per line with fields id, summary,
// document, label, subset, human_score, error_categories.
std::string serialize_pair(const LabeledPair& pair);
void write_pairs(const std::vector<LabeledPair>& pairs, std::ostream& out);
std::vector<LabeledPair> read_pairs(std::istream& in, const std::string& source_name = "<pairs>");
std::vector<LabeledPair> read_pairs_file(const std::string& path);

struct DatasetSplit {
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> dev;
  std::vector<LabeledPair> test;
  std::optional<std::array<std::size_t, 3>> expected_counts;
};

// Partitions by SourcePair::split ("train"/"dev"/"validation"/"test").
DatasetSplit split_by_tag(const std::vector<SourcePair>& pairs);

struct SplitOverlap {
  std::string id;
  std::string first_split;
  std::string second_split;
};

struct SplitReport {
  std::array<std::size_t, 3> sizes{};
  std::optional<std::array<std::size_t, 3>> expected_counts;
  bool sizes_match = true;
  std::vector<SplitOverlap> overlaps;
  // Ids repeated inside one split.
  std::vector<std::string> duplicates;
  // [split][label]: counts of factual / non_factual.
  std::array<std::array<std::size_t, 2>, 3> label_counts{};
  bool passed = true;
};

SplitReport verify_split(const DatasetSplit& split);

}  // namespace factkb
