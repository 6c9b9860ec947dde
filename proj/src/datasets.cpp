#include "factkb/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "factkb/errors.hpp"
#include "text_util.hpp"

namespace factkb {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Label label) {
  return label == Label::factual ? "factual" : "non_factual";
}

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::semantic_frame: return "semantic_frame";
    case ErrorCategory::discourse: return "discourse";
    case ErrorCategory::content_verifiability: return "content_verifiability";
  }
  return "?";
}

std::string_view to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::factcollect: return "factcollect";
    case DatasetFormat::covidfact: return "covidfact";
    case DatasetFormat::healthver: return "healthver";
    case DatasetFormat::scifact: return "scifact";
    case DatasetFormat::frank: return "frank";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "factual") return Label::factual;
  if (text == "non_factual") return Label::non_factual;
  return std::nullopt;
}

std::optional<ErrorCategory> parse_error_category(std::string_view text) {
  for (auto c : kErrorCategories) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

std::optional<DatasetFormat> parse_format(std::string_view text) {
  for (auto f : {DatasetFormat::factcollect, DatasetFormat::covidfact, DatasetFormat::healthver,
                 DatasetFormat::scifact, DatasetFormat::frank}) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

namespace {

const std::map<std::string, RawClass>& binary_vocabulary() {
  static const std::map<std::string, RawClass> vocab = {
      {"factual", RawClass::factual},         {"correct", RawClass::factual},
      {"consistent", RawClass::factual},      {"supported", RawClass::factual},
      {"support", RawClass::factual},         {"supports", RawClass::factual},
      {"true", RawClass::factual},            {"1", RawClass::factual},
      {"non_factual", RawClass::non_factual}, {"non-factual", RawClass::non_factual},
      {"incorrect", RawClass::non_factual},   {"inconsistent", RawClass::non_factual},
      {"refuted", RawClass::non_factual},     {"refute", RawClass::non_factual},
      {"refutes", RawClass::non_factual},     {"false", RawClass::non_factual},
      {"0", RawClass::non_factual},
  };
  return vocab;
}

// Vocabulary used by drop_nei for three-way datasets.
const std::map<std::string, RawClass>& three_way_vocabulary() {
  static const std::map<std::string, RawClass> vocab = [] {
    auto v = binary_vocabulary();
    v.insert({{"contradict", RawClass::non_factual},
              {"contradicts", RawClass::non_factual},
              {"contradiction", RawClass::non_factual},
              {"entailment", RawClass::factual},
              {"nei", RawClass::nei},
              {"not enough info", RawClass::nei},
              {"not enough information", RawClass::nei},
              {"not_enough_info", RawClass::nei},
              {"not_enough_information", RawClass::nei},
              {"noinfo", RawClass::nei},
              {"neutral", RawClass::nei}});
    return v;
  }();
  return vocab;
}

// FRANK annotation codes.
const std::map<std::string, ErrorCategory>& frank_codes() {
  static const std::map<std::string, ErrorCategory> codes = {
      {"prede", ErrorCategory::semantic_frame},
      {"ente", ErrorCategory::semantic_frame},
      {"circe", ErrorCategory::semantic_frame},
      {"corefe", ErrorCategory::discourse},
      {"linke", ErrorCategory::discourse},
      {"oute", ErrorCategory::content_verifiability},
      {"grame", ErrorCategory::content_verifiability},
  };
  return codes;
}

const std::unordered_set<std::string>& no_error_codes() {
  static const std::unordered_set<std::string> codes = {"noe", "none", "no error", "ok"};
  return codes;
}

}  // namespace

AdapterManifest builtin_manifest(DatasetFormat format) {
  AdapterManifest m;
  m.format = format;
  m.id_column = "id";
  m.label_column = "label";
  m.split_column = "split";
  m.labels = binary_vocabulary();
  switch (format) {
    case DatasetFormat::factcollect:
      m.summary_column = "summary";
      m.document_column = "article";
      m.subset_column = "dataset";
      break;
    case DatasetFormat::covidfact:
      m.summary_column = "claim";
      m.document_column = "evidence";
      break;
    case DatasetFormat::healthver:
    case DatasetFormat::scifact:
      m.summary_column = "claim";
      m.document_column = "evidence";
      m.three_way = true;
      m.labels.clear();
      break;
    case DatasetFormat::frank:
      m.id_column = "hash";
      m.summary_column = "summary";
      m.document_column = "article";
      m.label_column.clear();
      m.subset_column = "model_name";
      m.score_column = "Factuality";
      m.categories_column = "errors";
      m.category_codes = frank_codes();
      break;
  }
  return m;
}

AdapterManifest load_manifest(std::istream& in, DatasetFormat fallback,
                              const std::string& source_name) {
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source_name, 0, std::string("invalid manifest JSON: ") + e.what());
  }
  if (!j.is_object()) throw DatasetError(source_name + ": manifest must be a JSON object");

  try {
    DatasetFormat format = fallback;
    if (j.contains("format")) {
      const auto name = j["format"].get<std::string>();
      const auto parsed = parse_format(name);
      if (!parsed) throw DatasetError(source_name + ": unknown format '" + name + "'");
      format = *parsed;
    }
    AdapterManifest m = builtin_manifest(format);
    const std::pair<const char*, std::string*> columns[] = {
        {"id", &m.id_column},           {"summary", &m.summary_column},
        {"document", &m.document_column}, {"label", &m.label_column},
        {"subset", &m.subset_column},   {"split", &m.split_column},
        {"score", &m.score_column},     {"categories", &m.categories_column},
    };
    for (const auto& [key, target] : columns) {
      if (j.contains(key)) *target = j[key].is_null() ? std::string() : j[key].get<std::string>();
    }
    if (j.contains("three_way")) m.three_way = j["three_way"].get<bool>();
    if (j.contains("factual_score_threshold")) {
      m.factual_score_threshold = j["factual_score_threshold"].get<double>();
    }
    if (j.contains("labels")) {
      m.labels.clear();
      for (const auto& [raw, cls] : j["labels"].items()) {
        const auto name = cls.get<std::string>();
        RawClass c;
        if (name == "factual") c = RawClass::factual;
        else if (name == "non_factual") c = RawClass::non_factual;
        else if (name == "nei") c = RawClass::nei;
        else throw DatasetError(source_name + ": label '" + raw + "' maps to unknown class '" + name + "'");
        m.labels[text::lower(raw)] = c;
      }
    }
    if (j.contains("category_codes")) {
      m.category_codes.clear();
      for (const auto& [code, cat] : j["category_codes"].items()) {
        const auto parsed = parse_error_category(cat.get<std::string>());
        if (!parsed) throw DatasetError(source_name + ": unknown error category for code '" + code + "'");
        m.category_codes[text::lower(code)] = *parsed;
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(source_name + ": malformed manifest: " + e.what());
  }
}

namespace {

// Scalar JSON value as text; nullopt for null / missing.
std::optional<std::string> scalar_text(const ordered_json& row, const std::string& column) {
  if (column.empty()) return std::nullopt;
  auto it = row.find(column);
  if (it == row.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_boolean()) return it->get<bool>() ? "true" : "false";
  if (it->is_number_integer()) return it->dump();
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
      return std::to_string(static_cast<long long>(v));
    }
    return it->dump();
  }
  return it->dump();
}

class Mapper {
 public:
  Mapper(const AdapterManifest& m, std::string source) : m_(m), source_(std::move(source)) {
    if (m_.summary_column.empty() || m_.document_column.empty()) {
      throw DatasetError(source_ + ": manifest lacks summary/document columns");
    }
    if (m_.label_column.empty() && m_.score_column.empty()) {
      throw DatasetError(source_ + ": manifest needs a label or score column");
    }
  }

  std::vector<std::string> required_columns() const {
    std::vector<std::string> cols = {m_.summary_column, m_.document_column};
    if (!m_.label_column.empty()) cols.push_back(m_.label_column);
    if (!m_.score_column.empty()) cols.push_back(m_.score_column);
    return cols;
  }

  SourcePair map(const ordered_json& row, std::size_t index, std::size_t line) const {
    auto fail = [&](const std::string& what) -> DatasetError {
      return DatasetError(source_ + ":" + std::to_string(line) + ": " + what);
    };
    for (const auto& col : required_columns()) {
      if (!row.contains(col)) throw fail("missing required column '" + col + "'");
    }

    SourcePair p;
    const auto id = scalar_text(row, m_.id_column);
    p.id = id && !text::trim(*id).empty()
               ? std::string(text::trim(*id))
               : std::string(to_string(m_.format)) + "-" + std::to_string(index);
    p.summary = scalar_text(row, m_.summary_column).value_or("");
    p.document = scalar_text(row, m_.document_column).value_or("");
    if (text::trim(p.summary).empty()) throw fail("empty summary");
    if (text::trim(p.document).empty()) throw fail("empty document");

    if (auto subset = scalar_text(row, m_.subset_column); subset && !subset->empty()) {
      p.subset = std::move(*subset);
    }
    if (auto split = scalar_text(row, m_.split_column); split && !split->empty()) {
      p.split = text::lower(text::trim(*split));
    }

    if (!m_.score_column.empty()) {
      const auto& v = row[m_.score_column];
      double score;
      if (v.is_number()) {
        score = v.get<double>();
      } else if (v.is_string()) {
        try {
          std::size_t used = 0;
          score = std::stod(v.get<std::string>(), &used);
          if (used != text::trim(v.get<std::string>()).size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
          throw fail("unparseable human score '" + v.get<std::string>() + "'");
        }
      } else {
        throw fail("human score is not a number");
      }
      if (!std::isfinite(score)) throw fail("human score is not finite");
      p.human_score = score;
    }

    if (!m_.categories_column.empty() && row.contains(m_.categories_column)) {
      const auto& v = row[m_.categories_column];
      std::vector<std::string> codes;
      if (v.is_array()) {
        for (const auto& c : v) codes.push_back(c.is_string() ? c.get<std::string>() : c.dump());
      } else if (v.is_string()) {
        std::string cur;
        for (char ch : v.get<std::string>()) {
          if (ch == ',' || ch == ';' || ch == '|') {
            codes.push_back(cur);
            cur.clear();
          } else {
            cur.push_back(ch);
          }
        }
        codes.push_back(cur);
      } else if (!v.is_null()) {
        throw fail("error categories must be a list or a delimited string");
      }
      for (const auto& raw : codes) {
        const auto code = text::lower(text::trim(raw));
        if (code.empty() || no_error_codes().contains(code)) continue;
        if (auto it = m_.category_codes.find(code); it != m_.category_codes.end()) {
          p.error_categories.insert(it->second);
        } else if (auto c = parse_error_category(code)) {
          p.error_categories.insert(*c);
        } else {
          throw fail("unknown error category '" + raw + "'");
        }
      }
    }

    if (!m_.label_column.empty()) {
      const auto raw = scalar_text(row, m_.label_column);
      if (!raw || text::trim(*raw).empty()) throw fail("missing label");
      p.raw_label = std::string(text::trim(*raw));
      if (!m_.three_way) {
        auto it = m_.labels.find(text::lower(p.raw_label));
        if (it == m_.labels.end() || it->second == RawClass::nei) {
          throw fail("unparseable label '" + p.raw_label + "'");
        }
        p.label = it->second == RawClass::factual ? Label::factual : Label::non_factual;
      }
    } else {
      p.label = *p.human_score >= m_.factual_score_threshold ? Label::factual
                                                               : Label::non_factual;
      p.raw_label = std::string(to_string(*p.label));
    }
    return p;
  }

 private:
  const AdapterManifest& m_;
  std::string source_;
};

SourceType detect(const std::string& source_name) {
  const auto ext_pos = source_name.rfind('.');
  if (ext_pos != std::string::npos) {
    const auto ext = text::lower(source_name.substr(ext_pos + 1));
    if (ext == "csv" || ext == "tsv") return SourceType::csv;
    if (ext == "jsonl" || ext == "json" || ext == "ndjson") return SourceType::jsonl;
  }
  return SourceType::jsonl;
}

}  // namespace

std::vector<SourcePair> load_pairs(std::istream& in, const AdapterManifest& manifest,
                                   SourceType type, const std::string& source_name) {
  const Mapper mapper(manifest, source_name);
  if (type == SourceType::auto_detect) type = detect(source_name);
  std::vector<SourcePair> out;

  if (type == SourceType::csv) {
    const bool tsv = source_name.size() >= 4 &&
                     text::lower(source_name.substr(source_name.size() - 4)) == ".tsv";
    detail::CsvReader reader(in, tsv ? '\t' : ',');
    try {
      auto header = reader.next();
      if (!header) return out;
      for (auto& h : *header) h = std::string(text::trim(h));
      for (const auto& col : mapper.required_columns()) {
        if (std::find(header->begin(), header->end(), col) == header->end()) {
          throw DatasetError(source_name + ": missing required column '" + col + "'");
        }
      }
      while (auto fields = reader.next()) {
        if (fields->size() != header->size()) {
          throw ParseError(source_name, reader.record_line(),
                           "expected " + std::to_string(header->size()) + " columns, found " +
                               std::to_string(fields->size()));
        }
        ordered_json row = ordered_json::object();
        for (std::size_t c = 0; c < header->size(); ++c) row[(*header)[c]] = (*fields)[c];
        out.push_back(mapper.map(row, out.size(), reader.record_line()));
      }
    } catch (const std::runtime_error& e) {
      if (dynamic_cast<const Error*>(&e)) throw;
      throw ParseError(source_name, reader.record_line(), e.what());
    }
    return out;
  }

  // JSON lines, or a single JSON array of records.
  const auto first = [&] {
    while (true) {
      const int c = in.peek();
      if (c == std::char_traits<char>::eof()) return c;
      if (!std::isspace(c)) return c;
      in.get();
    }
  }();
  if (first == '[') {
    ordered_json all;
    try {
      all = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source_name, 0, std::string("invalid JSON: ") + e.what());
    }
    for (const auto& row : all) {
      if (!row.is_object()) throw ParseError(source_name, 0, "array element is not an object");
      out.push_back(mapper.map(row, out.size(), out.size() + 1));
    }
    return out;
  }

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    text::strip_cr(line);
    if (text::trim(line).empty()) continue;
    ordered_json row;
    try {
      row = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source_name, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!row.is_object()) throw ParseError(source_name, line_no, "record is not a JSON object");
    out.push_back(mapper.map(row, out.size(), line_no));
  }
  return out;
}

std::vector<SourcePair> load_pairs_file(const std::string& path, const AdapterManifest& manifest,
                                        SourceType type) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset file " + path);
  return load_pairs(in, manifest, type, path);
}

std::vector<SourcePair> drop_nei(const std::vector<SourcePair>& pairs) {
  std::vector<SourcePair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.label) {
      out.push_back(p);
      continue;
    }
    const auto& vocab = three_way_vocabulary();
    auto it = vocab.find(text::lower(text::trim(p.raw_label)));
    if (it == vocab.end()) {
      throw DatasetError(p.id + ": unmapped raw label '" + p.raw_label + "'");
    }
    if (it->second == RawClass::nei) continue;
    SourcePair mapped = p;
    mapped.label = it->second == RawClass::factual ? Label::factual : Label::non_factual;
    out.push_back(std::move(mapped));
  }
  return out;
}

std::vector<LabeledPair> to_labeled(const std::vector<SourcePair>& pairs) {
  std::vector<LabeledPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.label) {
      throw DatasetError(p.id + ": raw label '" + p.raw_label +
                         "' is not binary; drop not-enough-information records first");
    }
    out.push_back(LabeledPair{p.id, p.summary, p.document, *p.label, p.subset, p.human_score,
                              p.error_categories});
  }
  return out;
}

std::vector<LabeledPair> exclude_subset(const std::vector<LabeledPair>& pairs,
                                        std::string_view subset) {
  std::vector<LabeledPair> out;
  for (const auto& p : pairs) {
    if (!p.subset || text::lower(*p.subset) != text::lower(subset)) out.push_back(p);
  }
  return out;
}

std::string format_pair_input(const LabeledPair& pair) {
  std::string out;
  out.reserve(pair.summary.size() + pair.document.size() + 7);
  out.append(pair.summary).append(" [SEP] ").append(pair.document);
  return out;
}

std::string serialize_pair(const LabeledPair& pair) {
  ordered_json j;
  j["id"] = pair.id;
  j["summary"] = pair.summary;
  j["document"] = pair.document;
  j["label"] = to_string(pair.label);
  j["subset"] = pair.subset ? ordered_json(*pair.subset) : ordered_json(nullptr);
  j["human_score"] = pair.human_score ? ordered_json(*pair.human_score) : ordered_json(nullptr);
  auto cats = ordered_json::array();
  for (auto c : pair.error_categories) cats.push_back(to_string(c));
  j["error_categories"] = std::move(cats);
  try {
    return j.dump();
  } catch (const nlohmann::json::exception& e) {
    throw Error(pair.id + ": cannot serialize pair: " + e.what());
  }
}

void write_pairs(const std::vector<LabeledPair>& pairs, std::ostream& out) {
  for (const auto& p : pairs) out << serialize_pair(p) << '\n';
  if (!out) throw Error("write error while emitting pairs");
}

std::vector<LabeledPair> read_pairs(std::istream& in, const std::string& source_name) {
  std::vector<LabeledPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    text::strip_cr(line);
    if (text::trim(line).empty()) continue;
    auto fail = [&](const std::string& what) { return ParseError(source_name, line_no, what); };
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw fail(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw fail("record is not a JSON object");
    LabeledPair p;
    for (const char* key : {"id", "summary", "document", "label"}) {
      if (!j.contains(key) || !j[key].is_string()) {
        throw fail(std::string("missing or non-string field '") + key + "'");
      }
    }
    p.id = j["id"].get<std::string>();
    p.summary = j["summary"].get<std::string>();
    p.document = j["document"].get<std::string>();
    if (p.id.empty()) throw fail("empty id");
    if (text::trim(p.summary).empty()) throw fail("empty summary");
    if (text::trim(p.document).empty()) throw fail("empty document");
    const auto label = parse_label(j["label"].get<std::string>());
    if (!label) throw fail("unparseable label '" + j["label"].get<std::string>() + "'");
    p.label = *label;
    if (j.contains("subset") && !j["subset"].is_null()) {
      if (!j["subset"].is_string()) throw fail("'subset' is not a string");
      p.subset = j["subset"].get<std::string>();
    }
    if (j.contains("human_score") && !j["human_score"].is_null()) {
      if (!j["human_score"].is_number()) throw fail("'human_score' is not a number");
      p.human_score = j["human_score"].get<double>();
      if (!std::isfinite(*p.human_score)) throw fail("'human_score' is not finite");
    }
    if (j.contains("error_categories") && !j["error_categories"].is_null()) {
      if (!j["error_categories"].is_array()) throw fail("'error_categories' is not an array");
      for (const auto& c : j["error_categories"]) {
        const auto cat = c.is_string() ? parse_error_category(c.get<std::string>()) : std::nullopt;
        if (!cat) throw fail("unknown error category " + c.dump());
        p.error_categories.insert(*cat);
      }
    }
    out.push_back(std::move(p));
  }
  if (in.bad()) throw Error("I/O error reading " + source_name);
  return out;
}

std::vector<LabeledPair> read_pairs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open pairs file " + path);
  return read_pairs(in, path);
}

DatasetSplit split_by_tag(const std::vector<SourcePair>& pairs) {
  std::vector<SourcePair> train, dev, test;
  for (const auto& p : pairs) {
    if (!p.split) throw DatasetError(p.id + ": record has no split tag");
    const auto& s = *p.split;
    if (s == "train") train.push_back(p);
    else if (s == "dev" || s == "val" || s == "valid" || s == "validation") dev.push_back(p);
    else if (s == "test") test.push_back(p);
    else throw DatasetError(p.id + ": unknown split '" + s + "'");
  }
  return DatasetSplit{to_labeled(train), to_labeled(dev), to_labeled(test), std::nullopt};
}

SplitReport verify_split(const DatasetSplit& split) {
  static constexpr const char* kNames[] = {"train", "dev", "test"};
  const std::vector<LabeledPair>* parts[] = {&split.train, &split.dev, &split.test};

  SplitReport report;
  report.expected_counts = split.expected_counts;
  std::unordered_map<std::string, int> owner;
  for (int s = 0; s < 3; ++s) {
    report.sizes[s] = parts[s]->size();
    std::unordered_set<std::string> seen;
    for (const auto& p : *parts[s]) {
      ++report.label_counts[s][p.label == Label::factual ? 0 : 1];
      if (!seen.insert(p.id).second) {
        report.duplicates.push_back(p.id);
        continue;
      }
      auto [it, inserted] = owner.try_emplace(p.id, s);
      if (!inserted) report.overlaps.push_back(SplitOverlap{p.id, kNames[it->second], kNames[s]});
    }
  }
  if (split.expected_counts) report.sizes_match = report.sizes == *split.expected_counts;
  report.passed = report.sizes_match && report.overlaps.empty() && report.duplicates.empty();
  return report;
}

}  // namespace factkb
