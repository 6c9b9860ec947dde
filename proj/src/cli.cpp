#include "factkb/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "factkb/datasets.hpp"
#include "factkb/errors.hpp"
#include "factkb/kb_store.hpp"
#include "factkb/metrics.hpp"
#include "text_util.hpp"

namespace factkb::cli {

using ordered_json = nlohmann::ordered_json;

const std::vector<std::string>& run_config_flags() {
  static const std::vector<std::string> flags = {
      "--config",          "--workers",        "--kb",
      "--add-inverse",     "--descriptions",   "--out",
      "--n",               "--k",              "--mask-prob",
      "--seed",            "--max-units",      "--dead-end",
      "--with-replacement", "--without-replacement", "--no-revisit",
      "--max-attempts",    "--allow-unmasked", "--evidence-forced-only",
      "--format",          "--in",             "--input-type",
      "--manifest",        "--drop-nei",       "--exclude-subset",
      "--split",           "--train",          "--dev",
      "--test",            "--expected",       "--gold",
      "--pred",            "--group-by",       "--binary",
      "--ablation",        "--p-value",
  };
  return flags;
}

namespace {

void add_kb_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--kb", c.kb_path, "Triples file: subject<TAB>relation<TAB>object per line")
      ->required();
  sub->add_flag("--add-inverse", c.add_inverse,
                "Also store (object, \"inverse \" + relation, subject) for every triple");
}

void add_synth_common(CLI::App* sub, RunConfig& c) {
  add_kb_options(sub, c);
  sub->add_option("--out", c.output_path,
                  "Corpus output (JSON lines); a <out>.meta.json sidecar records the resolved "
                  "config. Default: stdout");
  sub->add_option("--mask-prob", c.synth.mask_prob, "Per-unit masking probability p")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--seed", c.seed, "Master seed (drawn from entropy and reported if omitted)");
  sub->add_flag("--allow-unmasked", c.mask.allow_unmasked,
                "Do not force one mask into documents that sampled none");
}

void add_sampling_count(CLI::App* sub, RunConfig& c) {
  sub->add_option("--n", c.synth.n, "Number of documents to sample")
      ->capture_default_str()
      ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1'000'000'000}));
}

std::unique_ptr<CLI::App> make_app(RunConfig& c) {
  auto app = std::make_unique<CLI::App>(
      "Knowledge-base factuality pretraining corpora and factuality evaluation", "factkb");
  app->require_subcommand(1);
  app->fallthrough();
  app->add_option("--config", c.config_path,
                  "Config file of `key = value` lines; keys are flag names without dashes. "
                  "Command-line flags take precedence");
  app->add_option("--workers", c.workers, "Worker threads for synthesis (output is identical)")
      ->envname("FACTKB_WORKERS")
      ->capture_default_str()
      ->check(CLI::Range(1U, 1024U));

  auto* stats = app->add_subcommand("stats", "Print knowledge-base statistics as one JSON object");
  add_kb_options(stats, c);

  auto* synth = app->add_subcommand("synth", "Synthesize a masked pretraining corpus");
  synth->require_subcommand(1);

  auto* wiki = synth->add_subcommand("entity-wiki", "One document per entity from its one-hop facts");
  add_synth_common(wiki, c);
  wiki->add_option("--max-units", c.synth.max_units_per_doc,
                   "Truncate documents at a fact boundary above this many units")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{3}, std::size_t{100'000'000}));

  auto* evidence = synth->add_subcommand(
      "evidence", "Triple with masked object followed by the subject's description");
  add_synth_common(evidence, c);
  add_sampling_count(evidence, c);
  evidence->add_option("--descriptions", c.descriptions_path,
                       "Descriptions file: entity<TAB>paragraph per line")
      ->required();
  auto* with = evidence->add_flag("--with-replacement", c.with_replacement,
                                  "Sample triples with replacement (default)");
  auto* without = evidence->add_flag("--without-replacement", c.without_replacement,
                                     "Sample each eligible triple at most once");
  with->excludes(without);
  without->excludes(with);
  evidence->add_flag("--evidence-forced-only", c.mask.evidence_forced_only,
                     "Mask only the object slot; no random masking on evidence documents");

  auto* walk = synth->add_subcommand("walk", "Verbalized K-hop random walks");
  add_synth_common(walk, c);
  add_sampling_count(walk, c);
  walk->add_option("--k", c.synth.k, "Walk length in hops")
      ->capture_default_str()
      ->check(CLI::Range(1U, 1'000'000U));
  const std::map<std::string, DeadEndPolicy> policies = {{"truncate", DeadEndPolicy::truncate},
                                                         {"resample", DeadEndPolicy::resample}};
  walk->add_option_function<std::string>(
          "--dead-end",
          [&c, policies](const std::string& v) { c.synth.dead_end_policy = policies.at(v); },
          "On reaching a sink early: truncate the walk, or resample it")
      ->check(CLI::IsMember({"truncate", "resample"}))
      ->default_str("truncate");
  walk->add_flag("--no-revisit", c.synth.no_revisit, "Reject and resample walks that revisit an entity");
  walk->add_option("--max-attempts", c.synth.max_walk_attempts,
                   "Whole-walk attempts before keeping the longest partial walk")
      ->capture_default_str()
      ->check(CLI::Range(1U, 1'000'000U));

  auto* dataset = app->add_subcommand("dataset", "Factuality dataset preparation");
  dataset->require_subcommand(1);
  auto* prepare = dataset->add_subcommand("prepare", "Convert a source dataset to canonical pairs");
  prepare->add_option("--format", c.format, "Source dataset format")
      ->required()
      ->check(CLI::IsMember({"factcollect", "covidfact", "healthver", "scifact", "frank"}));
  prepare->add_option("--in", c.input_path, "Source file (CSV, TSV, JSON lines or JSON array)")
      ->required();
  prepare->add_option("--out", c.output_path, "Canonical pairs output. Default: stdout");
  prepare->add_option("--input-type", c.input_type, "Source encoding")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "jsonl", "csv"}));
  prepare->add_option("--manifest", c.manifest_path,
                      "Adapter manifest (JSON) overriding the format's column mapping");
  prepare->add_flag("--drop-nei", c.drop_nei,
                    "Remove not-enough-information records and binarize support/refute");
  prepare->add_option("--exclude-subset", c.exclude_subset, "Drop pairs whose subset tag matches");
  prepare->add_option("--split", c.split, "Keep only records of this split")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "train", "dev", "test"}));

  auto* verify = dataset->add_subcommand("verify", "Check split sizes and id disjointness");
  verify->add_option("--train", c.train_path, "Canonical train pairs")->required();
  verify->add_option("--dev", c.dev_path, "Canonical dev pairs")->required();
  verify->add_option("--test", c.test_path, "Canonical test pairs")->required();
  verify->add_option("--expected", c.expected_counts, "Expected sizes as TRAIN,DEV,TEST");

  auto* eval = app->add_subcommand("eval", "Score classifier predictions");
  eval->require_subcommand(1);
  auto* classify = eval->add_subcommand("classify", "Balanced accuracy and micro F1");
  classify->add_option("--gold", c.gold_path, "Canonical gold pairs")->required();
  classify->add_option("--pred", c.pred_path, "Predictions (id, pred_label, score_factual)")
      ->required();
  classify->add_option("--group-by", c.group_by, "Add one row per subset tag")
      ->check(CLI::IsMember({"subset"}));

  auto* correlate = eval->add_subcommand("correlate",
                                         "Pearson and Spearman correlation with human scores");
  correlate->add_option("--gold", c.gold_path, "Canonical gold pairs with human_score")->required();
  correlate->add_option("--pred", c.pred_path, "Predictions (id, pred_label, score_factual)")
      ->required();
  correlate->add_flag("--binary", c.binary_scores,
                      "Correlate 1/0 predicted labels instead of score_factual");
  correlate->add_flag("--ablation", c.ablation,
                      "Report correlation changes with each error category removed");
  correlate->add_option("--p-value", c.p_value,
                        "p-value method: Student t, or exact permutation (n <= 10)")
      ->capture_default_str()
      ->check(CLI::IsMember({"t", "permutation"}));
  return app;
}

// Flags named in the config file are appended as --key=value unless already
// present on the command line.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const auto name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(name);
    if (name == "config") {
      if (eq != std::string::npos) path = a.substr(eq + 1);
      else if (i + 1 < args.size()) path = args[i + 1];
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open config file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    text::strip_cr(line);
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw CLI::ValidationError("--config", path + ":" + std::to_string(line_no) +
                                                 ": expected key = value");
    }
    const auto key = std::string(text::trim(body.substr(0, eq)));
    auto value = std::string(text::trim(body.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty() || key == "config") {
      throw CLI::ValidationError("--config", path + ":" + std::to_string(line_no) + ": bad key");
    }
    if (given.contains(key)) continue;
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

ordered_json resolved_config(const RunConfig& c) {
  ordered_json j;
  std::string cmd;
  for (const auto& s : c.subcommand) cmd += (cmd.empty() ? "" : " ") + s;
  j["command"] = cmd;
  if (!c.config_path.empty()) j["config"] = c.config_path;
  const auto& s = c.subcommand;
  if (s.front() == "stats" || s.front() == "synth") {
    j["kb"] = c.kb_path;
    j["add_inverse"] = c.add_inverse;
  }
  if (s.front() == "synth") {
    const auto& strat = s.back();
    if (strat == "evidence") j["descriptions"] = c.descriptions_path;
    if (strat != "entity-wiki") j["n"] = c.synth.n;
    if (strat == "walk") {
      j["k"] = c.synth.k;
      j["dead_end"] = to_string(c.synth.dead_end_policy);
      j["no_revisit"] = c.synth.no_revisit;
      j["max_attempts"] = c.synth.max_walk_attempts;
    }
    if (strat == "entity-wiki") j["max_units"] = c.synth.max_units_per_doc;
    if (strat == "evidence") {
      j["sample_with_replacement"] = c.synth.sample_with_replacement;
      j["evidence_forced_only"] = c.mask.evidence_forced_only;
    }
    j["mask_prob"] = c.synth.mask_prob;
    j["allow_unmasked"] = c.mask.allow_unmasked;
    j["seed"] = c.synth.seed;
  }
  if (s.front() == "dataset" && s.back() == "prepare") {
    j["format"] = c.format;
    j["in"] = c.input_path;
    j["input_type"] = c.input_type;
    if (!c.manifest_path.empty()) j["manifest"] = c.manifest_path;
    j["drop_nei"] = c.drop_nei;
    if (!c.exclude_subset.empty()) j["exclude_subset"] = c.exclude_subset;
    j["split"] = c.split;
  }
  if (s.front() == "eval") {
    j["gold"] = c.gold_path;
    j["pred"] = c.pred_path;
    if (s.back() == "classify") {
      j["group_by"] = c.group_by.empty() ? ordered_json(nullptr) : ordered_json(c.group_by);
    } else {
      j["score_source"] = c.binary_scores ? "binary" : "probability";
      j["ablation"] = c.ablation;
      j["p_value"] = c.p_value;
    }
  }
  return j;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error("cannot open output file " + path);
    }
    stream_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& stream() { return *stream_; }
  void close() {
    stream_->flush();
    if (!*stream_) throw Error("write error on output");
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void write_meta(const std::string& output_path, const ordered_json& meta) {
  if (output_path.empty()) return;
  std::ofstream out(output_path + ".meta.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + output_path + ".meta.json");
  out << meta.dump(2) << '\n';
}

ordered_json stats_json(const KbStats& s) {
  ordered_json j;
  j["num_entities"] = s.num_entities;
  j["num_relations"] = s.num_relations;
  j["num_triples"] = s.num_triples;
  j["num_entities_with_out_edges"] = s.num_entities_with_out_edges;
  auto hist = ordered_json::object();
  for (const auto& [degree, count] : s.out_degree_histogram) hist[std::to_string(degree)] = count;
  j["out_degree_histogram"] = std::move(hist);
  return j;
}

int run_stats(const RunConfig& c, std::ostream& out) {
  LoadOptions options;
  options.add_inverse = c.add_inverse;
  const auto kb = load_kb_file(c.kb_path, options);
  out << stats_json(kb_stats(kb)).dump() << '\n';
  return kExitOk;
}

std::size_t whitespace_tokens(std::string_view s) {
  std::size_t n = 0;
  bool in_token = false;
  for (char ch : s) {
    const bool space = text::kWhitespace.find(ch) != std::string_view::npos;
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

int run_synth(RunConfig& c, std::ostream& out, std::ostream& err) {
  SynthConfig cfg = c.synth;
  if (c.seed) {
    cfg.seed = *c.seed;
  } else {
    std::random_device entropy;
    cfg.seed = (static_cast<std::uint64_t>(entropy()) << 32) ^ entropy();
    err << "factkb: no --seed given; using entropy seed " << cfg.seed << '\n';
  }
  c.synth.seed = cfg.seed;
  cfg.workers = c.workers;
  cfg.sample_with_replacement = !c.without_replacement;
  c.synth.sample_with_replacement = cfg.sample_with_replacement;
  cfg.validate();

  LoadOptions options;
  options.add_inverse = c.add_inverse;
  const auto kb = load_kb_file(c.kb_path, options);

  const auto& strategy = c.subcommand.back();
  std::vector<Document> docs;
  if (strategy == "entity-wiki") {
    docs = synth_entity_wiki(kb, cfg);
  } else if (strategy == "evidence") {
    const auto desc = load_descriptions_file(c.descriptions_path, kb);
    if (desc.skipped_unknown() > 0) {
      err << "factkb: skipped " << desc.skipped_unknown()
          << " description lines naming entities absent from the KB\n";
    }
    docs = synth_evidence(kb, desc, cfg);
    if (docs.empty()) {
      err << "factkb: warning: no triple has a described subject; the corpus is empty\n";
    }
  } else {
    docs = synth_knowledge_walk(kb, cfg);
  }

  const auto masked = mask_corpus(docs, cfg.mask_prob, cfg.seed, c.mask, cfg.workers);

  Output sink(c.output_path, out);
  const auto count = write_corpus(masked, cfg.seed, sink.stream());
  sink.close();

  std::size_t tokens = 0, units = 0, masks = 0;
  std::unordered_set<std::string> distinct;
  for (const auto& md : masked) {
    const auto text = md.document.render();
    tokens += whitespace_tokens(text);
    units += md.document.units.size();
    masks += md.masked_unit_indices.size();
    distinct.insert(text);
  }
  const double duplicate_rate =
      count == 0 ? 0.0 : 1.0 - static_cast<double>(distinct.size()) / static_cast<double>(count);

  ordered_json summary;
  summary["documents"] = count;
  summary["units"] = units;
  summary["masked_units"] = masks;
  summary["whitespace_tokens"] = tokens;
  summary["duplicate_rate"] = duplicate_rate;
  summary["kb_entities"] = kb.num_entities();
  summary["kb_triples"] = kb.num_triples();

  ordered_json meta;
  meta["config"] = resolved_config(c);
  meta["summary"] = summary;
  write_meta(c.output_path, meta);
  err << "factkb: wrote " << count << " documents (" << tokens << " whitespace tokens, "
      << masks << " masked units, duplicate rate " << duplicate_rate << ")\n";
  return kExitOk;
}

int run_prepare(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto format = *parse_format(c.format);
  AdapterManifest manifest = builtin_manifest(format);
  if (!c.manifest_path.empty()) {
    std::ifstream in(c.manifest_path);
    if (!in) throw Error("cannot open manifest " + c.manifest_path);
    manifest = load_manifest(in, format, c.manifest_path);
  }
  const SourceType type = c.input_type == "csv"     ? SourceType::csv
                          : c.input_type == "jsonl" ? SourceType::jsonl
                                                    : SourceType::auto_detect;
  auto source = load_pairs_file(c.input_path, manifest, type);
  const auto loaded = source.size();
  if (c.drop_nei) source = drop_nei(source);
  const auto nei_removed = loaded - source.size();

  if (c.split != "all") {
    std::vector<SourcePair> kept;
    for (auto& p : source) {
      if (!p.split) throw DatasetError(p.id + ": record has no split tag");
      const auto& s = *p.split;
      const bool dev = s == "dev" || s == "val" || s == "valid" || s == "validation";
      if (s == c.split || (c.split == "dev" && dev)) kept.push_back(std::move(p));
    }
    source = std::move(kept);
  }

  auto pairs = to_labeled(source);
  const auto before_exclude = pairs.size();
  if (!c.exclude_subset.empty()) pairs = exclude_subset(pairs, c.exclude_subset);

  Output sink(c.output_path, out);
  write_pairs(pairs, sink.stream());
  sink.close();

  std::size_t factual = 0;
  for (const auto& p : pairs) factual += p.label == Label::factual;
  ordered_json meta;
  meta["config"] = resolved_config(c);
  meta["loaded"] = loaded;
  meta["nei_removed"] = nei_removed;
  meta["excluded"] = before_exclude - pairs.size();
  meta["written"] = pairs.size();
  meta["factual"] = factual;
  meta["non_factual"] = pairs.size() - factual;
  write_meta(c.output_path, meta);
  err << "factkb: loaded " << loaded << ", removed " << nei_removed << " NEI, excluded "
      << before_exclude - pairs.size() << ", wrote " << pairs.size() << " pairs (" << factual
      << " factual / " << pairs.size() - factual << " non_factual)\n";
  return kExitOk;
}

std::array<std::size_t, 3> parse_expected(const std::string& text) {
  const auto parts = text::split(text, ',');
  if (parts.size() != 3) throw ConfigError("--expected wants TRAIN,DEV,TEST");
  std::array<std::size_t, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const auto part = std::string(text::trim(parts[i]));
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("--expected: '" + part + "' is not a count");
    }
    out[i] = std::stoull(part);
  }
  return out;
}

int run_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  DatasetSplit split;
  split.train = read_pairs_file(c.train_path);
  split.dev = read_pairs_file(c.dev_path);
  split.test = read_pairs_file(c.test_path);
  if (!c.expected_counts.empty()) split.expected_counts = parse_expected(c.expected_counts);
  const auto report = verify_split(split);

  static constexpr const char* kNames[] = {"train", "dev", "test"};
  ordered_json j;
  j["passed"] = report.passed;
  j["sizes"] = report.sizes;
  j["expected_counts"] =
      report.expected_counts ? ordered_json(*report.expected_counts) : ordered_json(nullptr);
  j["sizes_match"] = report.sizes_match;
  auto overlaps = ordered_json::array();
  for (const auto& o : report.overlaps) {
    overlaps.push_back({{"id", o.id}, {"first", o.first_split}, {"second", o.second_split}});
  }
  j["overlaps"] = overlaps;
  j["duplicates"] = report.duplicates;
  auto labels = ordered_json::object();
  for (int s = 0; s < 3; ++s) {
    labels[kNames[s]] = {{"factual", report.label_counts[s][0]},
                         {"non_factual", report.label_counts[s][1]}};
  }
  j["label_counts"] = labels;
  out << j.dump(2) << '\n';
  for (const auto& o : report.overlaps) {
    err << "factkb: id '" << o.id << "' appears in both " << o.first_split << " and "
        << o.second_split << '\n';
  }
  if (!report.sizes_match) err << "factkb: split sizes differ from --expected\n";
  return report.passed ? kExitOk : kExitDomainError;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

int run_classify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto gold = read_pairs_file(c.gold_path);
  const auto preds = read_predictions_file(c.pred_path);
  const auto rows = evaluate_classification(gold, preds, c.group_by == "subset");

  ordered_json j;
  j["config"] = resolved_config(c);
  auto jrows = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row;
    row["group"] = r.group;
    row["n"] = r.n;
    row["balanced_accuracy"] =
        r.balanced_accuracy ? ordered_json(*r.balanced_accuracy) : ordered_json(nullptr);
    row["micro_f1"] = r.micro_f1;
    row["confusion"] = {{"tp", r.confusion.tp},
                        {"fp", r.confusion.fp},
                        {"tn", r.confusion.tn},
                        {"fn", r.confusion.fn}};
    jrows.push_back(std::move(row));
  }
  j["rows"] = std::move(jrows);
  out << j.dump(2) << '\n';

  err << std::left << std::setw(16) << "group" << std::right << std::setw(8) << "n"
      << std::setw(10) << "BACC" << std::setw(10) << "F1" << '\n';
  for (const auto& r : rows) {
    err << std::left << std::setw(16) << r.group << std::right << std::setw(8) << r.n
        << std::setw(10) << (r.balanced_accuracy ? fmt(*r.balanced_accuracy) : "undef")
        << std::setw(10) << fmt(r.micro_f1) << '\n';
  }
  return kExitOk;
}

ordered_json correlation_json(const CorrelationResult& r) {
  return {{"coefficient", r.coefficient}, {"p_value", r.p_value}, {"n", r.n}};
}

int run_correlate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto gold = read_pairs_file(c.gold_path);
  const auto preds = read_predictions_file(c.pred_path);
  const auto scores =
      join_scores(gold, preds, c.binary_scores ? ScoreSource::binary : ScoreSource::probability);
  const auto method = c.p_value == "permutation" ? PValueMethod::permutation
                                                 : PValueMethod::student_t;
  const auto report = correlate(gold, scores, method);

  ordered_json j;
  j["config"] = resolved_config(c);
  j["n"] = report.n;
  j["pearson"] = correlation_json(report.pearson);
  j["spearman"] = correlation_json(report.spearman);
  std::vector<AblationRow> ablation;
  if (c.ablation) {
    ablation = category_ablation(gold, scores);
    auto rows = ordered_json::array();
    for (const auto& r : ablation) {
      ordered_json row;
      row["category"] = to_string(r.category);
      row["removed"] = r.removed;
      row["remaining"] = r.remaining;
      row["pearson_delta"] = r.pearson_delta ? ordered_json(*r.pearson_delta) : ordered_json(nullptr);
      row["spearman_delta"] =
          r.spearman_delta ? ordered_json(*r.spearman_delta) : ordered_json(nullptr);
      if (!r.undefined_reason.empty()) row["undefined"] = r.undefined_reason;
      rows.push_back(std::move(row));
    }
    j["ablation"] = std::move(rows);
  }
  out << j.dump(2) << '\n';

  err << std::left << std::setw(12) << "measure" << std::right << std::setw(10) << "coef"
      << std::setw(12) << "p-value" << '\n';
  err << std::left << std::setw(12) << "pearson" << std::right << std::setw(10)
      << fmt(report.pearson.coefficient) << std::setw(12) << std::scientific
      << std::setprecision(2) << report.pearson.p_value << std::defaultfloat << '\n';
  err << std::left << std::setw(12) << "spearman" << std::right << std::setw(10)
      << fmt(report.spearman.coefficient) << std::setw(12) << std::scientific
      << std::setprecision(2) << report.spearman.p_value << std::defaultfloat << '\n';
  for (const auto& r : ablation) {
    err << std::left << std::setw(24) << ("-" + std::string(to_string(r.category))) << std::right
        << std::setw(10) << (r.pearson_delta ? fmt(*r.pearson_delta) : "undef") << std::setw(10)
        << (r.spearman_delta ? fmt(*r.spearman_delta) : "undef") << '\n';
  }
  return kExitOk;
}

std::vector<std::string> selected_chain(const CLI::App& app) {
  std::vector<std::string> chain;
  const CLI::App* cur = &app;
  while (true) {
    const auto subs = cur->get_subcommands();
    if (subs.empty()) break;
    cur = subs.front();
    chain.push_back(cur->get_name());
  }
  return chain;
}

}  // namespace

std::unique_ptr<CLI::App> build_app(RunConfig& config) { return make_app(config); }

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  auto app = make_app(c);
  try {
    auto args = apply_config_file(argv);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app->parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app->exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    err << "factkb: error: " << e.what() << '\n';
    return kExitUsage;
  }

  c.subcommand = selected_chain(*app);
  try {
    const auto& cmd = c.subcommand.front();
    if (cmd == "stats") return run_stats(c, out);
    if (cmd == "synth") return run_synth(c, out, err);
    if (cmd == "dataset") {
      return c.subcommand.back() == "prepare" ? run_prepare(c, out, err) : run_verify(c, out, err);
    }
    if (cmd == "eval") {
      return c.subcommand.back() == "classify" ? run_classify(c, out, err)
                                               : run_correlate(c, out, err);
    }
  } catch (const Error& e) {
    err << "factkb: error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "factkb: error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace factkb::cli
