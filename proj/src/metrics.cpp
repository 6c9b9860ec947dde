#include "factkb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "factkb/errors.hpp"
#include "text_util.hpp"

namespace factkb {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw ConfigError("length mismatch: " + std::to_string(a) + " gold vs " + std::to_string(b) +
                      " predicted");
  }
  if (a == 0) throw ConfigError("empty input");
}

bool constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double pearson_coefficient(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

void check_correlation_input(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ConfigError("length mismatch: " + std::to_string(x.size()) + " vs " +
                      std::to_string(y.size()));
  }
  if (x.size() < 2) throw UndefinedMetricError("correlation needs at least 2 points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw ConfigError("non-finite value at position " + std::to_string(i));
    }
  }
  if (constant(x) || constant(y)) {
    throw UndefinedMetricError("correlation undefined: zero variance");
  }
}

// Exact two-sided permutation p-value: share of the n! orderings of y whose
// |r| reaches the observed |r|.
double permutation_p_value(std::span<const double> x, std::span<const double> y, double observed) {
  if (x.size() > kMaxPermutationN) {
    throw ConfigError("exact permutation p-values support n <= " +
                      std::to_string(kMaxPermutationN));
  }
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> permuted(y.size());
  std::size_t hits = 0, total = 0;
  const double threshold = std::fabs(observed) - 1e-12;
  do {
    for (std::size_t i = 0; i < order.size(); ++i) permuted[i] = y[order[i]];
    if (std::fabs(pearson_coefficient(x, permuted)) >= threshold) ++hits;
    ++total;
  } while (std::next_permutation(order.begin(), order.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const Label> gold, std::span<const Label> pred) {
  check_lengths(gold.size(), pred.size());
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == Label::factual;
    const bool p = pred[i] == Label::factual;
    if (g && p) ++cm.tp;
    else if (!g && p) ++cm.fp;
    else if (!g && !p) ++cm.tn;
    else ++cm.fn;
  }
  return cm;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
  const auto positives = cm.tp + cm.fn;
  const auto negatives = cm.tn + cm.fp;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("balanced accuracy undefined: gold labels are single-class");
  }
  const double tpr = static_cast<double>(cm.tp) / static_cast<double>(positives);
  const double tnr = static_cast<double>(cm.tn) / static_cast<double>(negatives);
  return (tpr + tnr) / 2.0;
}

double balanced_accuracy(std::span<const Label> gold, std::span<const Label> pred) {
  return balanced_accuracy(confusion_matrix(gold, pred));
}

double micro_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ConfigError("empty input");
  // Per class c: TP_c, FP_c, FN_c. The non_factual class sees tn as its TP,
  // fn as its FP and fp as its FN.
  const double tp = static_cast<double>(cm.tp + cm.tn);
  const double fp = static_cast<double>(cm.fp + cm.fn);
  const double fn = static_cast<double>(cm.fn + cm.fp);
  const double precision = tp / (tp + fp);
  const double recall = tp / (tp + fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double micro_f1(std::span<const Label> gold, std::span<const Label> pred) {
  return micro_f1(confusion_matrix(gold, pred));
}

double correlation_p_value(double r, std::size_t n) {
  if (n <= 2) return 1.0;
  const double df = static_cast<double>(n - 2);
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  const double t = std::fabs(r) * std::sqrt(df / (1.0 - r2));
  const boost::math::students_t_distribution<double> dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y,
                          PValueMethod method) {
  check_correlation_input(x, y);
  CorrelationResult r;
  r.n = x.size();
  r.coefficient = pearson_coefficient(x, y);
  r.p_value = method == PValueMethod::student_t ? correlation_p_value(r.coefficient, r.n)
                                                : permutation_p_value(x, y, r.coefficient);
  return r;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share rank mean(i+1 .. j+1).
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           PValueMethod method) {
  check_correlation_input(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry, method);
}

std::vector<PredictionRecord> read_predictions(std::istream& in, const std::string& source_name) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    text::strip_cr(line);
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source_name, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("pred_label") || !j["pred_label"].is_string() ||
        !j.contains("score_factual") || !j["score_factual"].is_number()) {
      throw ParseError(source_name, line_no,
                       "expected {\"id\": str, \"pred_label\": str, \"score_factual\": number}");
    }
    PredictionRecord r;
    r.id = j["id"].get<std::string>();
    if (r.id.empty()) throw ParseError(source_name, line_no, "empty id");
    const auto label = parse_label(j["pred_label"].get<std::string>());
    if (!label) {
      throw ParseError(source_name, line_no,
                       "unknown pred_label '" + j["pred_label"].get<std::string>() + "'");
    }
    r.pred_label = *label;
    r.score_factual = j["score_factual"].get<double>();
    if (!std::isfinite(r.score_factual) || r.score_factual < 0.0 || r.score_factual > 1.0) {
      throw ParseError(source_name, line_no, "score_factual must be a finite value in [0, 1]");
    }
    out.push_back(std::move(r));
  }
  if (in.bad()) throw Error("I/O error reading " + source_name);
  return out;
}

std::vector<PredictionRecord> read_predictions_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open predictions file " + path);
  return read_predictions(in, path);
}

std::string serialize_prediction(const PredictionRecord& record) {
  nlohmann::ordered_json j;
  j["id"] = record.id;
  j["pred_label"] = to_string(record.pred_label);
  j["score_factual"] = record.score_factual;
  return j.dump();
}

namespace {

std::unordered_map<std::string, const PredictionRecord*> index_predictions(
    std::span<const PredictionRecord> predictions) {
  std::unordered_map<std::string, const PredictionRecord*> index;
  for (const auto& p : predictions) {
    if (!index.try_emplace(p.id, &p).second) {
      throw DatasetError("duplicate prediction for id '" + p.id + "'");
    }
  }
  return index;
}

const PredictionRecord& lookup(const std::unordered_map<std::string, const PredictionRecord*>& index,
                               const std::string& id) {
  auto it = index.find(id);
  if (it == index.end()) throw DatasetError("no prediction for id '" + id + "'");
  return *it->second;
}

ClassificationRow make_row(std::string group, const std::vector<Label>& gold,
                           const std::vector<Label>& pred) {
  ClassificationRow row;
  row.group = std::move(group);
  row.n = gold.size();
  row.confusion = confusion_matrix(gold, pred);
  try {
    row.balanced_accuracy = balanced_accuracy(row.confusion);
  } catch (const UndefinedMetricError&) {
    row.balanced_accuracy.reset();
  }
  row.micro_f1 = micro_f1(row.confusion);
  return row;
}

}  // namespace

std::vector<ClassificationRow> evaluate_classification(std::span<const LabeledPair> gold,
                                                       std::span<const PredictionRecord> predictions,
                                                       bool group_by_subset) {
  if (gold.empty()) throw ConfigError("no gold pairs to evaluate");
  const auto index = index_predictions(predictions);

  std::vector<Label> all_gold, all_pred;
  std::map<std::string, std::pair<std::vector<Label>, std::vector<Label>>> groups;
  for (const auto& pair : gold) {
    const auto& p = lookup(index, pair.id);
    all_gold.push_back(pair.label);
    all_pred.push_back(p.pred_label);
    if (group_by_subset) {
      auto& g = groups[pair.subset.value_or("untagged")];
      g.first.push_back(pair.label);
      g.second.push_back(p.pred_label);
    }
  }

  std::vector<ClassificationRow> rows;
  rows.push_back(make_row("all", all_gold, all_pred));
  for (const auto& [name, labels] : groups) rows.push_back(make_row(name, labels.first, labels.second));
  return rows;
}

std::vector<double> join_scores(std::span<const LabeledPair> gold,
                                std::span<const PredictionRecord> predictions, ScoreSource source) {
  const auto index = index_predictions(predictions);
  std::vector<double> scores;
  scores.reserve(gold.size());
  for (const auto& pair : gold) {
    const auto& p = lookup(index, pair.id);
    scores.push_back(source == ScoreSource::probability
                         ? p.score_factual
                         : (p.pred_label == Label::factual ? 1.0 : 0.0));
  }
  return scores;
}

namespace {

std::vector<double> human_scores(std::span<const LabeledPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.human_score) throw DatasetError(p.id + ": pair has no human score");
    out.push_back(*p.human_score);
  }
  return out;
}

}  // namespace

CorrelationReport correlate(std::span<const LabeledPair> gold, std::span<const double> scores,
                            PValueMethod method) {
  if (gold.size() != scores.size()) throw ConfigError("one score per gold pair required");
  const auto human = human_scores(gold);
  CorrelationReport report;
  report.n = gold.size();
  report.pearson = pearson(scores, human, method);
  report.spearman = spearman(scores, human, method);
  return report;
}

std::vector<AblationRow> category_ablation(std::span<const LabeledPair> pairs,
                                           std::span<const double> scores) {
  if (pairs.size() != scores.size()) throw ConfigError("one score per pair required");
  const auto human = human_scores(pairs);
  const double pearson_all = pearson(scores, human).coefficient;
  const double spearman_all = spearman(scores, human).coefficient;

  std::vector<AblationRow> rows;
  for (auto category : kErrorCategories) {
    AblationRow row;
    row.category = category;
    std::vector<double> kept_scores, kept_human;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].error_categories.contains(category)) {
        ++row.removed;
      } else {
        kept_scores.push_back(scores[i]);
        kept_human.push_back(human[i]);
      }
    }
    row.remaining = kept_scores.size();
    if (row.remaining < 2) {
      row.undefined_reason = "fewer than 2 pairs remain";
    } else {
      try {
        row.pearson_delta = pearson(kept_scores, kept_human).coefficient - pearson_all;
        row.spearman_delta = spearman(kept_scores, kept_human).coefficient - spearman_all;
      } catch (const UndefinedMetricError& e) {
        row.pearson_delta.reset();
        row.spearman_delta.reset();
        row.undefined_reason = e.what();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace factkb
