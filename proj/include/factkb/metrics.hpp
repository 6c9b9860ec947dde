#pragma once
// Factuality-classifier evaluation: balanced accuracy, micro F1, Pearson and
// Spearman correlation with two-sided p-values, per-subset breakdowns and the
// error-category ablation.
//
// Positive class is `factual`. Undefined metrics throw UndefinedMetricError.

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factkb/datasets.hpp"

namespace factkb {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct CorrelationResult {
  double coefficient = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

enum class PValueMethod { student_t, permutation };

// Largest n accepted by the exact permutation test (n! orderings).
inline constexpr std::size_t kMaxPermutationN = 10;

ConfusionMatrix confusion_matrix(std::span<const Label> gold, std::span<const Label> pred);

// (TPR + TNR) / 2.
double balanced_accuracy(std::span<const Label> gold, std::span<const Label> pred);
double balanced_accuracy(const ConfusionMatrix& cm);

// Micro-averaged F1 over both classes. For single-label binary data this is
// the accuracy.
double micro_f1(std::span<const Label> gold, std::span<const Label> pred);
double micro_f1(const ConfusionMatrix& cm);

// Two-sided p-value of a correlation coefficient under H0: rho = 0, using
// t = r sqrt((n-2)/(1-r^2)) with n-2 degrees of freedom. n = 2 gives 1.
double correlation_p_value(double r, std::size_t n);

CorrelationResult pearson(std::span<const double> x, std::span<const double> y,
                          PValueMethod method = PValueMethod::student_t);

// Average (fractional) ranks, 1-based; ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           PValueMethod method = PValueMethod::student_t);

struct PredictionRecord {
  std::string id;
  Label pred_label = Label::factual;
  double score_factual = 0.0;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

// Line-delimited {id, pred_label, score_factual}.
std::vector<PredictionRecord> read_predictions(std::istream& in,
                                               const std::string& source_name = "<predictions>");
std::vector<PredictionRecord> read_predictions_file(const std::string& path);
std::string serialize_prediction(const PredictionRecord& record);

struct ClassificationRow {
  std::string group;
  std::size_t n = 0;
  ConfusionMatrix confusion;
  // Unset when the group's gold labels are single-class.
  std::optional<double> balanced_accuracy;
  double micro_f1 = 0.0;
};

// Joins predictions to gold pairs by id. Emits an "all" row, then one row per
// subset tag (sorted) when group_by_subset is set; pairs without a subset are
// grouped under "untagged". Throws DatasetError on a missing or duplicated
// prediction id.
std::vector<ClassificationRow> evaluate_classification(std::span<const LabeledPair> gold,
                                                       std::span<const PredictionRecord> predictions,
                                                       bool group_by_subset = false);

enum class ScoreSource { probability, binary };

struct CorrelationReport {
  std::size_t n = 0;
  CorrelationResult pearson;
  CorrelationResult spearman;
};

// Model score per gold pair, in gold order: score_factual, or 1/0 from
// pred_label with ScoreSource::binary.
std::vector<double> join_scores(std::span<const LabeledPair> gold,
                                std::span<const PredictionRecord> predictions,
                                ScoreSource source = ScoreSource::probability);

// Correlation of model scores with human_score (required on every pair).
CorrelationReport correlate(std::span<const LabeledPair> gold, std::span<const double> scores,
                            PValueMethod method = PValueMethod::student_t);

struct AblationRow {
  ErrorCategory category;
  std::size_t removed = 0;
  std::size_t remaining = 0;
  // coefficient without the category minus coefficient over all pairs; unset
  // when the reduced set leaves the correlation undefined.
  std::optional<double> pearson_delta;
  std::optional<double> spearman_delta;
  std::string undefined_reason;
};

// For each error category, recomputes both correlations on the pairs not
// tagged with it and reports the change against the full set.
std::vector<AblationRow> category_ablation(std::span<const LabeledPair> pairs,
                                           std::span<const double> scores);

}  // namespace factkb
