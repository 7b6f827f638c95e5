#ifndef NATDISC_EVAL_H_
#define NATDISC_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "natdisc/common.h"
#include "natdisc/gold.h"

namespace natdisc {

struct Confusion {
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;
  size_t tn = 0;

  size_t total() const { return tp + fp + fn + tn; }
  void Add(int predicted, int actual);
  Confusion& operator+=(const Confusion& o);
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// Positive-class metrics. Precision (recall) is 0 when nothing is predicted
// (present) positive; F1 is 0 when P + R = 0.
struct Metrics {
  double f1 = 0;
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
};

// Throws ContractError on an empty matrix.
Metrics MetricsFrom(const Confusion& c);

using LabelMap = std::unordered_map<std::string, int>;

// Throws ContractError when the id sets differ, are empty, or a label is
// not 0/1.
Confusion ConfusionOf(const LabelMap& predictions, const LabelMap& gold);
Metrics BinaryMetrics(const LabelMap& predictions, const LabelMap& gold);

// Test splits of a k-fold partition.
struct FoldSpec {
  int k = 5;
  uint64_t seed = 0;
  std::string label;  // gold column the folds are stratified on
  std::vector<std::vector<std::string>> folds;  // fold i -> test ids
};

// Ids are sorted, positives and negatives are shuffled separately under
// |seed| and dealt round-robin into k folds (positives first), so fold sizes
// and per-fold positive counts each differ by at most one. Throws
// ContractError when there are fewer than k samples or k positives.
FoldSpec MakeFolds(const GoldDataset& data, GoldLabel label, int k,
                   uint64_t seed);

// {"k", "seed", "label", "n", "folds": [[ids...], ...]}; folds are numbered
// from 1 in file names and reports, stored 0-based here.
std::string FoldSpecJson(const FoldSpec& spec);
FoldSpec ParseFoldSpec(std::string_view json_text);
FoldSpec LoadFoldSpec(const std::filesystem::path& path);

// Produces 0/1 predictions for the test ids of one fold.
class PredictionRunner {
 public:
  virtual ~PredictionRunner() = default;
  virtual std::string name() const = 0;
  // |fold| counts from 1.
  virtual LabelMap Predict(const GoldDataset& data,
                           const std::vector<std::string>& train_ids,
                           const std::vector<std::string>& test_ids,
                           int fold) = 0;
};

class ConstantRunner : public PredictionRunner {
 public:
  explicit ConstantRunner(int value) : value_(value) {}
  std::string name() const override;
  LabelMap Predict(const GoldDataset& data, const std::vector<std::string>&,
                   const std::vector<std::string>& test_ids, int) override;

 private:
  int value_;
};

// Reads predictions written by an external trainer: one jsonl file per fold,
// records {sample_id, prob, pred}. pred wins when present, otherwise
// prob >= threshold. The path template's "{fold}" is replaced by the fold
// number. A missing file, unknown id or missing test id is an error.
class PredictionFileRunner : public PredictionRunner {
 public:
  PredictionFileRunner(std::string path_template, std::string model_name,
                       double threshold = 0.5);
  std::string name() const override { return model_; }
  std::filesystem::path PathFor(int fold) const;
  LabelMap Predict(const GoldDataset& data, const std::vector<std::string>&,
                   const std::vector<std::string>& test_ids, int fold) override;

 private:
  std::string template_;
  std::string model_;
  double threshold_;
};

LabelMap ReadPredictionFile(const std::filesystem::path& path, double threshold);

struct CVReport {
  std::string model;
  std::string label;
  std::string hyper;  // free-form hyperparameter tag
  std::vector<Metrics> folds;
  std::vector<Confusion> confusions;
  Metrics mean;
  Metrics std;  // population standard deviation over the folds
  bool complete = false;
  std::optional<int> failed_fold;  // counts from 1
  std::string error;
};

// Mean and population std of each metric over |folds|.
void Summarize(const std::vector<Metrics>& folds, Metrics& mean, Metrics& std);

// Runs every fold in order. A runner error stops the run; the report then
// holds the folds completed so far, complete=false and the error.
CVReport CrossValidate(PredictionRunner& runner, const GoldDataset& data,
                       const FoldSpec& folds, const std::string& hyper = "");

std::string CVReportJson(const CVReport& report);
CVReport ParseCVReport(std::string_view json_text);

enum class MetricName { kF1, kAccuracy, kPrecision, kRecall };
std::optional<MetricName> ParseMetricName(std::string_view name);
double MetricValue(const Metrics& m, MetricName name);

// "0.9419 (0.0081)".
std::string FormatCell(double mean, double std);

struct ResultsTable {
  struct Row {
    std::string label;
    std::string hyper;
    std::vector<std::optional<std::string>> cells;  // per model column
    std::vector<bool> best;
  };
  MetricName metric = MetricName::kF1;
  std::vector<std::string> models;  // first-seen order
  std::vector<Row> rows;            // first-seen order of (label, hyper)

  std::string Csv() const;
  std::string Text() const;  // aligned columns, best cells marked with '*'
};

// Throws ContractError on an empty list.
ResultsTable MakeResultsTable(const std::vector<CVReport>& reports,
                              MetricName metric = MetricName::kF1);

}  // namespace natdisc

#endif  // NATDISC_EVAL_H_
