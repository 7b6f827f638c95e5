#ifndef NATDISC_BASELINE_H_
#define NATDISC_BASELINE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "natdisc/eval.h"
#include "natdisc/gold.h"
#include "natdisc/keywords.h"

namespace natdisc {

// Biodiversity keyword classifier: a sentence is positive when it holds a
// "specific" pattern and an "additional" pattern at different spans.
// Matching is the keyword engine's (case-insensitive, space-padded).
class TwoLayerRule {
 public:
  // Throws ContractError if either list is empty.
  TwoLayerRule(std::vector<std::string> specific,
               std::vector<std::string> additional);

  static const TwoLayerRule& Builtin();
  // Pattern files in the keyword list format; "# ..." lines are comments.
  static TwoLayerRule Load(const std::filesystem::path& specific,
                           const std::filesystem::path& additional);

  const KeywordSet& specific() const { return specific_; }
  const KeywordSet& additional() const { return additional_; }

 private:
  KeywordSet specific_;
  KeywordSet additional_;
};

const std::vector<std::string>& BuiltinSpecificPatterns();
// Pooled over the four groups, in listing order.
const std::vector<std::string>& BuiltinAdditionalPatterns();

int ClassifyTwoLayer(std::string_view text, const TwoLayerRule& rule);

struct BaselineReport {
  GoldLabel target = GoldLabel::kBiodiversity;
  Confusion confusion;
  Metrics metrics;
  // Sorted by sample id, at most |max_examples| each.
  std::vector<const GoldSample*> false_positives;
  std::vector<const GoldSample*> false_negatives;
  double seconds = 0;
};

// Reference values of the keyword approach on the full published dataset.
std::optional<Metrics> ReferenceBaselineMetrics(GoldLabel target);

// Throws InputError when the gold data lacks the target column.
BaselineReport EvaluateBaseline(const GoldDataset& gold, GoldLabel target,
                                const TwoLayerRule& rule,
                                size_t max_examples = 20, unsigned threads = 0);

// Metrics, confusion counts, error examples and, when known, the reference
// values with their differences.
std::string BaselineReportJson(const BaselineReport& report);
// actual,predicted_0,predicted_1 rows for actual 0 and 1.
std::string ConfusionCsv(const Confusion& c);

// Predicts with the rule; ignores the training split.
class BaselineRunner : public PredictionRunner {
 public:
  explicit BaselineRunner(const TwoLayerRule& rule) : rule_(rule) {}
  std::string name() const override { return "keyword-baseline"; }
  LabelMap Predict(const GoldDataset& data, const std::vector<std::string>&,
                   const std::vector<std::string>& test_ids, int) override;

 private:
  const TwoLayerRule& rule_;
};

}  // namespace natdisc

#endif  // NATDISC_BASELINE_H_
