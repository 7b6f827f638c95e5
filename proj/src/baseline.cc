#include "natdisc/baseline.h"

#include <algorithm>
#include <chrono>
#include <set>

#include "json.hpp"
#include "natdisc/parallel.h"

namespace natdisc {
namespace {

using json = nlohmann::json;

std::vector<std::string> ReadPatternFile(const std::filesystem::path& path) {
  KeywordSet set = KeywordSet::Load(Dimension::kBiodiversity, path);
  return set.raws();
}

}  // namespace

const std::vector<std::string>& BuiltinSpecificPatterns() {
  static const std::vector<std::string> kSpecific = {
      "biodiversity", "ecosystem", "ecology", "ecological", "habitat",
      "species", "forest", "deforestation", "fauna", "flora", "marine",
      "tropical", "freshwater", "wetland", "wildlife", "coral", "aquatic",
      "desertification", "carbon sink", "ecosphere", "biosphere"};
  return kSpecific;
}

const std::vector<std::string>& BuiltinAdditionalPatterns() {
  static const std::vector<std::string> kAdditional = {
      // Ecosystem
      "climate", "coast", "forest", "micro", "natur", "public health",
      "sustaina", "water",
      // Marine
      "marine biodiversity", "marine ecosystem", "marine environment",
      "marine life", "marine species",
      // Tropical
      "tropical biodiversity", "tropical ecosystem", "tropical environment",
      "tropical forest", "tropical species",
      // Species
      "aquatic", "biodiversity", "bird", "endanger", "environment", "fish",
      "habitat", "invasive", "list", "marine", "protect", "threat", "ESA",
      "EPA"};
  return kAdditional;
}

TwoLayerRule::TwoLayerRule(std::vector<std::string> specific,
                           std::vector<std::string> additional)
    : specific_(Dimension::kBiodiversity, std::move(specific)),
      additional_(Dimension::kBiodiversity, std::move(additional)) {
  if (specific_.size() == 0 || additional_.size() == 0) {
    throw ContractError("both layers of the rule need patterns");
  }
}

const TwoLayerRule& TwoLayerRule::Builtin() {
  static const TwoLayerRule kRule(BuiltinSpecificPatterns(),
                                  BuiltinAdditionalPatterns());
  return kRule;
}

TwoLayerRule TwoLayerRule::Load(const std::filesystem::path& specific,
                                const std::filesystem::path& additional) {
  return TwoLayerRule(ReadPatternFile(specific), ReadPatternFile(additional));
}

int ClassifyTwoLayer(std::string_view text, const TwoLayerRule& rule) {
  auto spec = rule.specific().Match(text);
  if (spec.empty()) return 0;
  auto add = rule.additional().Match(text);
  if (add.empty()) return 0;
  // Only a lone shared span fails: any second span pairs with something.
  std::set<std::pair<size_t, size_t>> s;
  std::set<std::pair<size_t, size_t>> a;
  for (const auto& h : spec) s.emplace(h.offset, h.length);
  for (const auto& h : add) a.emplace(h.offset, h.length);
  if (s.size() == 1 && a.size() == 1 && s == a) return 0;
  return 1;
}

std::optional<Metrics> ReferenceBaselineMetrics(GoldLabel target) {
  switch (target) {
    case GoldLabel::kBiodiversity:
      return Metrics{0.6303, 0.8427, 0.7623, 0.5373};
    case GoldLabel::kNature:
      return Metrics{0.6100, 0.6978, 0.4498, 0.9472};
    default:
      return std::nullopt;
  }
}

BaselineReport EvaluateBaseline(const GoldDataset& gold, GoldLabel target,
                                const TwoLayerRule& rule, size_t max_examples,
                                unsigned threads) {
  gold.Require(target);
  auto start = std::chrono::steady_clock::now();
  const size_t n = gold.samples.size();
  std::vector<int> pred(n);
  ParallelFor(n, threads ? threads : DefaultThreads(), [&](size_t i) {
    pred[i] = ClassifyTwoLayer(gold.samples[i].text, rule);
  });
  BaselineReport report;
  report.target = target;
  for (size_t i = 0; i < n; ++i) {
    const GoldSample& s = gold.samples[i];
    int actual = s.label(target);
    report.confusion.Add(pred[i], actual);
    if (pred[i] && !actual) report.false_positives.push_back(&s);
    if (!pred[i] && actual) report.false_negatives.push_back(&s);
  }
  report.metrics = MetricsFrom(report.confusion);
  for (auto* list : {&report.false_positives, &report.false_negatives}) {
    std::sort(list->begin(), list->end(),
              [](const GoldSample* a, const GoldSample* b) {
                return a->sample_id < b->sample_id;
              });
    if (list->size() > max_examples) list->resize(max_examples);
  }
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

std::string BaselineReportJson(const BaselineReport& r) {
  auto metrics = [](const Metrics& m) {
    return json{{"f1", m.f1}, {"accuracy", m.accuracy},
                {"precision", m.precision}, {"recall", m.recall}};
  };
  auto examples = [](const std::vector<const GoldSample*>& list) {
    json out = json::array();
    for (const auto* s : list) out.push_back({{"sample_id", s->sample_id}, {"text", s->text}});
    return out;
  };
  json j;
  j["target"] = GoldLabelName(r.target);
  j["n"] = r.confusion.total();
  j["metrics"] = metrics(r.metrics);
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp},
                    {"fn", r.confusion.fn}, {"tn", r.confusion.tn}};
  if (auto ref = ReferenceBaselineMetrics(r.target)) {
    j["reference"] = metrics(*ref);
    j["delta"] = metrics({r.metrics.f1 - ref->f1, r.metrics.accuracy - ref->accuracy,
                          r.metrics.precision - ref->precision,
                          r.metrics.recall - ref->recall});
  }
  j["false_positives"] = examples(r.false_positives);
  j["false_negatives"] = examples(r.false_negatives);
  return j.dump(2);
}

std::string ConfusionCsv(const Confusion& c) {
  return "actual,predicted_0,predicted_1\n0," + std::to_string(c.tn) + "," +
         std::to_string(c.fp) + "\n1," + std::to_string(c.fn) + "," +
         std::to_string(c.tp) + "\n";
}

LabelMap BaselineRunner::Predict(const GoldDataset& data,
                                 const std::vector<std::string>&,
                                 const std::vector<std::string>& test_ids, int) {
  std::unordered_map<std::string_view, const GoldSample*> by_id;
  for (const auto& s : data.samples) by_id[s.sample_id] = &s;
  LabelMap out;
  for (const auto& id : test_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw InputError("unknown sample \"" + id + "\"");
    out[id] = ClassifyTwoLayer(it->second->text, rule_);
  }
  return out;
}

}  // namespace natdisc
