#include "natdisc/eval.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "json.hpp"
#include "natdisc/sampling.h"
#include "natdisc/text_util.h"

namespace natdisc {
namespace {

using json = nlohmann::json;

double Ratio(size_t num, size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void CheckBinary(int v, const std::string& id) {
  if (v != 0 && v != 1) {
    throw ContractError("label for \"" + id + "\" is not 0/1: " + std::to_string(v));
  }
}

json MetricsJson(const Metrics& m) {
  return {{"f1", m.f1}, {"accuracy", m.accuracy}, {"precision", m.precision},
          {"recall", m.recall}};
}

Metrics MetricsFromJson(const json& j) {
  return {j.at("f1").get<double>(), j.at("accuracy").get<double>(),
          j.at("precision").get<double>(), j.at("recall").get<double>()};
}

json ConfusionJson(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

Confusion ConfusionFromJson(const json& j) {
  return {j.at("tp").get<size_t>(), j.at("fp").get<size_t>(),
          j.at("fn").get<size_t>(), j.at("tn").get<size_t>()};
}

}  // namespace

void Confusion::Add(int predicted, int actual) {
  if (predicted) {
    ++(actual ? tp : fp);
  } else {
    ++(actual ? fn : tn);
  }
}

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

Metrics MetricsFrom(const Confusion& c) {
  if (c.total() == 0) throw ContractError("metrics of an empty sample");
  Metrics m;
  m.precision = Ratio(c.tp, c.tp + c.fp);
  m.recall = Ratio(c.tp, c.tp + c.fn);
  m.accuracy = Ratio(c.tp + c.tn, c.total());
  const double pr = m.precision + m.recall;
  m.f1 = pr > 0 ? 2 * m.precision * m.recall / pr : 0.0;
  return m;
}

Confusion ConfusionOf(const LabelMap& predictions, const LabelMap& gold) {
  if (gold.empty()) throw ContractError("empty evaluation set");
  if (predictions.size() != gold.size()) {
    throw ContractError("prediction ids (" + std::to_string(predictions.size()) +
                        ") do not match gold ids (" + std::to_string(gold.size()) +
                        ")");
  }
  Confusion c;
  for (const auto& [id, actual] : gold) {
    auto it = predictions.find(id);
    if (it == predictions.end()) {
      throw ContractError("no prediction for \"" + id + "\"");
    }
    CheckBinary(actual, id);
    CheckBinary(it->second, id);
    c.Add(it->second, actual);
  }
  return c;
}

Metrics BinaryMetrics(const LabelMap& predictions, const LabelMap& gold) {
  return MetricsFrom(ConfusionOf(predictions, gold));
}

FoldSpec MakeFolds(const GoldDataset& data, GoldLabel label, int k,
                   uint64_t seed) {
  data.Require(label);
  if (k < 2) throw ContractError("k must be at least 2");
  const size_t kk = static_cast<size_t>(k);
  if (data.samples.size() < kk) {
    throw ContractError("cannot make " + std::to_string(k) + " folds from " +
                        std::to_string(data.samples.size()) + " samples");
  }
  std::vector<std::string> pos;
  std::vector<std::string> neg;
  for (const auto& s : data.samples) {
    (s.label(label) ? pos : neg).push_back(s.sample_id);
  }
  if (pos.size() < kk) {
    throw ContractError("stratified folds need at least " + std::to_string(k) +
                        " positive samples, got " + std::to_string(pos.size()));
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  Rng rng(seed);
  Shuffle(pos, rng);
  Shuffle(neg, rng);
  FoldSpec spec;
  spec.k = k;
  spec.seed = seed;
  spec.label = std::string(GoldLabelName(label));
  spec.folds.resize(kk);
  size_t slot = 0;
  for (auto* group : {&pos, &neg}) {
    for (auto& id : *group) spec.folds[slot++ % kk].push_back(std::move(id));
  }
  return spec;
}

std::string FoldSpecJson(const FoldSpec& spec) {
  size_t n = 0;
  for (const auto& f : spec.folds) n += f.size();
  json j = {{"k", spec.k},
            {"seed", spec.seed},
            {"label", spec.label},
            {"n", n},
            {"folds", spec.folds}};
  return j.dump(1);
}

FoldSpec ParseFoldSpec(std::string_view json_text) {
  FoldSpec spec;
  try {
    json j = json::parse(json_text);
    spec.k = j.at("k").get<int>();
    spec.seed = j.at("seed").get<uint64_t>();
    spec.label = j.value("label", "");
    spec.folds = j.at("folds").get<std::vector<std::vector<std::string>>>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed fold spec: ") + e.what());
  }
  if (spec.k < 2 || spec.folds.size() != static_cast<size_t>(spec.k)) {
    throw InputError("fold spec k does not match its fold list");
  }
  std::unordered_set<std::string> seen;
  for (const auto& f : spec.folds) {
    for (const auto& id : f) {
      if (!seen.insert(id).second) {
        throw InputError("fold spec lists \"" + id + "\" twice");
      }
    }
  }
  return spec;
}

FoldSpec LoadFoldSpec(const std::filesystem::path& path) {
  return ParseFoldSpec(ReadFile(path));
}

std::string ConstantRunner::name() const {
  return "constant-" + std::to_string(value_);
}

LabelMap ConstantRunner::Predict(const GoldDataset&,
                                 const std::vector<std::string>&,
                                 const std::vector<std::string>& test_ids, int) {
  LabelMap out;
  for (const auto& id : test_ids) out[id] = value_;
  return out;
}

PredictionFileRunner::PredictionFileRunner(std::string path_template,
                                           std::string model_name,
                                           double threshold)
    : template_(std::move(path_template)),
      model_(std::move(model_name)),
      threshold_(threshold) {
  if (template_.find("{fold}") == std::string::npos) {
    throw ContractError("prediction path template lacks {fold}: " + template_);
  }
  if (!(threshold_ >= 0 && threshold_ <= 1)) {
    throw ContractError("threshold must lie in [0, 1]");
  }
}

std::filesystem::path PredictionFileRunner::PathFor(int fold) const {
  std::string p = template_;
  const std::string key = "{fold}";
  for (size_t at = p.find(key); at != std::string::npos; at = p.find(key, at)) {
    p.replace(at, key.size(), std::to_string(fold));
  }
  return p;
}

LabelMap ReadPredictionFile(const std::filesystem::path& path, double threshold) {
  if (!std::filesystem::exists(path)) {
    throw InputError("missing prediction file " + path.string());
  }
  auto lines = ReadLines(path);
  LabelMap out;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    std::string where = path.string() + ": line " + std::to_string(i + 1);
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error&) {
      throw InputError(where + ": malformed record");
    }
    if (!j.is_object() || !j.contains("sample_id") || !j["sample_id"].is_string()) {
      throw InputError(where + ": record needs a sample_id");
    }
    std::string id = j["sample_id"].get<std::string>();
    int pred;
    if (j.contains("pred") && !j["pred"].is_null()) {
      if (!j["pred"].is_number_integer() ||
          (j["pred"].get<int>() != 0 && j["pred"].get<int>() != 1)) {
        throw InputError(where + ": pred must be 0 or 1");
      }
      pred = j["pred"].get<int>();
    } else if (j.contains("prob") && j["prob"].is_number()) {
      double prob = j["prob"].get<double>();
      if (!(prob >= 0 && prob <= 1)) throw InputError(where + ": prob outside [0, 1]");
      pred = prob >= threshold ? 1 : 0;
    } else {
      throw InputError(where + ": record has neither pred nor prob");
    }
    if (!out.emplace(id, pred).second) {
      throw InputError(where + ": duplicate sample_id \"" + id + "\"");
    }
  }
  return out;
}

LabelMap PredictionFileRunner::Predict(const GoldDataset&,
                                       const std::vector<std::string>&,
                                       const std::vector<std::string>& test_ids,
                                       int fold) {
  auto path = PathFor(fold);
  LabelMap preds = ReadPredictionFile(path, threshold_);
  LabelMap out;
  for (const auto& id : test_ids) {
    auto it = preds.find(id);
    if (it == preds.end()) {
      throw InputError(path.string() + ": no prediction for \"" + id + "\"");
    }
    out[id] = it->second;
  }
  if (preds.size() != out.size()) {
    throw InputError(path.string() + ": predictions for ids outside fold " +
                     std::to_string(fold));
  }
  return out;
}

void Summarize(const std::vector<Metrics>& folds, Metrics& mean, Metrics& std) {
  mean = Metrics{};
  std = Metrics{};
  if (folds.empty()) return;
  const double n = static_cast<double>(folds.size());
  auto fields = [](Metrics& m) {
    return std::array<double*, 4>{&m.f1, &m.accuracy, &m.precision, &m.recall};
  };
  auto mf = fields(mean);
  auto sf = fields(std);
  for (size_t f = 0; f < 4; ++f) {
    double sum = 0;
    for (Metrics m : folds) sum += *fields(m)[f];
    *mf[f] = sum / n;
    double ss = 0;
    for (Metrics m : folds) {
      double d = *fields(m)[f] - *mf[f];
      ss += d * d;
    }
    *sf[f] = std::sqrt(ss / n);
  }
}

CVReport CrossValidate(PredictionRunner& runner, const GoldDataset& data,
                       const FoldSpec& folds, const std::string& hyper) {
  auto label = ParseGoldLabel(folds.label);
  if (!label) throw ContractError("fold spec has unknown label \"" + folds.label + "\"");
  data.Require(*label);
  std::unordered_map<std::string, int> gold;
  for (const auto& s : data.samples) gold[s.sample_id] = s.label(*label);
  size_t covered = 0;
  for (const auto& f : folds.folds) {
    for (const auto& id : f) {
      if (!gold.count(id)) {
        throw ContractError("fold spec id \"" + id + "\" is not in the dataset");
      }
    }
    covered += f.size();
  }
  if (covered != gold.size()) {
    throw ContractError("fold spec does not cover the dataset");
  }

  CVReport report;
  report.model = runner.name();
  report.label = folds.label;
  report.hyper = hyper;
  for (size_t i = 0; i < folds.folds.size(); ++i) {
    const auto& test = folds.folds[i];
    std::vector<std::string> train;
    for (size_t j = 0; j < folds.folds.size(); ++j) {
      if (j != i) train.insert(train.end(), folds.folds[j].begin(), folds.folds[j].end());
    }
    const int fold = static_cast<int>(i) + 1;
    try {
      LabelMap preds = runner.Predict(data, train, test, fold);
      LabelMap truth;
      for (const auto& id : test) truth[id] = gold[id];
      Confusion c = ConfusionOf(preds, truth);
      report.confusions.push_back(c);
      report.folds.push_back(MetricsFrom(c));
    } catch (const std::exception& e) {
      report.failed_fold = fold;
      report.error = e.what();
      break;
    }
  }
  report.complete = !report.failed_fold;
  Summarize(report.folds, report.mean, report.std);
  return report;
}

std::string CVReportJson(const CVReport& r) {
  json folds = json::array();
  for (size_t i = 0; i < r.folds.size(); ++i) {
    json f = MetricsJson(r.folds[i]);
    f["fold"] = i + 1;
    f["confusion"] = ConfusionJson(r.confusions[i]);
    folds.push_back(f);
  }
  json j = {{"model", r.model},   {"label", r.label},
            {"hyper", r.hyper},   {"complete", r.complete},
            {"folds", folds},     {"mean", MetricsJson(r.mean)},
            {"std", MetricsJson(r.std)}};
  if (r.failed_fold) {
    j["failed_fold"] = *r.failed_fold;
    j["error"] = r.error;
  }
  return j.dump(2);
}

CVReport ParseCVReport(std::string_view json_text) {
  CVReport r;
  try {
    json j = json::parse(json_text);
    r.model = j.at("model").get<std::string>();
    r.label = j.at("label").get<std::string>();
    r.hyper = j.value("hyper", "");
    r.complete = j.value("complete", false);
    for (const auto& f : j.at("folds")) {
      r.folds.push_back(MetricsFromJson(f));
      r.confusions.push_back(ConfusionFromJson(f.at("confusion")));
    }
    r.mean = MetricsFromJson(j.at("mean"));
    r.std = MetricsFromJson(j.at("std"));
    if (j.contains("failed_fold")) {
      r.failed_fold = j["failed_fold"].get<int>();
      r.error = j.value("error", "");
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed cv report: ") + e.what());
  }
  return r;
}

std::optional<MetricName> ParseMetricName(std::string_view name) {
  if (name == "f1") return MetricName::kF1;
  if (name == "accuracy") return MetricName::kAccuracy;
  if (name == "precision") return MetricName::kPrecision;
  if (name == "recall") return MetricName::kRecall;
  return std::nullopt;
}

double MetricValue(const Metrics& m, MetricName name) {
  switch (name) {
    case MetricName::kF1: return m.f1;
    case MetricName::kAccuracy: return m.accuracy;
    case MetricName::kPrecision: return m.precision;
    case MetricName::kRecall: return m.recall;
  }
  return 0;
}

std::string FormatCell(double mean, double std) {
  return fmt::format("{:.4f} ({:.4f})", mean, std);
}

ResultsTable MakeResultsTable(const std::vector<CVReport>& reports,
                              MetricName metric) {
  if (reports.empty()) throw ContractError("no reports to tabulate");
  ResultsTable table;
  table.metric = metric;
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : reports) {
    if (std::find(table.models.begin(), table.models.end(), r.model) ==
        table.models.end()) {
      table.models.push_back(r.model);
    }
    std::pair<std::string, std::string> key{r.label, r.hyper};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [label, hyper] : keys) {
    ResultsTable::Row row;
    row.label = label;
    row.hyper = hyper;
    row.cells.assign(table.models.size(), std::nullopt);
    row.best.assign(table.models.size(), false);
    std::vector<std::optional<double>> means(table.models.size());
    for (const auto& r : reports) {
      if (r.label != label || r.hyper != hyper) continue;
      size_t col = static_cast<size_t>(
          std::find(table.models.begin(), table.models.end(), r.model) -
          table.models.begin());
      means[col] = MetricValue(r.mean, metric);
      row.cells[col] = FormatCell(MetricValue(r.mean, metric), MetricValue(r.std, metric));
    }
    std::optional<double> best;
    for (const auto& m : means) {
      if (m && (!best || *m > *best)) best = m;
    }
    for (size_t c = 0; c < means.size(); ++c) row.best[c] = means[c] && *means[c] == *best;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string ResultsTable::Csv() const {
  std::vector<std::string> header = {"label", "hyper"};
  for (const auto& m : models) {
    header.push_back(m);
    header.push_back(m + "_best");
  }
  std::string out = CsvLine(header);
  for (const auto& row : rows) {
    std::vector<std::string> fields = {row.label, row.hyper};
    for (size_t c = 0; c < models.size(); ++c) {
      fields.push_back(row.cells[c].value_or(""));
      fields.push_back(row.best[c] ? "1" : "0");
    }
    out += CsvLine(fields);
  }
  return out;
}

std::string ResultsTable::Text() const {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"label", "hyper"};
  header.insert(header.end(), models.begin(), models.end());
  grid.push_back(header);
  for (const auto& row : rows) {
    std::vector<std::string> line = {row.label, row.hyper.empty() ? "-" : row.hyper};
    for (size_t c = 0; c < models.size(); ++c) {
      line.push_back(row.cells[c] ? *row.cells[c] + (row.best[c] ? " *" : "") : "-");
    }
    grid.push_back(std::move(line));
  }
  std::vector<size_t> width(header.size(), 0);
  for (const auto& line : grid) {
    for (size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (const auto& line : grid) {
    std::string text;
    for (size_t c = 0; c < line.size(); ++c) {
      if (c) text += "  ";
      text += fmt::format("{:<{}}", line[c], width[c]);
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text + '\n';
  }
  return out;
}

}  // namespace natdisc
