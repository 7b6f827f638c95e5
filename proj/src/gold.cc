#include "natdisc/gold.h"

#include <unordered_set>

#include "json.hpp"
#include "natdisc/text_util.h"

namespace natdisc {
namespace {

using json = nlohmann::json;

constexpr std::array<std::string_view, 4> kLabelNames = {
    "water", "forest", "biodiversity", "nature"};

int ParseBinaryCell(std::string_view cell, const std::string& where) {
  std::string_view v = Trim(cell);
  if (v == "0" || v == "0.0" || v == "false" || v == "False") return 0;
  if (v == "1" || v == "1.0" || v == "true" || v == "True") return 1;
  throw InputError(where + ": label must be 0 or 1, got \"" +
                   std::string(v) + "\"");
}

int ParseBinaryJson(const json& v, const std::string& where) {
  if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
  if (v.is_number_integer()) {
    auto n = v.get<long long>();
    if (n == 0 || n == 1) return static_cast<int>(n);
  }
  if (v.is_string()) return ParseBinaryCell(v.get<std::string>(), where);
  throw InputError(where + ": label must be 0 or 1, got " + v.dump());
}

void Finish(GoldDataset& ds, const std::string& origin) {
  std::unordered_set<std::string> seen;
  for (const auto& s : ds.samples) {
    if (!seen.insert(s.sample_id).second) {
      throw InputError(origin + ": duplicate sample_id \"" + s.sample_id + "\"");
    }
  }
  if (!ds.has(GoldLabel::kNature) && ds.has(GoldLabel::kWater) &&
      ds.has(GoldLabel::kForest) && ds.has(GoldLabel::kBiodiversity)) {
    for (auto& s : ds.samples) s.DeriveNature();
    ds.has_label[3] = true;
  }
}

}  // namespace

std::string_view GoldLabelName(GoldLabel label) {
  return kLabelNames[static_cast<size_t>(label)];
}

std::optional<GoldLabel> ParseGoldLabel(std::string_view name) {
  for (size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == name) return static_cast<GoldLabel>(i);
  }
  return std::nullopt;
}

std::string_view ResolutionName(Resolution r) {
  switch (r) {
    case Resolution::kUnanimous: return "Unanimous";
    case Resolution::kMajority: return "Majority";
    case Resolution::kAdjudicated: return "Adjudicated";
  }
  return "";
}

std::optional<Resolution> ParseResolution(std::string_view name) {
  for (Resolution r : {Resolution::kUnanimous, Resolution::kMajority,
                       Resolution::kAdjudicated}) {
    if (ResolutionName(r) == name) return r;
  }
  return std::nullopt;
}

void GoldSample::DeriveNature() {
  labels[3] = (labels[0] | labels[1] | labels[2]) ? 1 : 0;
}

void GoldDataset::Require(GoldLabel l) const {
  if (!has(l)) {
    throw InputError("gold dataset has no \"" + std::string(GoldLabelName(l)) +
                     "\" column");
  }
}

GoldDataset ParseGoldCsv(std::string_view content, const std::string& origin) {
  CsvTable table = CsvTable::Parse(content);
  if (!table.has_column("sample_id") || !table.has_column("text")) {
    throw InputError(origin + ": gold csv needs sample_id and text columns");
  }
  size_t id_col = table.column("sample_id");
  size_t text_col = table.column("text");
  std::array<std::optional<size_t>, 4> cols;
  GoldDataset ds;
  for (size_t l = 0; l < 4; ++l) {
    if (table.has_column(kLabelNames[l])) {
      cols[l] = table.column(kLabelNames[l]);
      ds.has_label[l] = true;
    }
  }
  ds.samples.reserve(table.rows());
  for (size_t r = 0; r < table.rows(); ++r) {
    std::string where = origin + ": row " + std::to_string(r + 2);
    GoldSample s;
    s.sample_id = std::string(Trim(table.at(r, id_col)));
    if (s.sample_id.empty()) throw InputError(where + ": empty sample_id");
    s.text = table.at(r, text_col);
    for (size_t l = 0; l < 4; ++l) {
      if (cols[l]) s.labels[l] = ParseBinaryCell(table.at(r, *cols[l]), where);
    }
    ds.samples.push_back(std::move(s));
  }
  Finish(ds, origin);
  return ds;
}

GoldDataset ParseGoldJsonl(std::string_view content, const std::string& origin) {
  GoldDataset ds;
  bool first = true;
  size_t line_no = 0;
  size_t start = 0;
  while (start <= content.size()) {
    size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = Trim(content.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    std::string where = origin + ": line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw InputError(where + ": malformed record");
    }
    if (!j.is_object() || !j.contains("sample_id") || !j.contains("text") ||
        !j["sample_id"].is_string() || !j["text"].is_string()) {
      throw InputError(where + ": record needs string sample_id and text");
    }
    GoldSample s;
    s.sample_id = j["sample_id"].get<std::string>();
    s.text = j["text"].get<std::string>();
    for (size_t l = 0; l < 4; ++l) {
      bool present = j.contains(kLabelNames[l]);
      if (first) {
        ds.has_label[l] = present;
      } else if (present != ds.has_label[l]) {
        throw InputError(where + ": inconsistent \"" +
                         std::string(kLabelNames[l]) + "\" field");
      }
      if (present) s.labels[l] = ParseBinaryJson(j[kLabelNames[l]], where);
    }
    if (j.contains("resolution") && j["resolution"].is_string()) {
      s.resolution = ParseResolution(j["resolution"].get<std::string>());
    }
    first = false;
    ds.samples.push_back(std::move(s));
  }
  Finish(ds, origin);
  return ds;
}

GoldDataset LoadGold(const std::filesystem::path& path) {
  std::string content = ReadFile(path);
  std::string ext = AsciiLowerCopy(path.extension().string());
  if (ext == ".jsonl" || ext == ".json") {
    return ParseGoldJsonl(content, path.string());
  }
  return ParseGoldCsv(content, path.string());
}

std::string GoldCsv(const std::vector<GoldSample>& samples) {
  std::string out = "sample_id,text,water,forest,biodiversity,nature\n";
  for (const auto& s : samples) {
    out += CsvLine({s.sample_id, s.text, std::to_string(s.labels[0]),
                    std::to_string(s.labels[1]), std::to_string(s.labels[2]),
                    std::to_string(s.labels[3])});
  }
  return out;
}

std::string GoldJsonl(const std::vector<GoldSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    json j = json::object();
    j["sample_id"] = s.sample_id;
    j["text"] = s.text;
    for (size_t l = 0; l < 4; ++l) j[std::string(kLabelNames[l])] = s.labels[l];
    if (s.resolution) j["resolution"] = ResolutionName(*s.resolution);
    out += j.dump();
    out += '\n';
  }
  return out;
}

GoldDistribution DistributionOf(const std::vector<GoldSample>& samples) {
  GoldDistribution d;
  d.total = samples.size();
  for (const auto& s : samples) {
    std::string combo;
    for (size_t l = 0; l < 4; ++l) {
      d.positives[l] += s.labels[l] ? 1 : 0;
      if (l < 3 && s.labels[l]) {
        if (!combo.empty()) combo += '+';
        combo += kLabelNames[l];
      }
    }
    ++d.combinations[combo.empty() ? "none" : combo];
  }
  return d;
}

std::string DistributionJson(const GoldDistribution& d) {
  json j;
  j["total"] = d.total;
  for (size_t l = 0; l < 4; ++l) {
    j["positives"][std::string(kLabelNames[l])] = d.positives[l];
  }
  j["combinations"] = json::object();
  for (const auto& [k, v] : d.combinations) j["combinations"][k] = v;
  return j.dump(2);
}

}  // namespace natdisc
