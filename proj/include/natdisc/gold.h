#ifndef NATDISC_GOLD_H_
#define NATDISC_GOLD_H_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "natdisc/common.h"

namespace natdisc {

// Columns of a gold dataset. The first three share their order with
// Dimension; kNature is derived.
enum class GoldLabel { kWater, kForest, kBiodiversity, kNature };

inline constexpr std::array<GoldLabel, 4> kAllGoldLabels = {
    GoldLabel::kWater, GoldLabel::kForest, GoldLabel::kBiodiversity,
    GoldLabel::kNature};

std::string_view GoldLabelName(GoldLabel label);
std::optional<GoldLabel> ParseGoldLabel(std::string_view name);
inline GoldLabel ToGoldLabel(Dimension dim) {
  return static_cast<GoldLabel>(static_cast<int>(dim));
}

enum class Resolution { kUnanimous, kMajority, kAdjudicated };
std::string_view ResolutionName(Resolution r);
std::optional<Resolution> ParseResolution(std::string_view name);

struct GoldSample {
  std::string sample_id;
  std::string text;
  std::array<int, 4> labels{};  // indexed by GoldLabel
  std::optional<Resolution> resolution;  // unknown for imported datasets

  int label(GoldLabel l) const { return labels[static_cast<size_t>(l)]; }
  int label(Dimension d) const { return labels[static_cast<size_t>(d)]; }
  // Sets labels[kNature] to the OR of the three dimensions.
  void DeriveNature();
};

struct GoldDataset {
  std::vector<GoldSample> samples;
  std::array<bool, 4> has_label{};  // which label columns were present

  bool has(GoldLabel l) const { return has_label[static_cast<size_t>(l)]; }
  // Throws InputError naming the missing column.
  void Require(GoldLabel l) const;
};

// Reads gold csv (header sample_id,text,<labels...>) or jsonl, chosen by the
// file extension. Label columns are optional but must hold 0/1 when present;
// a missing nature column is derived when the three dimensions are present.
// Duplicate sample ids are rejected.
GoldDataset LoadGold(const std::filesystem::path& path);
GoldDataset ParseGoldCsv(std::string_view content, const std::string& origin);
GoldDataset ParseGoldJsonl(std::string_view content, const std::string& origin);

// Header: sample_id,text,water,forest,biodiversity,nature.
std::string GoldCsv(const std::vector<GoldSample>& samples);
// One object per line with the same fields plus "resolution" when known.
std::string GoldJsonl(const std::vector<GoldSample>& samples);

struct GoldDistribution {
  size_t total = 0;
  std::array<size_t, 4> positives{};  // indexed by GoldLabel
  // "water+forest", "none", ... -> count
  std::map<std::string, size_t> combinations;
};

GoldDistribution DistributionOf(const std::vector<GoldSample>& samples);
std::string DistributionJson(const GoldDistribution& d);

}  // namespace natdisc

#endif  // NATDISC_GOLD_H_
