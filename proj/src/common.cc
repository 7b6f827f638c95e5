#include "natdisc/common.h"

namespace natdisc {

std::string_view SourceKindCode(SourceKind kind) {
  switch (kind) {
    case SourceKind::kAnnualReport:
      return "AR";
    case SourceKind::kSustainabilityReport:
      return "SR";
    case SourceKind::kEarningsCall:
      return "EC";
  }
  return "??";
}

std::optional<SourceKind> ParseSourceKind(std::string_view code) {
  if (code == "AR") return SourceKind::kAnnualReport;
  if (code == "SR") return SourceKind::kSustainabilityReport;
  if (code == "EC") return SourceKind::kEarningsCall;
  return std::nullopt;
}

std::string_view DimensionName(Dimension dim) {
  switch (dim) {
    case Dimension::kWater:
      return "water";
    case Dimension::kForest:
      return "forest";
    case Dimension::kBiodiversity:
      return "biodiversity";
  }
  return "??";
}

std::optional<Dimension> ParseDimension(std::string_view name) {
  for (Dimension d : kAllDimensions) {
    if (DimensionName(d) == name) return d;
  }
  return std::nullopt;
}

}  // namespace natdisc
