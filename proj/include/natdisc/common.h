#ifndef NATDISC_COMMON_H_
#define NATDISC_COMMON_H_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace natdisc {

// Base class for every error raised by the toolkit. The CLI maps it to exit
// status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or missing input data (files, records, ids).
class InputError : public Error {
 public:
  using Error::Error;
};

// A precondition on the arguments of an operation does not hold.
class ContractError : public Error {
 public:
  using Error::Error;
};

enum class SourceKind { kAnnualReport, kSustainabilityReport, kEarningsCall };

inline constexpr std::array<SourceKind, 3> kAllSourceKinds = {
    SourceKind::kAnnualReport, SourceKind::kSustainabilityReport,
    SourceKind::kEarningsCall};

// "AR" | "SR" | "EC".
std::string_view SourceKindCode(SourceKind kind);
std::optional<SourceKind> ParseSourceKind(std::string_view code);

// The three annotated nature dimensions. The derived "nature" label is not a
// member: it is always the OR of these three.
enum class Dimension { kWater, kForest, kBiodiversity };

inline constexpr std::array<Dimension, 3> kAllDimensions = {
    Dimension::kWater, Dimension::kForest, Dimension::kBiodiversity};

std::string_view DimensionName(Dimension dim);  // "water", "forest", ...
std::optional<Dimension> ParseDimension(std::string_view name);

}  // namespace natdisc

#endif  // NATDISC_COMMON_H_
