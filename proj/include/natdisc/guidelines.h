#ifndef NATDISC_GUIDELINES_H_
#define NATDISC_GUIDELINES_H_

#include <string>

#include "natdisc/common.h"

namespace natdisc {

// Labeling guideline for one dimension: what counts, and what does not.
// Shared verbatim by the pre-label prompt and the annotation API.
struct Guideline {
  std::string positive;
  std::string negative;
};

const Guideline& BuiltinGuideline(Dimension dimension);

}  // namespace natdisc

#endif  // NATDISC_GUIDELINES_H_
