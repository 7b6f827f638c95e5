#include "natdisc/guidelines.h"

namespace natdisc {

const Guideline& BuiltinGuideline(Dimension dimension) {
  static const Guideline kWater = {
      "The topic of water centers around water management, consumption, "
      "and pollution. It also concerns climate change effects on water, "
      "energy production with it, or projects integrating water issues. "
      "Also, sentences displaying direct impacts on water issues are "
      "considered like droughts.",
      "No effect on water issues. Simple generic environmental issues are "
      "not enough."};
  static const Guideline kForest = {
      "The forest topic comprises direct effects on timberland, trees, "
      "wood consumption, and related ecosystems. Also, the indirect "
      "effects of monocropping, and overharvesting leading to "
      "deforestation are considered. Additionally, working conditions, "
      "corruption, and bribery around the topic of forests are important.",
      "No Forest is just generic talk about nature without a direct or "
      "indirect link to forests. The sole address of environmental issues "
      "is not enough."};
  static const Guideline kBiodiversity = {
      "Biodiversity topics address the variety of living species on "
      "Earth, including plants, animals, bacteria, and fungi. A special "
      "focus lies on animal life in natural habitats and ecosystems. "
      "Categories of human interventions could be nature pollution, "
      "destruction, or restoration. Furthermore, special attention lies "
      "on hotspot areas of biodiversity loss. Hot spots may be coral "
      "reefs, rainforests, or other tropical areas.",
      "No effect on biodiversity issues. Simple generic environmental "
      "issues are not enough."};
  switch (dimension) {
    case Dimension::kWater:
      return kWater;
    case Dimension::kForest:
      return kForest;
    case Dimension::kBiodiversity:
      return kBiodiversity;
  }
  return kWater;
}

}  // namespace natdisc
