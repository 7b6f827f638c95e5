#include "natdisc/keywords.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "natdisc/parallel.h"
#include "natdisc/sampling.h"
#include "natdisc/text_util.h"

namespace natdisc {

namespace {

// Per-sentence matched pattern ids, computed sentence-parallel.
std::vector<std::vector<uint32_t>> MatchAll(const CorpusStore& store,
                                            const KeywordSet& set,
                                            unsigned threads) {
  const auto& sentences = store.sentences();
  std::vector<std::vector<uint32_t>> matched(sentences.size());
  ParallelFor(sentences.size(), threads, [&](size_t i) {
    set.matcher().MatchedPatterns(sentences[i].text, matched[i]);
  });
  return matched;
}

}  // namespace

const std::vector<std::string>& BuiltinKeywords(Dimension dimension) {
  static const std::vector<std::string> kWater = {
      "river", " lake", " aqua", "h2o", " rain", "basin", "reservoir",
      "sanitation", "drought", "hydrat", "dry", "mineral", "aquifer",
      "glacier", "glacial", "fish stock", "flood", "precipitation", "evapotr",
      "groundwater", "freshwater", "water", "ocean", "marine", "hurricane",
      "coast", "tsunami", "ship", "spill", "vessel", "cyclone", "ENSO",
      "El Nino", "La Nina", "storm", "submerge", "wind", "sea", "weather",
      "fish"};
  static const std::vector<std::string> kForest = {
      "deforest", "wood ", "timber", "ecosystem", "raw material", " tree",
      "crop", "cultivat", "harvest", "wild", "flower", "botanic",
      "agriculture", " farm", "soy", "leather", "palm oil", "paper", "beef",
      "pest", "forestry", "canopy", "rotation", "pulp", "bark", "fungi",
      "forest"};
  static const std::vector<std::string> kBiodiversity = {
      "animal", "plant", "bacteria", "fungi", "earth", "extinct", "biodivers",
      "ecolog", "insect", "species", "ecosystem", "organism", "forest",
      "grassland", "tundra", "climat", "tropic", "rain forest", "soil",
      "cattle", "cropland", "farm", "pollut", "natur", "mammal", "bird",
      "reptil", "amphibian", "environ", "tree", "rubber", "miner", "palm oil",
      "soy ", "hunt ", "harvest", "landscap", "biolog", "coral", "habitat",
      "biospher", "biom", "conservation", "genet", "national park",
      "geograph", "island", "mountain", "nativ", "fauna", "flora"};
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

KeywordSet::KeywordSet(Dimension dimension,
                       std::vector<std::string> raw_patterns)
    : dimension_(dimension), raws_(std::move(raw_patterns)) {
  std::set<std::string> seen;
  for (const auto& raw : raws_) {
    if (Trim(raw).empty()) {
      throw ContractError("keyword pattern is empty after trimming");
    }
    if (!seen.insert(raw).second) {
      throw ContractError("duplicate keyword pattern '" + raw + "'");
    }
    patterns_.push_back({raw, dimension});
  }
  matcher_ = std::make_shared<const PatternMatcher>(raws_);
}

const KeywordSet& KeywordSet::Builtin(Dimension dimension) {
  static const KeywordSet kWater(Dimension::kWater,
                                 BuiltinKeywords(Dimension::kWater));
  static const KeywordSet kForest(Dimension::kForest,
                                  BuiltinKeywords(Dimension::kForest));
  static const KeywordSet kBio(Dimension::kBiodiversity,
                               BuiltinKeywords(Dimension::kBiodiversity));
  switch (dimension) {
    case Dimension::kWater:
      return kWater;
    case Dimension::kForest:
      return kForest;
    case Dimension::kBiodiversity:
      return kBio;
  }
  return kWater;
}

KeywordSet KeywordSet::Load(Dimension dimension,
                            const std::filesystem::path& path) {
  std::vector<std::string> raws;
  for (auto& line : ReadLines(path)) {
    if (line.empty() || line[0] == '#' || Trim(line).empty()) continue;
    raws.push_back(std::move(line));
  }
  if (raws.empty()) throw InputError("no keyword patterns in " + path.string());
  try {
    return KeywordSet(dimension, std::move(raws));
  } catch (const ContractError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string SerializeKeywordSet(const KeywordSet& set) {
  std::string out;
  for (const auto& raw : set.raws()) {
    out += raw;
    out.push_back('\n');
  }
  return out;
}

std::vector<KeywordHit> MatchSentence(const Sentence& sentence,
                                      const KeywordSet& set) {
  return set.Match(sentence.text);
}

FrequencyTable KeywordFrequencyTable(const CorpusStore& store,
                                     const KeywordSet& set, unsigned threads) {
  if (store.sentences().empty()) {
    throw ContractError("keyword frequency: empty corpus");
  }
  FrequencyTable table;
  table.patterns = set.raws();
  table.counts.assign(set.size(), 0);
  table.total_sentences = store.sentences().size();
  for (const auto& matched : MatchAll(store, set, threads)) {
    if (!matched.empty()) ++table.total_matched_sentences;
    for (uint32_t p : matched) ++table.counts[p];
  }
  return table;
}

double AppearanceRate(const CorpusStore& store, const KeywordSet& set,
                      unsigned threads) {
  const auto& sentences = store.sentences();
  if (sentences.empty()) throw ContractError("appearance rate: empty corpus");
  std::vector<char> hit(sentences.size(), 0);
  ParallelFor(sentences.size(), threads, [&](size_t i) {
    hit[i] = set.matcher().ContainsAny(sentences[i].text) ? 1 : 0;
  });
  size_t n = static_cast<size_t>(std::count(hit.begin(), hit.end(), 1));
  return static_cast<double>(n) / static_cast<double>(sentences.size());
}

double PublishedAppearanceRate(Dimension dimension) {
  switch (dimension) {
    case Dimension::kWater:
      return 0.0836;
    case Dimension::kForest:
      return 0.0170;
    case Dimension::kBiodiversity:
      return 0.0991;
  }
  return 0;
}

BucketAssignment Bucketize(const FrequencyTable& table,
                           const std::vector<double>& cut_points) {
  if (cut_points.empty()) throw ContractError("bucketize: no cut points");
  for (size_t i = 0; i < cut_points.size(); ++i) {
    if (cut_points[i] <= 0 || (i && cut_points[i] <= cut_points[i - 1])) {
      throw ContractError("bucketize: cut points must be positive and "
                          "strictly increasing");
    }
  }
  if (cut_points.back() < 1.0) {
    throw ContractError("bucketize: last cut point must be 1.0");
  }
  const size_t total = std::accumulate(table.counts.begin(),
                                       table.counts.end(), size_t{0});
  if (total == 0) throw ContractError("bucketize: all pattern counts are zero");

  BucketAssignment out;
  out.cut_points = cut_points;
  out.rank_order.resize(table.counts.size());
  std::iota(out.rank_order.begin(), out.rank_order.end(), size_t{0});
  std::stable_sort(out.rank_order.begin(), out.rank_order.end(),
                   [&](size_t a, size_t b) {
                     return table.counts[a] > table.counts[b];
                   });
  const int last_bucket = static_cast<int>(cut_points.size());
  out.bucket.assign(table.counts.size(), last_bucket);
  size_t running = 0;
  for (size_t r = 0; r < out.rank_order.size(); ++r) {
    const size_t p = out.rank_order[r];
    if (table.counts[p] == 0) break;
    running += table.counts[p];
    if (r == 0) {
      out.bucket[p] = 1;
      continue;
    }
    const double share =
        static_cast<double>(running) / static_cast<double>(total);
    int b = last_bucket;
    for (size_t i = 0; i < cut_points.size(); ++i) {
      // Tolerance absorbs binary rounding of shares such as 3/10.
      if (cut_points[i] + 1e-12 >= share) {
        b = static_cast<int>(i) + 1;
        break;
      }
    }
    out.bucket[p] = b;
  }
  return out;
}

std::vector<BucketedSentence> BucketBalancedSample(
    const CorpusStore& store, const KeywordSet& set,
    const BucketAssignment& assignment, size_t n_total, uint64_t seed) {
  const size_t buckets = static_cast<size_t>(assignment.bucket_count());
  if (assignment.bucket.size() != set.size()) {
    throw ContractError("bucket sample: assignment does not fit keyword set");
  }
  if (n_total < buckets) {
    throw ContractError("bucket sample: n_total must be >= " +
                        std::to_string(buckets));
  }
  std::vector<std::vector<size_t>> members(buckets);
  std::vector<uint32_t> matched;
  const auto& sentences = store.sentences();
  for (size_t i = 0; i < sentences.size(); ++i) {
    set.matcher().MatchedPatterns(sentences[i].text, matched);
    if (matched.empty()) continue;
    // Buckets are monotone in rank, so the rarest pattern has the largest.
    int b = 0;
    for (uint32_t p : matched) b = std::max(b, assignment.bucket[p]);
    members[static_cast<size_t>(b - 1)].push_back(i);
  }
  std::vector<size_t> available;
  size_t matched_total = 0;
  for (const auto& m : members) {
    available.push_back(m.size());
    matched_total += m.size();
  }
  if (matched_total < n_total) {
    throw ContractError("bucket sample: only " + std::to_string(matched_total) +
                        " matched sentences for n_total=" +
                        std::to_string(n_total));
  }
  std::vector<size_t> quota = AllocateQuotas(available, n_total);
  Rng rng(seed);
  std::vector<BucketedSentence> out;
  out.reserve(n_total);
  for (size_t b = 0; b < buckets; ++b) {
    for (size_t k : SampleIndices(members[b].size(), quota[b], rng)) {
      out.push_back({members[b][k], static_cast<int>(b) + 1});
    }
  }
  return out;
}

std::vector<size_t> KeywordFilterSample(const CorpusStore& store,
                                        const KeywordSet& set,
                                        size_t per_source_cap, uint64_t seed) {
  if (per_source_cap < 1) throw ContractError("keyword sample: cap must be >= 1");
  std::vector<std::vector<size_t>> by_source(kAllSourceKinds.size());
  const auto& sentences = store.sentences();
  for (size_t i = 0; i < sentences.size(); ++i) {
    auto source = store.sentence_source(i);
    if (!source || !set.matcher().ContainsAny(sentences[i].text)) continue;
    by_source[static_cast<size_t>(*source)].push_back(i);
  }
  Rng rng(seed);
  std::vector<size_t> out;
  for (auto& group : by_source) {
    std::vector<size_t> picks = SampleIndices(group.size(), per_source_cap, rng);
    std::sort(picks.begin(), picks.end());
    for (size_t k : picks) out.push_back(group[k]);
  }
  return out;
}

}  // namespace natdisc
