#ifndef NATDISC_KEYWORDS_H_
#define NATDISC_KEYWORDS_H_

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "natdisc/common.h"
#include "natdisc/corpus.h"
#include "natdisc/matcher.h"

namespace natdisc {

struct KeywordPattern {
  std::string raw;  // verbatim, leading/trailing spaces are significant
  Dimension dimension = Dimension::kWater;
};

// An ordered, immutable dictionary of stem patterns for one dimension.
class KeywordSet {
 public:
  // Throws ContractError on an all-space pattern or a duplicate.
  KeywordSet(Dimension dimension, std::vector<std::string> raw_patterns);

  // The dictionary shipped for |dimension|, in its published listing order.
  static const KeywordSet& Builtin(Dimension dimension);

  // One pattern per line, spaces preserved. Blank lines and lines starting
  // with '#' are skipped.
  static KeywordSet Load(Dimension dimension,
                         const std::filesystem::path& path);

  Dimension dimension() const { return dimension_; }
  size_t size() const { return patterns_.size(); }
  const std::vector<KeywordPattern>& patterns() const { return patterns_; }
  const std::vector<std::string>& raws() const { return raws_; }
  const PatternMatcher& matcher() const { return *matcher_; }

  std::vector<KeywordHit> Match(std::string_view text) const {
    return matcher_->FindAll(text);
  }

 private:
  Dimension dimension_;
  std::vector<KeywordPattern> patterns_;
  std::vector<std::string> raws_;
  std::shared_ptr<const PatternMatcher> matcher_;
};

// Published keyword listings, verbatim.
const std::vector<std::string>& BuiltinKeywords(Dimension dimension);

// Resource-file text for a keyword set (one pattern per line).
std::string SerializeKeywordSet(const KeywordSet& set);

std::vector<KeywordHit> MatchSentence(const Sentence& sentence,
                                      const KeywordSet& set);

struct FrequencyTable {
  std::vector<std::string> patterns;  // same order as the keyword set
  std::vector<size_t> counts;         // sentences with >= 1 occurrence
  size_t total_matched_sentences = 0;
  size_t total_sentences = 0;
};

// Throws ContractError on an empty corpus.
FrequencyTable KeywordFrequencyTable(const CorpusStore& store,
                                     const KeywordSet& set,
                                     unsigned threads = 1);

// Fraction of sentences matching at least one pattern of |set|.
double AppearanceRate(const CorpusStore& store, const KeywordSet& set,
                      unsigned threads = 1);

// Published appearance rates on the original corpus; reference only.
double PublishedAppearanceRate(Dimension dimension);

inline const std::vector<double>& DefaultCutPoints() {
  static const std::vector<double> kCuts = {0.1, 0.2, 0.4, 0.6, 1.0};
  return kCuts;
}

struct BucketAssignment {
  std::vector<int> bucket;  // per pattern, 1-based
  std::vector<double> cut_points;
  std::vector<size_t> rank_order;  // pattern indices, most frequent first

  int bucket_count() const { return static_cast<int>(cut_points.size()); }
};

// Patterns ranked by descending count (ties by listing order). The top
// pattern goes to bucket 1; each other pattern goes to the first bucket whose
// cut point is >= its cumulative share of all matches. Zero-count patterns go
// to the last bucket. Throws ContractError on an all-zero table or invalid
// cut points.
BucketAssignment Bucketize(const FrequencyTable& table,
                           const std::vector<double>& cut_points =
                               DefaultCutPoints());

struct BucketedSentence {
  size_t index = 0;  // position in store.sentences()
  int bucket = 0;
};

// Each matched sentence belongs to the bucket of its rarest matched pattern.
// Quotas follow AllocateQuotas; draws are uniform without replacement.
// Output is grouped by bucket, each group in draw order. Throws
// ContractError when n_total < number of buckets or fewer sentences match
// than n_total.
std::vector<BucketedSentence> BucketBalancedSample(
    const CorpusStore& store, const KeywordSet& set,
    const BucketAssignment& assignment, size_t n_total, uint64_t seed);

// Up to |per_source_cap| matching sentences per source kind, drawn uniformly.
// Output is grouped AR, SR, EC, each group in corpus order. Sentences with
// no known source kind are ignored.
std::vector<size_t> KeywordFilterSample(const CorpusStore& store,
                                        const KeywordSet& set,
                                        size_t per_source_cap, uint64_t seed);

}  // namespace natdisc

#endif  // NATDISC_KEYWORDS_H_
