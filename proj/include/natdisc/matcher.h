#ifndef NATDISC_MATCHER_H_
#define NATDISC_MATCHER_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace natdisc {

struct KeywordHit {
  uint32_t pattern = 0;  // index into the pattern list
  size_t offset = 0;     // byte offset into the space-padded text
  size_t length = 0;

  size_t end() const { return offset + length; }
  friend bool operator==(const KeywordHit&, const KeywordHit&) = default;
  friend auto operator<=>(const KeywordHit&, const KeywordHit&) = default;
};

// Case-insensitive multi-pattern substring matcher (Aho-Corasick compiled to
// a dense DFA). Text is scanned as " " + text + " ", so a pattern with a
// leading or trailing space can match at the sentence boundary. Case folding
// is ASCII-only.
class PatternMatcher {
 public:
  explicit PatternMatcher(const std::vector<std::string>& patterns);

  size_t pattern_count() const { return lengths_.size(); }

  // Every non-overlapping occurrence of every pattern (occurrences of
  // different patterns may overlap), ordered by (offset, pattern).
  std::vector<KeywordHit> FindAll(std::string_view text) const;

  // Sorted distinct indices of patterns that occur at least once.
  void MatchedPatterns(std::string_view text, std::vector<uint32_t>& out) const;

  bool ContainsAny(std::string_view text) const;

 private:
  static constexpr int32_t kNoPattern = -1;

  int32_t Step(int32_t state, unsigned char c) const {
    return delta_[static_cast<size_t>(state) * 256 + c];
  }

  // Calls fn(pattern, end_offset) for every occurrence, in order of end.
  // fn returns false to stop the scan.
  template <typename Fn>
  void Scan(std::string_view text, Fn&& fn) const;

  std::vector<int32_t> delta_;     // state * 256 + byte -> state
  std::vector<int32_t> terminal_;  // pattern ending exactly at state
  std::vector<int32_t> dict_link_; // nearest suffix state with a pattern
  std::vector<uint32_t> lengths_;
  // Next pattern with the same case-folded text, or kNoPattern.
  std::vector<int32_t> alias_next_;
};

}  // namespace natdisc

#endif  // NATDISC_MATCHER_H_
