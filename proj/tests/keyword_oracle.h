#ifndef NATDISC_TESTS_KEYWORD_ORACLE_H_
#define NATDISC_TESTS_KEYWORD_ORACLE_H_

// Naive reference matcher and random sentence generator shared by the
// keyword, baseline and acceptance tests. Deliberately independent of the
// automaton: one std::string::find loop per pattern.

#include <algorithm>
#include <cctype>
#include <random>
#include <string>
#include <vector>

#include "natdisc/matcher.h"

namespace natdisc::testing {

inline std::string NaiveLower(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return out;
}

inline std::vector<KeywordHit> NaiveFindAll(
    const std::string& text, const std::vector<std::string>& patterns) {
  const std::string padded = " " + NaiveLower(text) + " ";
  std::vector<KeywordHit> hits;
  for (size_t p = 0; p < patterns.size(); ++p) {
    const std::string pat = NaiveLower(patterns[p]);
    size_t pos = 0;
    while ((pos = padded.find(pat, pos)) != std::string::npos) {
      hits.push_back({static_cast<uint32_t>(p), pos, pat.size()});
      pos += pat.size();
    }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

inline bool NaiveContains(const std::string& text, const std::string& pattern) {
  return (" " + NaiveLower(text) + " ").find(NaiveLower(pattern)) !=
         std::string::npos;
}

// Sentences mixing keyword stems, near misses, case variants and noise.
class SentenceGenerator {
 public:
  explicit SentenceGenerator(uint32_t seed) : gen_(seed) {}

  std::string Next() {
    static const std::vector<std::string> kWords = {
        "Lake",     "lakes",       "flake",      "hunt",        "hunted",
        "HUNT",     "soy",         "soybeans",   "Soy",         "wood",
        "woods",    "firewood",    "ENSO",       "sensor",      "El",
        "Nino",     "nino",        "rain",       "Rain",        "forest",
        "forests",  "deforestation", "environmental", "Environ", "tree",
        "street",   "trees",       "farm",       "farmers",     "fish",
        "fishing",  "stock",       "water",      "Wastewater",  "climate",
        "habitat",  "species",     "coral",      "reef",        "national",
        "park",     "palm",        "oil",        "marine",      "life",
        "tropical", "biodiversity", "protect",   "EPA",         "mesa",
        "the",      "and",         "we",         "our",         "company",
        "revenue",  "growth",      "2021",       "million",     "aqua",
        "aquatic",  "sea",         "season",     "sustainable", "natural",
        "micro",    "endangered",  "list",       "threat",      "rotation"};
    static const std::vector<std::string> kSep = {" ", " ", " ", "  ", ", ",
                                                  ". ", "-", ""};
    std::string s;
    int n = 1 + static_cast<int>(gen_() % 24);
    for (int i = 0; i < n; ++i) {
      if (gen_() % 13 == 0) {
        int len = 1 + static_cast<int>(gen_() % 6);
        for (int k = 0; k < len; ++k) {
          s.push_back(static_cast<char>('a' + gen_() % 26));
        }
      } else {
        s += kWords[gen_() % kWords.size()];
      }
      s += kSep[gen_() % kSep.size()];
    }
    return s;
  }

 private:
  std::mt19937 gen_;
};

}  // namespace natdisc::testing

#endif  // NATDISC_TESTS_KEYWORD_ORACLE_H_
