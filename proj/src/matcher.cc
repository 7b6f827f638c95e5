#include "natdisc/matcher.h"

#include <algorithm>
#include <queue>

#include "natdisc/common.h"
#include "natdisc/text_util.h"

namespace natdisc {

PatternMatcher::PatternMatcher(const std::vector<std::string>& patterns) {
  // Trie over case-folded bytes; -1 marks a missing edge until completion.
  std::vector<int32_t> trie(256, -1);
  terminal_.push_back(kNoPattern);
  lengths_.reserve(patterns.size());
  alias_next_.assign(patterns.size(), kNoPattern);
  for (size_t p = 0; p < patterns.size(); ++p) {
    if (patterns[p].empty()) throw ContractError("empty keyword pattern");
    int32_t state = 0;
    for (char ch : patterns[p]) {
      unsigned char c = static_cast<unsigned char>(AsciiLower(ch));
      int32_t& next = trie[static_cast<size_t>(state) * 256 + c];
      if (next < 0) {
        next = static_cast<int32_t>(terminal_.size());
        terminal_.push_back(kNoPattern);
        trie.resize(trie.size() + 256, -1);
      }
      state = trie[static_cast<size_t>(state) * 256 + c];
    }
    lengths_.push_back(static_cast<uint32_t>(patterns[p].size()));
    if (terminal_[state] == kNoPattern) {
      terminal_[state] = static_cast<int32_t>(p);
    } else {
      int32_t q = terminal_[state];
      while (alias_next_[q] != kNoPattern) q = alias_next_[q];
      alias_next_[q] = static_cast<int32_t>(p);
    }
  }

  const size_t states = terminal_.size();
  delta_ = std::move(trie);
  std::vector<int32_t> fail(states, 0);
  dict_link_.assign(states, -1);
  std::queue<int32_t> bfs;
  for (int c = 0; c < 256; ++c) {
    int32_t& next = delta_[c];
    if (next < 0) {
      next = 0;
    } else {
      fail[next] = 0;
      bfs.push(next);
    }
  }
  while (!bfs.empty()) {
    int32_t s = bfs.front();
    bfs.pop();
    int32_t f = fail[s];
    dict_link_[s] = terminal_[f] != kNoPattern ? f : dict_link_[f];
    for (int c = 0; c < 256; ++c) {
      int32_t& next = delta_[static_cast<size_t>(s) * 256 + c];
      if (next < 0) {
        next = delta_[static_cast<size_t>(f) * 256 + c];
      } else {
        fail[next] = delta_[static_cast<size_t>(f) * 256 + c];
        bfs.push(next);
      }
    }
  }
  // Fold upper-case columns onto their lower-case twins.
  for (size_t s = 0; s < states; ++s) {
    for (int c = 'A'; c <= 'Z'; ++c) {
      delta_[s * 256 + c] = delta_[s * 256 + (c - 'A' + 'a')];
    }
  }
}

template <typename Fn>
void PatternMatcher::Scan(std::string_view text, Fn&& fn) const {
  int32_t state = 0;
  auto feed = [&](unsigned char c, size_t end) {
    state = Step(state, c);
    for (int32_t s = terminal_[state] != kNoPattern ? state : dict_link_[state];
         s >= 0; s = dict_link_[s]) {
      for (int32_t p = terminal_[s]; p != kNoPattern; p = alias_next_[p]) {
        if (!fn(static_cast<uint32_t>(p), end)) return false;
      }
    }
    return true;
  };
  if (!feed(' ', 1)) return;
  for (size_t i = 0; i < text.size(); ++i) {
    if (!feed(static_cast<unsigned char>(text[i]), i + 2)) return;
  }
  feed(' ', text.size() + 2);
}

std::vector<KeywordHit> PatternMatcher::FindAll(std::string_view text) const {
  std::vector<KeywordHit> hits;
  std::vector<size_t> last_end(lengths_.size(), 0);
  Scan(text, [&](uint32_t p, size_t end) {
    size_t start = end - lengths_[p];
    if (start >= last_end[p]) {
      hits.push_back({p, start, lengths_[p]});
      last_end[p] = end;
    }
    return true;
  });
  std::sort(hits.begin(), hits.end());
  return hits;
}

void PatternMatcher::MatchedPatterns(std::string_view text,
                                     std::vector<uint32_t>& out) const {
  out.clear();
  Scan(text, [&](uint32_t p, size_t) {
    out.push_back(p);
    return true;
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

bool PatternMatcher::ContainsAny(std::string_view text) const {
  bool found = false;
  Scan(text, [&](uint32_t, size_t) {
    found = true;
    return false;
  });
  return found;
}

}  // namespace natdisc
