#include "natdisc/sampling.h"

#include <algorithm>
#include <numeric>

namespace natdisc {

uint64_t Rng::Below(uint64_t bound) {
  // Reject the top partial range so every residue is equally likely.
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double Rng::Unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::vector<size_t> SampleIndices(size_t n, size_t k, Rng& rng) {
  k = std::min(k, n);
  std::vector<size_t> pool(n);
  std::iota(pool.begin(), pool.end(), size_t{0});
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + static_cast<size_t>(rng.Below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::vector<size_t> AllocateQuotas(const std::vector<size_t>& available,
                                   size_t n_total) {
  const size_t groups = available.size();
  std::vector<size_t> quota(groups, 0);
  if (groups == 0) return quota;
  const size_t base = n_total / groups;
  const size_t extra = n_total % groups;
  size_t assigned = 0;
  for (size_t g = 0; g < groups; ++g) {
    size_t target = base + (g < extra ? 1 : 0);
    quota[g] = std::min(target, available[g]);
    assigned += quota[g];
  }
  size_t capacity = std::accumulate(available.begin(), available.end(),
                                    size_t{0});
  size_t goal = std::min(n_total, capacity);
  size_t g = 0;
  while (assigned < goal) {
    if (quota[g] < available[g]) {
      ++quota[g];
      ++assigned;
    }
    g = (g + 1) % groups;
  }
  return quota;
}

}  // namespace natdisc
