#ifndef NATDISC_SAMPLING_H_
#define NATDISC_SAMPLING_H_

#include <cstdint>
#include <random>
#include <vector>

namespace natdisc {

// Seeded generator whose outputs are identical on every platform: the engine
// is std::mt19937_64 (fully specified by the standard) and bounded draws use
// rejection sampling instead of std::uniform_int_distribution, whose
// algorithm is implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, bound). bound must be > 0.
  uint64_t Below(uint64_t bound);

  // Uniform in [0, 1).
  double Unit();

 private:
  std::mt19937_64 engine_;
};

// k distinct indices drawn uniformly from [0, n), in draw order
// (partial Fisher-Yates). k is clamped to n.
std::vector<size_t> SampleIndices(size_t n, size_t k, Rng& rng);

// In-place uniform shuffle.
template <typename T>
void Shuffle(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.Below(i));
    std::swap(items[i - 1], items[j]);
  }
}

// Splits |n_total| draws across groups with the given availabilities.
// Each group targets n_total / groups, the remainder going one each to the
// lowest-index groups. A group that cannot fill its target takes everything
// it has, and the shortfall is handed out one at a time, round-robin from
// the lowest index, to groups that still have spare items. The result sums
// to min(n_total, sum(available)).
std::vector<size_t> AllocateQuotas(const std::vector<size_t>& available,
                                   size_t n_total);

}  // namespace natdisc

#endif  // NATDISC_SAMPLING_H_
