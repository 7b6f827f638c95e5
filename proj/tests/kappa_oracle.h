#ifndef NATDISC_TESTS_KAPPA_ORACLE_H_
#define NATDISC_TESTS_KAPPA_ORACLE_H_

#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

namespace natdisc::testing {

// Exact fraction, always normalized with a positive denominator.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  Rational(int64_t n = 0, int64_t d = 1) : num(n), den(d) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend Rational operator+(Rational a, Rational b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(Rational a, Rational b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(Rational a, Rational b) {
    return Rational(a.num * b.num, a.den * b.den);
  }
  friend Rational operator/(Rational a, Rational b) {
    return Rational(a.num * b.den, a.den * b.num);
  }
  friend bool operator==(Rational a, Rational b) {
    return a.num == b.num && a.den == b.den;
  }
};

// Category-count table form: counts[i][j] = raters putting item i in
// category j. Worked cell by cell like a spreadsheet.
inline std::optional<Rational> OracleKappa(
    const std::vector<std::vector<int64_t>>& counts) {
  const int64_t items = static_cast<int64_t>(counts.size());
  const size_t k = counts[0].size();
  int64_t n = 0;
  for (int64_t c : counts[0]) n += c;
  std::vector<int64_t> column(k, 0);
  Rational pbar;
  for (const auto& row : counts) {
    int64_t sq = 0;
    for (size_t j = 0; j < k; ++j) {
      sq += row[j] * row[j];
      column[j] += row[j];
    }
    pbar = pbar + Rational(sq - n, n * (n - 1));
  }
  pbar = pbar / Rational(items);
  Rational pe;
  for (size_t j = 0; j < k; ++j) {
    Rational p(column[j], items * n);
    pe = pe + p * p;
  }
  if (pe == Rational(1)) return std::nullopt;
  return (pbar - pe) / (Rational(1) - pe);
}

inline std::optional<Rational> OracleKappaFromPositives(
    const std::vector<int>& positives, int raters = 4) {
  std::vector<std::vector<int64_t>> counts;
  for (int c : positives) counts.push_back({raters - c, c});
  return OracleKappa(counts);
}

struct KappaTable {
  std::vector<int> positives;
  Rational expected;
};

// Hand-worked tables (4 raters) with their exact kappa.
inline std::vector<KappaTable> HandKappaTables() {
  return {
      {{4, 4, 0, 2}, Rational(29, 45)},
      {{4, 0, 4, 0}, Rational(1)},
      {{2, 2}, Rational(-1, 3)},
      {{3, 1, 4, 0, 2}, Rational(1, 3)},
      {{4, 3, 3, 1, 0, 0}, Rational(71, 143)},
      {{1, 0, 0, 0}, Rational(-1, 15)},
  };
}

}  // namespace natdisc::testing

#endif  // NATDISC_TESTS_KAPPA_ORACLE_H_
