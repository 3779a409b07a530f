#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ssasim {

/// Element of the associative scan operator: p is the multiplicative term
/// (one entry of exp(dt*A)), q the additive term (one entry of dt*B*u).
/// Identity element is (1, 0).
struct ScanPair {
  double p{1.0};
  double q{0.0};
};

/// combine(x, y) for x preceding y in sequence order.
inline ScanPair combine(const ScanPair& x, const ScanPair& y) {
  return ScanPair{x.p * y.p, y.p * x.q + y.q};
}

/// Reference recurrence: states[0] = bu[0], states[n] = abar[n]*states[n-1] + bu[n].
/// Every parallel and quantized variant is checked against this.
inline std::vector<double> sequential_scan(std::span<const double> abar,
                                           std::span<const double> bu) {
  if (abar.size() != bu.size()) throw std::invalid_argument("sequential_scan: length mismatch");
  if (abar.empty()) throw std::invalid_argument("sequential_scan: empty input");
  std::vector<double> states(bu.size());
  states[0] = bu[0];
  for (std::size_t n = 1; n < bu.size(); ++n) {
    states[n] = abar[n] * states[n - 1] + bu[n];
  }
  return states;
}

/// Log-depth inclusive scan under combine. Combines whose partner index is
/// negative are skipped, which handles non-power-of-two lengths.
inline std::vector<ScanPair> kogge_stone_pairs(std::vector<ScanPair> pairs) {
  const std::size_t n = pairs.size();
  std::vector<ScanPair> prev(n);
  for (std::size_t d = 1; d < n; d *= 2) {
    prev = pairs;
    for (std::size_t i = d; i < n; ++i) {
      pairs[i] = combine(prev[i - d], prev[i]);
    }
  }
  return pairs;
}

inline std::vector<double> kogge_stone_scan(std::span<const double> abar,
                                            std::span<const double> bu) {
  if (abar.size() != bu.size()) throw std::invalid_argument("kogge_stone_scan: length mismatch");
  if (abar.empty()) throw std::invalid_argument("kogge_stone_scan: empty input");
  std::vector<ScanPair> pairs(abar.size());
  for (std::size_t i = 0; i < abar.size(); ++i) pairs[i] = ScanPair{abar[i], bu[i]};
  pairs = kogge_stone_pairs(std::move(pairs));
  std::vector<double> states(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) states[i] = pairs[i].q;
  return states;
}

}  // namespace ssasim
