#pragma once

// Independent reference implementations used only by the tests. Each one is
// deliberately written with a different algorithm than the library so the
// two can cross-check each other.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "whype/hv.hpp"

namespace oracle {

// erfc via Simpson integration of (2/sqrt(pi)) exp(-t^2) over [x, x+14].
// The truncated tail is below 1e-60 for x >= 0; Simpson error ~1e-12.
inline double erfc_quadrature(double x) {
  if (x < 0.0) return 2.0 - erfc_quadrature(-x);
  constexpr double kWidth = 14.0;
  constexpr int kIntervals = 20000;  // even
  const double h = kWidth / kIntervals;
  auto f = [](double t) { return std::exp(-t * t); };
  double s = f(x) + f(x + kWidth);
  for (int i = 1; i < kIntervals; ++i)
    s += f(x + i * h) * ((i % 2) ? 4.0 : 2.0);
  constexpr double kSqrtPi = 1.7724538509055160273;
  return s * h / 3.0 * 2.0 / kSqrtPi;
}

inline double binomial_sigma(double p, double n) {
  return std::sqrt(p * (1.0 - p) / n);
}

// Per-bit counting majority; odd bundle sizes only.
inline whype::Hypervector majority_by_counting(
    const std::vector<whype::Hypervector>& vs) {
  whype::Hypervector out(vs[0].dim());
  for (std::size_t i = 0; i < out.dim(); ++i) {
    std::size_t ones = 0;
    for (const auto& v : vs) ones += v.get(i);
    out.set(i, 2 * ones > vs.size());
  }
  return out;
}

// Agreement count by scanning bits one at a time.
inline int agreement_by_scan(const whype::Hypervector& a,
                             const whype::Hypervector& b) {
  int n = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) n += a.get(i) == b.get(i);
  return n;
}

// Label-group means recomputed directly from points and labels.
inline std::pair<std::complex<double>, std::complex<double>> label_means(
    const std::vector<std::complex<double>>& pts,
    const std::vector<int>& labels) {
  std::complex<double> s0 = 0.0, s1 = 0.0;
  int n0 = 0, n1 = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (labels[i]) {
      s1 += pts[i];
      ++n1;
    } else {
      s0 += pts[i];
      ++n0;
    }
  }
  return {n0 ? s0 / double(n0) : 0.0, n1 ? s1 / double(n1) : 0.0};
}

}  // namespace oracle
