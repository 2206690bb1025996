#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "chainforge/iep.hpp"
#include "chainforge/spectrum.hpp"

namespace testing {

inline double max_rel_error(std::span<const double> got, std::span<const double> want) {
  double scale = 0.0;
  for (double w : want) scale = std::max(scale, std::abs(w));
  double err = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) err = std::max(err, std::abs(got[i] - want[i]));
  return err / scale;
}

// Random symmetric spectrum in [-range, range] with well separated values.
inline chainforge::Spectrum random_symmetric(std::mt19937_64& gen, int n, double range) {
  std::uniform_real_distribution<double> u(0.0, range);
  for (;;) {
    std::vector<double> half;
    for (int i = 0; i < n / 2; ++i) half.push_back(u(gen));
    std::sort(half.begin(), half.end());
    bool ok = !half.empty() && half.front() > 1e-6 * range;
    for (std::size_t i = 1; i < half.size(); ++i) ok = ok && half[i] - half[i - 1] > 1e-6 * range;
    if (!ok) continue;
    std::vector<double> v;
    for (double x : half) {
      v.push_back(x);
      v.push_back(-x);
    }
    if (n % 2) v.push_back(0.0);
    return chainforge::Spectrum(v, chainforge::Family::custom);
  }
}

// Sturm count: number of eigenvalues of the tridiagonal matrix below x.
inline int sturm_count(std::span<const double> a, std::span<const double> b, double x) {
  int count = 0;
  double q = a[0] - x;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (q == 0.0) q = 1e-300;
    q = a[i] - x - b[i - 1] * b[i - 1] / q;
    if (q < 0) ++count;
  }
  return count;
}

// Eigenvalues by bisection on the Sturm sequence, ascending.
inline std::vector<double> bisection_eigenvalues(std::span<const double> a, std::span<const double> b) {
  double lo = a[0], hi = a[0];
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = (i > 0 ? std::abs(b[i - 1]) : 0.0) + (i + 1 < a.size() ? std::abs(b[i]) : 0.0);
    lo = std::min(lo, a[i] - r);
    hi = std::max(hi, a[i] + r);
  }
  std::vector<double> out;
  for (int k = 0; k < static_cast<int>(a.size()); ++k) {
    double l = lo, h = hi;
    for (int it = 0; it < 200 && h - l > 1e-15 * std::max(1.0, std::abs(h)); ++it) {
      const double mid = 0.5 * (l + h);
      if (sturm_count(a, b, mid) > k) h = mid; else l = mid;
    }
    out.push_back(0.5 * (l + h));
  }
  return out;
}

}  // namespace testing
