#include "chainforge/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "chainforge/error.hpp"
#include "chainforge/iep.hpp"
#include "compensated_sum.hpp"

namespace chainforge {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::linear: return "linear";
    case Family::inverted_quadratic: return "inverted_quadratic";
    case Family::cosine: return "cosine";
    case Family::custom: return "custom";
  }
  return "custom";
}

Family family_from_string(std::string_view name) {
  if (name == "linear") return Family::linear;
  if (name == "inverted_quadratic") return Family::inverted_quadratic;
  if (name == "cosine") return Family::cosine;
  if (name == "custom") return Family::custom;
  throw Error(ErrorCode::bad_request, "unknown spectrum family '" + std::string(name) + "'");
}

Spectrum::Spectrum(std::vector<double> values, Family family, SpectrumParams params)
    : values_(std::move(values)), family_(family), params_(params) {
  if (values_.size() < 2) {
    throw Error(ErrorCode::invalid_spectrum, "a spectrum needs at least two eigenvalues");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw Error(ErrorCode::invalid_spectrum, "eigenvalue " + std::to_string(k) + " is not finite", k);
    }
  }
  std::sort(values_.begin(), values_.end());
  const double range = values_.back() - values_.front();
  for (std::size_t k = 1; k < values_.size(); ++k) {
    if (!(values_[k] - values_[k - 1] > kDistinctTolerance * range)) {
      throw Error(ErrorCode::invalid_spectrum,
                  "eigenvalues " + std::to_string(k - 1) + " and " + std::to_string(k) +
                      " are not distinct",
                  k);
    }
  }
  params_.N = values_.size();
  if (family_ != Family::custom && !is_symmetric(kSymmetryTolerance)) {
    throw Error(ErrorCode::invalid_spectrum,
                std::string(to_string(family_)) + " spectrum must be symmetric about zero");
  }
}

bool Spectrum::is_symmetric(double tol) const {
  const std::size_t n = values_.size();
  for (std::size_t k = 0; k < n / 2 + 1 && k < n; ++k) {
    if (std::abs(values_[k] + values_[n - 1 - k]) > tol) return false;
  }
  return true;
}

Spectrum Spectrum::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::bad_request, "scale factor must be positive and finite");
  }
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  SpectrumParams p = params_;
  p.C *= factor;
  return Spectrum(std::move(v), Family::custom, p);
}

Spectrum generate_linear(int n, int a) {
  if (n < 2) throw Error(ErrorCode::invalid_spectrum, "linear spectrum needs N >= 2");
  if (a < 1 || a % 2 == 0) {
    throw Error(ErrorCode::invalid_spectrum, "linear spectrum needs an odd A >= 1");
  }
  std::vector<double> v(static_cast<std::size_t>(n));
  const double half = 0.5 * (n - 1);
  for (int j = 0; j < n; ++j) v[j] = a * (j - half);
  return Spectrum(std::move(v), Family::linear, {.A = a, .C = 0.0, .N = static_cast<std::size_t>(n)});
}

Spectrum generate_inverted_quadratic(int n) {
  if (n < 3 || n % 2 == 0) {
    throw Error(ErrorCode::invalid_spectrum, "inverted quadratic spectrum needs an odd N >= 3");
  }
  const int half = (n - 1) / 2;
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n));
  for (int k = -half; k <= half; ++k) v.push_back(static_cast<double>(k) * (n - 1 - std::abs(k)));
  return Spectrum(std::move(v), Family::inverted_quadratic, {.A = std::nullopt, .C = 0.0, .N = static_cast<std::size_t>(n)});
}

Spectrum generate_cosine(int n) {
  if (n < 2) throw Error(ErrorCode::invalid_spectrum, "cosine spectrum needs N >= 2");
  // Only the positive half is evaluated; the rest is mirrored so the
  // spectrum is exactly symmetric.
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  for (int k = 1; k <= n / 2; ++k) {
    const double x = 2.0 * std::cos(std::numbers::pi * k / (n + 1));
    v[n - k] = x;
    v[k - 1] = -x;
  }
  return Spectrum(std::move(v), Family::cosine, {.A = std::nullopt, .C = 0.0, .N = static_cast<std::size_t>(n)});
}

Spectrum shift_spectrum(const Spectrum& s, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw Error(ErrorCode::invalid_spectrum, "shift must be a finite nonnegative number");
  }
  double min_nonzero = std::numeric_limits<double>::infinity();
  for (double x : s.values()) {
    if (x != 0.0) min_nonzero = std::min(min_nonzero, std::abs(x));
  }
  if (c >= min_nonzero) {
    throw Error(ErrorCode::invalid_spectrum,
                "shift " + std::to_string(c) + " must stay below the smallest nonzero |eigenvalue| " +
                    std::to_string(min_nonzero));
  }
  if (c == 0.0) return s;
  std::vector<double> v(s.values().begin(), s.values().end());
  for (double& x : v) {
    if (x > 0.0) {
      x -= c;
    } else if (x < 0.0) {
      x += c;
    }
  }
  SpectrumParams p = s.params();
  p.C += c;
  return Spectrum(std::move(v), Family::custom, p);
}

namespace {

double wrap_phase(double x) {
  double r = std::remainder(x, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

}  // namespace

PstReport verify_pst(const Spectrum& s, double tau, double tolerance) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::bad_request, "transfer time must be positive");
  }
  const std::size_t n = s.size();
  std::vector<double> theta(n);
  for (std::size_t k = 0; k < n; ++k) {
    // arg(exp(-i lambda_k tau) (-1)^k)
    const double parity = (k % 2 == 0) ? 0.0 : std::numbers::pi;
    theta[k] = wrap_phase(-s[k] * tau - parity);
  }
  std::sort(theta.begin(), theta.end());

  // Smallest arc of the circle covering every residual: its complement is
  // the largest gap between neighbouring phases.
  double largest_gap = theta.front() + 2.0 * std::numbers::pi - theta.back();
  std::size_t arc_start = 0;
  for (std::size_t k = 1; k < n; ++k) {
    const double gap = theta[k] - theta[k - 1];
    if (gap > largest_gap) {
      largest_gap = gap;
      arc_start = k;
    }
  }
  const double half_width = 0.5 * (2.0 * std::numbers::pi - largest_gap);

  PstReport report;
  report.tau = tau;
  report.phi = wrap_phase(theta[arc_start] + half_width);
  report.max_phase_error = half_width;
  report.is_pst = half_width < tolerance;
  return report;
}

double weighted_variance(const Spectrum& s) {
  // Weights are computed on the rescaled spectrum; the common factor drops
  // out of the ratio.
  const std::vector<double> w = compute_weights(s);
  detail::CompensatedSum num;
  detail::CompensatedSum den;
  for (std::size_t k = 0; k < s.size(); ++k) {
    num += w[k] * s[k] * s[k];
    den += w[k];
  }
  return num.value() / den.value();
}

double boundary_metric(const Spectrum& s, std::size_t central_count) {
  double largest = 0.0;
  for (double x : s.values()) largest = std::max(largest, std::abs(x));
  std::vector<double> magnitudes;
  magnitudes.reserve(s.size());
  for (double x : s.values()) {
    if (std::abs(x) > 1e-12 * largest) magnitudes.push_back(std::abs(x));
  }
  if (central_count >= magnitudes.size()) {
    throw Error(ErrorCode::bad_request, "central_count must leave at least one nonzero eigenvalue");
  }
  std::nth_element(magnitudes.begin(), magnitudes.begin() + static_cast<std::ptrdiff_t>(central_count),
                   magnitudes.end());
  const double lambda_min = magnitudes[central_count];
  return weighted_variance(s) / (lambda_min * lambda_min);
}

double band_condition(const BandModel& b) {
  if (!(b.delta > 0.0 && b.gamma > 0.0 && b.Delta > 0.0) || b.m < 1 || b.M < 1) {
    throw Error(ErrorCode::bad_request, "band model needs positive spacings and m, M >= 1");
  }
  return std::pow(b.delta / b.gamma, b.m) * std::pow(b.gamma / b.Delta, b.M);
}

}  // namespace chainforge
