#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace chainforge {

enum class Family { linear, inverted_quadratic, cosine, custom };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

// Provenance of a generated spectrum. `A` is only meaningful for the linear
// family; `C` records the total sign shift applied.
struct SpectrumParams {
  std::optional<int> A;
  double C = 0.0;
  std::size_t N = 0;
};

// Ordered set of distinct single-excitation energies.
//
// Values are sorted on construction. Construction fails with
// ErrorCode::invalid_spectrum if fewer than two values are given, any value
// is non-finite, two adjacent values are closer than 1e-12 of the spectral
// range, or a non-custom family is not symmetric about zero.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> values, Family family = Family::custom,
                    SpectrumParams params = {});

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  Family family() const noexcept { return family_; }
  const SpectrumParams& params() const noexcept { return params_; }

  double min() const noexcept { return values_.front(); }
  double max() const noexcept { return values_.back(); }

  // True when values are mirror images of each other about zero within
  // `tol` absolute.
  bool is_symmetric(double tol = 1e-12) const;

  Spectrum scaled(double factor) const;

 private:
  std::vector<double> values_;
  Family family_;
  SpectrumParams params_;
};

inline constexpr double kDistinctTolerance = 1e-12;
inline constexpr double kSymmetryTolerance = 1e-12;

// lambda_k = A k, k = -(N-1)/2 .. (N-1)/2 in unit steps (half-integer k for even N).
Spectrum generate_linear(int n, int a);

// lambda_k = k (N - 1 - |k|), odd N only.
Spectrum generate_inverted_quadratic(int n);

// lambda_k = 2 cos(pi k / (N + 1)), the spectrum of the uniform chain b_j = 1.
Spectrum generate_cosine(int n);

// lambda_k -> lambda_k - sgn(lambda_k) C. C must be below the smallest
// nonzero |lambda_k| and must not collapse two values onto each other.
Spectrum shift_spectrum(const Spectrum& s, double c);

struct PstReport {
  bool is_pst = false;
  double tau = 0.0;
  double phi = 0.0;              // (-pi, pi]
  double max_phase_error = 0.0;  // radians
};

// Checks exp(-i lambda_k tau) = (-1)^k exp(i phi) for a single global phase
// phi, with k counted in increasing-energy order. phi is chosen to minimise
// the largest residual phase.
PstReport verify_pst(const Spectrum& s, double tau, double tolerance = 1e-9);

// sum_k w_k lambda_k^2 / sum_k w_k with w_k = |prod_{p != k}(lambda_k - lambda_p)|^-1.
double weighted_variance(const Spectrum& s);

// Weighted variance divided by the squared smallest |lambda_k|. Zero
// eigenvalues (|lambda| <= 1e-12 max|lambda|) never count as the minimum,
// and `central_count` further smallest-magnitude eigenvalues are set aside
// as nearly zero. Values far below one indicate end-localised states.
double boundary_metric(const Spectrum& s, std::size_t central_count);

// Three-band stepwise spectrum: m central levels spaced delta, a gap gamma,
// and M levels spaced Delta in each outer band.
struct BandModel {
  double delta = 1.0;
  double gamma = 1.0;
  double Delta = 1.0;
  int m = 1;
  int M = 1;
};

// (delta / gamma)^m (gamma / Delta)^M; small values mark the regime where the
// central band produces end-localised states.
double band_condition(const BandModel& b);

}  // namespace chainforge
