#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "chainforge/iep.hpp"

namespace chainforge {

// Full spectral decomposition of a real symmetric tridiagonal matrix.
// Eigenvalues ascend; eigenvector k is stored contiguously and its first
// component above 1e-10 in magnitude is positive.
class EigenSystem {
 public:
  EigenSystem(std::vector<double> eigenvalues, std::vector<double> vectors);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> eigenvalues() const noexcept { return values_; }
  double eigenvalue(std::size_t k) const { return values_[k]; }
  std::span<const double> eigenvector(std::size_t k) const {
    return {vectors_.data() + k * size(), size()};
  }
  // Component of eigenvector k on site j.
  double component(std::size_t k, std::size_t j) const { return vectors_[k * size() + j]; }

 private:
  std::vector<double> values_;
  std::vector<double> vectors_;
};

inline constexpr int kMaxSweepsPerEigenvalue = 50;

// Implicit QL with Wilkinson shifts. `offdiag` has one entry fewer than
// `diag`; zero entries are allowed and split the matrix into blocks.
EigenSystem eigendecompose(std::span<const double> diag, std::span<const double> offdiag);
EigenSystem eigendecompose(const ChainCouplings& c);

// Eigenvalues only; same iteration without accumulating vectors.
std::vector<double> tridiagonal_eigenvalues(std::span<const double> diag,
                                            std::span<const double> offdiag);

// Normalised single-excitation state in the site basis.
class StateVector {
 public:
  explicit StateVector(std::vector<std::complex<double>> amplitudes);

  // |site> with a zero-based site index.
  static StateVector site(std::size_t n, std::size_t index);

  std::span<const std::complex<double>> amplitudes() const noexcept { return amplitudes_; }
  std::size_t size() const noexcept { return amplitudes_.size(); }
  std::complex<double> operator[](std::size_t j) const { return amplitudes_[j]; }
  double norm() const;

 private:
  std::vector<std::complex<double>> amplitudes_;
};

// psi(t) = sum_k exp(-i lambda_k t) |k><k|psi(0)>.
StateVector evolve(const EigenSystem& es, const StateVector& psi0, double t);

// |<to| exp(-i H t) |from>|, zero-based sites.
double site_overlap(const EigenSystem& es, std::size_t from, std::size_t to, double t);

// f_{1,N}(t) = |<N| exp(-i H t) |1>|.
double transfer_overlap(const EigenSystem& es, double t);

// Pointwise transfer_overlap on a non-empty ascending grid.
std::vector<double> overlap_trace(const EigenSystem& es, std::span<const double> t_grid);

// `points` evenly spaced times from t_min to t_max inclusive.
std::vector<double> linear_grid(double t_min, double t_max, std::size_t points);

// pi when the chain is mirror symmetric and its eigenvalues satisfy the
// transfer phase condition at pi; nullopt otherwise.
std::optional<double> default_transfer_time(const ChainCouplings& c);

// Fidelity averaged over the Bloch sphere: 1/2 + f/3 + f^2/6.
double average_fidelity(double f);

enum class ChainParity { odd_N, even_N };

// Weak end-coupling picture: the chain is split into H0 (end couplings
// removed) and V (the two end couplings), and the dynamics reduced to the
// zero-energy subspace of H0.
struct EffectiveModel {
  ChainParity parity = ChainParity::odd_N;
  double nu = 0.0;         // sqrt(2) |V_01|; zero for even N
  double v01 = 0.0;        // <xi_0|V|1>, odd N only
  double v0n = 0.0;        // <xi_0|V|N>, odd N only
  double omega = 0.0;      // -2 sum_k V_1k V_kN / xi_k^2 over nonzero modes,
                           // 0 when it cancels to round-off (always for even N)
  double detuning_1 = 0.0;
  double detuning_n = 0.0;
  double predicted_tau = 0.0;  // pi/nu (odd) or pi/|omega| (even); +inf if zero
  double xi_min = 0.0;         // smallest nonzero |xi_k| of H0
  bool validity_warning = false;

  // Cross-check against exact diagonalisation of the full chain.
  double exact_frequency = 0.0;  // half triplet width (odd), doublet splitting (even)
  double exact_tau = 0.0;        // pi / exact_frequency
  double tau_discrepancy = 0.0;  // predicted_tau / exact_tau - 1
  double splitting_exponent = 0.0;  // d log(splitting) / d log(b_end), measured

  // Amplitude on site N at time t predicted by the reduced model, starting
  // from site 1. Odd N uses the three-level zero-mode problem with omega
  // neglected; even N the two-level Rabi problem.
  std::complex<double> end_amplitude(double t) const;
};

// Requires zero fields, equal end couplings and N >= 4.
EffectiveModel effective_model(const ChainCouplings& c);

// Splitting of the central eigenvalues of the full chain: half the width
// of the three smallest-magnitude levels for odd N, the gap of the two
// smallest-magnitude levels for even N.
double central_splitting(const ChainCouplings& c);

}  // namespace chainforge
