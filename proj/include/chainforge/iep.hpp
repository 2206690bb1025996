#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chainforge/spectrum.hpp"

namespace chainforge {

// Diagonal fields a_1..a_N and nearest-neighbour couplings b_1..b_{N-1} of
// the single-excitation Hamiltonian.
//
// All couplings must be finite and strictly positive. Persymmetry is not
// required (randomly perturbed chains break it) but is reported exactly.
class ChainCouplings {
 public:
  ChainCouplings(std::vector<double> a, std::vector<double> b);

  std::span<const double> a() const noexcept { return a_; }
  std::span<const double> b() const noexcept { return b_; }
  std::size_t size() const noexcept { return a_.size(); }

  // a_{N-j+1} == a_j and b_{N-j} == b_j, compared bit for bit.
  bool is_persymmetric() const noexcept;

  // Uniform chain with all couplings equal to `b` and zero fields.
  static ChainCouplings uniform(std::size_t n, double b = 1.0);

 private:
  std::vector<double> a_;
  std::vector<double> b_;
};

// Rescaled problem the recursion actually runs on: x_k = (lambda_k - midpoint) / scale
// lies in [-1, 1] and the weights are normalised to a unit maximum.
struct SolverWorkspace {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> poly_prev;  // p_{j-1}(x_k)
  std::vector<double> poly_curr;  // p_j(x_k)
  double scale = 1.0;
  double midpoint = 0.0;
};

SolverWorkspace prepare_workspace(const Spectrum& s);

// w_k = |prod_{p != k}(x_k - x_p)|^-1 on the spectrum rescaled to [-1, 1].
// The product is accumulated with a separate binary exponent, so only a
// result outside the double range raises ErrorCode::solver_overflow.
std::vector<double> compute_weights(const Spectrum& s);

// Same product on arbitrary distinct nodes, without rescaling.
std::vector<double> product_weights(std::span<const double> nodes);

// Reconstructs the persymmetric Jacobi matrix whose eigenvalues are `s`.
//
// Runs the orthogonal-polynomial recursion (Stieltjes procedure) over the
// discrete measure sum_k w_k delta(x - x_k) for the first half of the chain
// and completes the second half by mirroring. The linear, inverted
// quadratic and cosine families round-trip to ~1e-14 relative up to
// N = 1001; beyond N ~ 1500 the linear family's weights leave the double
// range and ErrorCode::solver_overflow is raised.
ChainCouplings solve(const Spectrum& s);

// Eigenvalues of the chain, ascending, as a custom spectrum.
Spectrum forward_eigenvalues(const ChainCouplings& c);

}  // namespace chainforge
