#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "chainforge/dynamics.hpp"
#include "chainforge/error.hpp"

namespace chainforge {

namespace {

// Symmetric tridiagonal QL with implicit Wilkinson shifts, after the
// tql1/tql2 procedures of Bowdler, Martin, Reinsch and Wilkinson.
// `d` holds the diagonal, `e` the off-diagonal padded with a trailing
// zero. With `z` non-empty, eigenvector i is accumulated in
// z[i*n .. i*n + n) starting from the identity.
void implicit_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  const std::size_t n = d.size();
  const bool vectors = !z.empty();
  constexpr double eps = std::numeric_limits<double>::epsilon();

  double shift_total = 0.0;
  double tst1 = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n - 1 && std::abs(e[m]) > eps * tst1) ++m;

    if (m > l) {
      int sweeps = 0;
      do {
        if (++sweeps > kMaxSweepsPerEigenvalue) {
          throw Error(ErrorCode::eigensolver_failure,
                      "QL iteration did not converge for eigenvalue " + std::to_string(l) + " within " +
                          std::to_string(kMaxSweepsPerEigenvalue) + " sweeps",
                      l);
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        shift_total += h;

        p = d[m];
        double c = 1.0;
        double c2 = c;
        double c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          if (vectors) {
            double* vi = z.data() + ii * n;
            double* vi1 = vi + n;
            for (std::size_t k = 0; k < n; ++k) {
              const double t = vi1[k];
              vi1[k] = s * vi[k] + c * t;
              vi[k] = c * vi[k] - s * t;
            }
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += shift_total;
    e[l] = 0.0;
  }
}

void check_input(std::span<const double> diag, std::span<const double> offdiag) {
  if (diag.empty()) throw Error(ErrorCode::bad_request, "empty matrix");
  if (offdiag.size() + 1 != diag.size()) {
    throw Error(ErrorCode::bad_request, "off-diagonal must have one entry fewer than the diagonal");
  }
  for (std::size_t j = 0; j < diag.size(); ++j) {
    if (!std::isfinite(diag[j])) throw Error(ErrorCode::bad_request, "non-finite diagonal entry", j);
  }
  for (std::size_t j = 0; j < offdiag.size(); ++j) {
    if (!std::isfinite(offdiag[j])) throw Error(ErrorCode::bad_request, "non-finite off-diagonal entry", j);
  }
}

std::vector<double> padded(std::span<const double> offdiag) {
  std::vector<double> e(offdiag.begin(), offdiag.end());
  e.push_back(0.0);
  return e;
}

}  // namespace

EigenSystem::EigenSystem(std::vector<double> eigenvalues, std::vector<double> vectors)
    : values_(std::move(eigenvalues)), vectors_(std::move(vectors)) {
  if (vectors_.size() != values_.size() * values_.size()) {
    throw Error(ErrorCode::bad_request, "eigenvector storage does not match the number of eigenvalues");
  }
}

EigenSystem eigendecompose(std::span<const double> diag, std::span<const double> offdiag) {
  check_input(diag, offdiag);
  const std::size_t n = diag.size();
  std::vector<double> d(diag.begin(), diag.end());
  std::vector<double> e = padded(offdiag);
  std::vector<double> z(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) z[i * n + i] = 1.0;

  implicit_ql(d, e, z);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });

  std::vector<double> values(n);
  std::vector<double> vectors(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    values[k] = d[src];
    const double* v = z.data() + src * n;
    double sign = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(v[j]) > 1e-10) {
        sign = v[j] > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t j = 0; j < n; ++j) vectors[k * n + j] = sign * v[j];
  }
  return EigenSystem(std::move(values), std::move(vectors));
}

EigenSystem eigendecompose(const ChainCouplings& c) { return eigendecompose(c.a(), c.b()); }

std::vector<double> tridiagonal_eigenvalues(std::span<const double> diag, std::span<const double> offdiag) {
  check_input(diag, offdiag);
  std::vector<double> d(diag.begin(), diag.end());
  std::vector<double> e = padded(offdiag);
  std::vector<double> none;
  implicit_ql(d, e, none);
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace chainforge
