#include "chainforge/iep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chainforge/dynamics.hpp"
#include "chainforge/error.hpp"
#include "compensated_sum.hpp"

namespace chainforge {

ChainCouplings::ChainCouplings(std::vector<double> a, std::vector<double> b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_.size() < 2) throw Error(ErrorCode::bad_request, "a chain needs at least two sites");
  if (b_.size() + 1 != a_.size()) {
    throw Error(ErrorCode::bad_request, "a chain of " + std::to_string(a_.size()) + " sites needs " +
                                            std::to_string(a_.size() - 1) + " couplings");
  }
  for (std::size_t j = 0; j < a_.size(); ++j) {
    if (!std::isfinite(a_[j])) {
      throw Error(ErrorCode::bad_request, "field a[" + std::to_string(j) + "] is not finite", j);
    }
  }
  for (std::size_t j = 0; j < b_.size(); ++j) {
    if (!(b_[j] > 0.0) || !std::isfinite(b_[j])) {
      throw Error(ErrorCode::bad_request,
                  "coupling b[" + std::to_string(j) + "] must be positive and finite", j);
    }
  }
}

bool ChainCouplings::is_persymmetric() const noexcept {
  return std::equal(a_.begin(), a_.end(), a_.rbegin()) && std::equal(b_.begin(), b_.end(), b_.rbegin());
}

ChainCouplings ChainCouplings::uniform(std::size_t n, double b) {
  return ChainCouplings(std::vector<double>(n, 0.0), std::vector<double>(n > 0 ? n - 1 : 0, b));
}

namespace {

// |prod_{p != k}(x_k - x_p)| as mantissa * 2^exponent, immune to
// intermediate over- and underflow.
struct ScaledProduct {
  double mantissa = 1.0;
  long exponent = 0;
};

std::vector<ScaledProduct> node_products(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<ScaledProduct> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    ScaledProduct p;
    for (std::size_t q = 0; q < n; ++q) {
      if (q == k) continue;
      p.mantissa *= std::abs(nodes[k] - nodes[q]);
      int e = 0;
      p.mantissa = std::frexp(p.mantissa, &e);
      p.exponent += e;
    }
    if (p.mantissa == 0.0) {
      throw Error(ErrorCode::invalid_spectrum, "node " + std::to_string(k) + " is repeated", k);
    }
    out[k] = p;
  }
  return out;
}

std::vector<double> to_weights(const std::vector<ScaledProduct>& products) {
  std::vector<double> w(products.size());
  for (std::size_t k = 0; k < products.size(); ++k) {
    const long e = -products[k].exponent;
    if (e > 1020 || e < -1070) {
      throw Error(ErrorCode::solver_overflow,
                  "weight " + std::to_string(k) + " leaves the double range; chain too long for its spectrum",
                  k);
    }
    w[k] = std::ldexp(1.0 / products[k].mantissa, static_cast<int>(e));
    if (!std::isfinite(w[k]) || w[k] == 0.0) {
      throw Error(ErrorCode::solver_overflow,
                  "weight " + std::to_string(k) + " leaves the double range; chain too long for its spectrum",
                  k);
    }
  }
  return w;
}

std::vector<double> rescaled_nodes(const Spectrum& s, double& midpoint, double& scale) {
  midpoint = 0.5 * (s.max() + s.min());
  std::vector<double> x(s.values().begin(), s.values().end());
  scale = 0.0;
  for (double& v : x) {
    v -= midpoint;
    scale = std::max(scale, std::abs(v));
  }
  for (double& v : x) v /= scale;
  return x;
}

}  // namespace

std::vector<double> product_weights(std::span<const double> nodes) {
  return to_weights(node_products(nodes));
}

std::vector<double> compute_weights(const Spectrum& s) {
  double midpoint = 0.0;
  double scale = 1.0;
  const std::vector<double> x = rescaled_nodes(s, midpoint, scale);
  return product_weights(x);
}

SolverWorkspace prepare_workspace(const Spectrum& s) {
  SolverWorkspace ws;
  ws.nodes = rescaled_nodes(s, ws.midpoint, ws.scale);
  const std::vector<ScaledProduct> products = node_products(ws.nodes);

  // Normalise so the largest weight is one. Ratios of scalar products are
  // unaffected, and the normalised weights cannot overflow.
  long smallest_exponent = products.front().exponent;
  for (const auto& p : products) smallest_exponent = std::min(smallest_exponent, p.exponent);
  ws.weights.resize(products.size());
  double largest = 0.0;
  for (std::size_t k = 0; k < products.size(); ++k) {
    ws.weights[k] = std::ldexp(1.0 / products[k].mantissa,
                               static_cast<int>(smallest_exponent - products[k].exponent));
    largest = std::max(largest, ws.weights[k]);
  }
  for (std::size_t k = 0; k < ws.weights.size(); ++k) {
    ws.weights[k] /= largest;
    if (!(ws.weights[k] > 0.0)) {
      throw Error(ErrorCode::solver_overflow,
                  "weight " + std::to_string(k) + " underflows; chain too long for its spectrum", k);
    }
  }
  ws.poly_prev.assign(ws.nodes.size(), 0.0);
  ws.poly_curr.assign(ws.nodes.size(), 1.0);
  return ws;
}

ChainCouplings solve(const Spectrum& s) {
  SolverWorkspace ws = prepare_workspace(s);
  const std::size_t n = s.size();
  const std::size_t half = (n % 2 == 1) ? (n + 1) / 2 : n / 2;

  std::vector<double> a(half);
  std::vector<double> b2(half);  // squared couplings on the rescaled problem
  std::vector<double> next(n);
  double b2_prev = 0.0;

  for (std::size_t j = 0; j < half; ++j) {
    detail::CompensatedSum norm_prev;
    detail::CompensatedSum moment;
    for (std::size_t k = 0; k < n; ++k) {
      const double wp2 = ws.weights[k] * ws.poly_curr[k] * ws.poly_curr[k];
      norm_prev += wp2;
      moment += wp2 * ws.nodes[k];
    }
    const double den = norm_prev.value();
    if (!(den > 0.0) || !std::isfinite(den)) {
      throw Error(ErrorCode::solver_overflow,
                  "polynomial norm degenerates at step " + std::to_string(j + 1), j);
    }
    a[j] = moment.value() / den;

    detail::CompensatedSum norm_next;
    for (std::size_t k = 0; k < n; ++k) {
      next[k] = (ws.nodes[k] - a[j]) * ws.poly_curr[k] - b2_prev * ws.poly_prev[k];
      norm_next += ws.weights[k] * next[k] * next[k];
    }
    b2[j] = norm_next.value() / den;
    if (!(b2[j] > 0.0) || !std::isfinite(b2[j])) {
      throw Error(ErrorCode::solver_overflow,
                  "coupling " + std::to_string(j + 1) + " is not representable; chain too long", j);
    }
    b2_prev = b2[j];
    // Monic p_j decay like 2^-j on [-1, 1]. Rescaling p_{j-1} and p_j by the
    // same factor leaves every later ratio untouched and keeps long chains
    // away from underflow.
    const double renorm = 1.0 / std::sqrt(norm_next.value());
    for (std::size_t k = 0; k < n; ++k) {
      next[k] *= renorm;
      ws.poly_curr[k] *= renorm;
    }
    std::swap(ws.poly_prev, ws.poly_curr);
    std::swap(ws.poly_curr, next);
  }

  std::vector<double> full_a(n);
  std::vector<double> full_b(n - 1);
  for (std::size_t j = 0; j < half; ++j) {
    const double aj = ws.scale * a[j] + ws.midpoint;
    full_a[j] = aj;
    full_a[n - 1 - j] = aj;
  }
  // Odd N: b_1..b_{M-1} mirrored, the last computed coupling is unused.
  // Even N: b_1..b_M with b_M the central coupling.
  const std::size_t b_count = (n % 2 == 1) ? half - 1 : half;
  for (std::size_t j = 0; j < b_count; ++j) {
    const double bj = ws.scale * std::sqrt(b2[j]);
    full_b[j] = bj;
    full_b[n - 2 - j] = bj;
  }
  return ChainCouplings(std::move(full_a), std::move(full_b));
}

Spectrum forward_eigenvalues(const ChainCouplings& c) {
  return Spectrum(tridiagonal_eigenvalues(c.a(), c.b()));
}

}  // namespace chainforge
