#include "chainforge/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "chainforge/error.hpp"
#include "compensated_sum.hpp"

namespace chainforge {

using cplx = std::complex<double>;

StateVector::StateVector(std::vector<cplx> amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.empty()) throw Error(ErrorCode::bad_request, "empty state vector");
  if (std::abs(norm() - 1.0) > 1e-10) {
    throw Error(ErrorCode::bad_request, "state vector is not normalised");
  }
}

StateVector StateVector::site(std::size_t n, std::size_t index) {
  if (index >= n) throw Error(ErrorCode::bad_request, "site index out of range", index);
  std::vector<cplx> amps(n, cplx{});
  amps[index] = 1.0;
  return StateVector(std::move(amps));
}

double StateVector::norm() const {
  detail::CompensatedSum s;
  for (const cplx& c : amplitudes_) s += std::norm(c);
  return std::sqrt(s.value());
}

StateVector evolve(const EigenSystem& es, const StateVector& psi0, double t) {
  if (!std::isfinite(t)) throw Error(ErrorCode::bad_request, "evolution time must be finite");
  const std::size_t n = es.size();
  if (psi0.size() != n) throw Error(ErrorCode::bad_request, "state and chain sizes differ");
  if (t == 0.0) return psi0;
  std::vector<cplx> out(n, cplx{});
  for (std::size_t k = 0; k < n; ++k) {
    const auto v = es.eigenvector(k);
    cplx overlap{};
    for (std::size_t j = 0; j < n; ++j) overlap += v[j] * psi0[j];
    const cplx coeff = std::polar(1.0, -es.eigenvalue(k) * t) * overlap;
    for (std::size_t j = 0; j < n; ++j) out[j] += coeff * v[j];
  }
  return StateVector(std::move(out));
}

double site_overlap(const EigenSystem& es, std::size_t from, std::size_t to, double t) {
  const std::size_t n = es.size();
  if (from >= n || to >= n) throw Error(ErrorCode::bad_request, "site index out of range");
  if (t == 0.0) return from == to ? 1.0 : 0.0;
  cplx amp{};
  for (std::size_t k = 0; k < n; ++k) {
    amp += es.component(k, to) * es.component(k, from) * std::polar(1.0, -es.eigenvalue(k) * t);
  }
  return std::min(std::abs(amp), 1.0);
}

double transfer_overlap(const EigenSystem& es, double t) {
  if (es.size() < 2) throw Error(ErrorCode::bad_request, "transfer needs at least two sites");
  return site_overlap(es, 0, es.size() - 1, t);
}

std::vector<double> overlap_trace(const EigenSystem& es, std::span<const double> t_grid) {
  if (t_grid.empty()) throw Error(ErrorCode::bad_request, "time grid is empty");
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) {
    throw Error(ErrorCode::bad_request, "time grid must be ascending");
  }
  std::vector<double> f;
  f.reserve(t_grid.size());
  for (double t : t_grid) f.push_back(transfer_overlap(es, t));
  return f;
}

std::vector<double> linear_grid(double t_min, double t_max, std::size_t points) {
  if (points == 0) throw Error(ErrorCode::bad_request, "time grid needs at least one point");
  if (!(t_max >= t_min) || !std::isfinite(t_min) || !std::isfinite(t_max)) {
    throw Error(ErrorCode::bad_request, "time grid bounds must be finite with t_max >= t_min");
  }
  std::vector<double> grid(points, t_min);
  if (points == 1) return grid;
  const double step = (t_max - t_min) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = t_min + step * static_cast<double>(i);
  grid.back() = t_max;
  return grid;
}

std::optional<double> default_transfer_time(const ChainCouplings& c) {
  if (!c.is_persymmetric()) return std::nullopt;
  const PstReport pst = verify_pst(forward_eigenvalues(c), std::numbers::pi);
  if (!pst.is_pst) return std::nullopt;
  return std::numbers::pi;
}

double average_fidelity(double f) {
  // Overlaps computed at machine precision can exceed one by a few ulps.
  if (!(f >= 0.0 && f <= 1.0 + 1e-12)) {
    throw Error(ErrorCode::bad_request, "overlap must lie in [0, 1]");
  }
  f = std::min(f, 1.0);
  return (3.0 + 2.0 * f + f * f) / 6.0;
}

namespace {

std::vector<std::size_t> by_magnitude(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t i, std::size_t j) { return std::abs(values[i]) < std::abs(values[j]); });
  return idx;
}

}  // namespace

double central_splitting(const ChainCouplings& c) {
  const std::vector<double> ev = tridiagonal_eigenvalues(c.a(), c.b());
  const bool odd = c.size() % 2 == 1;
  const std::size_t count = odd ? 3 : 2;
  if (ev.size() < count) throw Error(ErrorCode::bad_request, "chain too short for a central multiplet");
  const auto idx = by_magnitude(ev);
  double lo = ev[idx[0]];
  double hi = ev[idx[0]];
  for (std::size_t i = 1; i < count; ++i) {
    lo = std::min(lo, ev[idx[i]]);
    hi = std::max(hi, ev[idx[i]]);
  }
  return odd ? 0.5 * (hi - lo) : hi - lo;
}

EffectiveModel effective_model(const ChainCouplings& c) {
  const std::size_t n = c.size();
  if (n < 4) throw Error(ErrorCode::bad_request, "the end-coupling picture needs N >= 4");
  const auto a = c.a();
  const auto b = c.b();
  const double b_scale = *std::max_element(b.begin(), b.end());
  for (double aj : a) {
    if (std::abs(aj) > 1e-12 * b_scale) {
      throw Error(ErrorCode::bad_request, "the end-coupling picture assumes vanishing fields");
    }
  }
  const double b_end = b.front();
  if (std::abs(b.back() - b_end) > 1e-12 * std::max(b_end, b.back())) {
    throw Error(ErrorCode::bad_request, "end couplings b_1 and b_{N-1} must be equal");
  }

  // H0 splits into the two isolated end sites and the inner chain 2..N-1,
  // so its modes are |1>, |N> and the inner chain's eigenvectors.
  const std::vector<double> inner_diag(n - 2, 0.0);
  const std::vector<double> inner_off(b.begin() + 1, b.end() - 1);
  const EigenSystem inner = eigendecompose(inner_diag, inner_off);
  const std::size_t inner_n = inner.size();

  EffectiveModel m;
  m.parity = (n % 2 == 1) ? ChainParity::odd_N : ChainParity::even_N;

  std::size_t zero_mode = inner_n;  // none
  if (m.parity == ChainParity::odd_N) {
    const auto idx = by_magnitude(inner.eigenvalues());
    zero_mode = idx.front();
    m.v01 = b.front() * inner.component(zero_mode, 0);
    m.v0n = b.back() * inner.component(zero_mode, inner_n - 1);
    m.nu = std::sqrt(2.0) * std::abs(m.v01);
  }

  detail::CompensatedSum omega;
  double omega_terms = 0.0;
  m.xi_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < inner_n; ++k) {
    if (k == zero_mode) continue;
    const double xi = inner.eigenvalue(k);
    const double v1k = b.front() * inner.component(k, 0);
    const double vkn = b.back() * inner.component(k, inner_n - 1);
    omega += v1k * vkn / (xi * xi);
    omega_terms += std::abs(v1k * vkn / (xi * xi));
    m.xi_min = std::min(m.xi_min, std::abs(xi));
  }
  m.omega = -2.0 * omega.value();
  // Even N: the +-xi pairs cancel exactly; keep the residue out of predicted_tau.
  if (std::abs(omega.value()) <= 1e-12 * omega_terms) m.omega = 0.0;
  m.detuning_1 = 0.0;
  m.detuning_n = 0.0;

  const double rate = (m.parity == ChainParity::odd_N) ? m.nu : std::abs(m.omega);
  m.predicted_tau = rate > 0.0 ? std::numbers::pi / rate : std::numeric_limits<double>::infinity();
  m.validity_warning = m.nu >= 0.1 * m.xi_min || std::abs(m.omega) >= 0.1 * m.xi_min;

  m.exact_frequency = central_splitting(c);
  m.exact_tau = std::numbers::pi / m.exact_frequency;
  m.tau_discrepancy = m.predicted_tau / m.exact_tau - 1.0;

  std::vector<double> halved(b.begin(), b.end());
  halved.front() *= 0.5;
  halved.back() *= 0.5;
  const double split_half = central_splitting(ChainCouplings(std::vector<double>(a.begin(), a.end()), halved));
  m.splitting_exponent = std::log2(m.exact_frequency / split_half);
  return m;
}

cplx EffectiveModel::end_amplitude(double t) const {
  if (parity == ChainParity::odd_N) {
    // Basis (|1>, |xi_0>, |N>) is tridiagonal once omega is dropped.
    const double diag[3] = {0.0, 0.0, 0.0};
    const double off[2] = {v01, v0n};
    const EigenSystem es = eigendecompose(diag, off);
    return evolve(es, StateVector::site(3, 0), t)[2];
  }
  const double diag[2] = {0.0, 0.0};
  const double off[1] = {0.5 * omega};
  const EigenSystem es = eigendecompose(diag, off);
  return evolve(es, StateVector::site(2, 0), t)[1];
}

}  // namespace chainforge
