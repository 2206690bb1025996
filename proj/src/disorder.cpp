#include "chainforge/disorder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "chainforge/dynamics.hpp"
#include "chainforge/error.hpp"
#include "compensated_sum.hpp"

namespace chainforge {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

SplitMix64 SplitMix64::substream(std::uint64_t seed, std::uint64_t index) noexcept {
  return SplitMix64(mix64(mix64(seed + kGolden) + index));
}

std::uint64_t SplitMix64::next() noexcept {
  state_ += kGolden;
  return mix64(state_);
}

ChainCouplings perturb_couplings(const ChainCouplings& c, double r, SplitMix64& rng) {
  if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorCode::bad_request, "disorder level r must lie in [0, 1)");
  std::vector<double> b(c.b().begin(), c.b().end());
  for (double& bj : b) bj *= 1.0 + r * (2.0 * rng.uniform() - 1.0);
  return ChainCouplings(std::vector<double>(c.a().begin(), c.a().end()), std::move(b));
}

Histogram histogram(std::span<const double> samples, std::size_t bins) {
  if (bins == 0) throw Error(ErrorCode::bad_request, "histogram needs at least one bin");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = static_cast<double>(i) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (double x : samples) {
    const double clamped = std::clamp(x, 0.0, 1.0);
    auto i = static_cast<std::size_t>(std::floor(clamped * static_cast<double>(bins)));
    i = std::min(i, bins - 1);
    // x * bins can land on the wrong side of an edge by one ulp.
    if (i > 0 && clamped < h.edges[i]) --i;
    if (i + 1 < bins && clamped >= h.edges[i + 1]) ++i;
    ++h.counts[i];
  }
  return h;
}

std::string_view to_string(FitMethod method) {
  return method == FitMethod::mle ? "mle" : "moments";
}

BetaFit BetaFit::from_shape(double alpha, double beta, FitMethod method, int iterations) {
  BetaFit f;
  f.alpha = alpha;
  f.beta = beta;
  const double s = alpha + beta;
  f.mu = alpha / s;
  f.sigma2 = alpha * beta / (s * s * (s + 1.0));
  f.method = method;
  f.iterations = iterations;
  return f;
}

namespace {

constexpr double kClamp = 1e-9;

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mean_log = 0.0;       // <ln x>
  double mean_log1m = 0.0;     // <ln(1 - x)>
};

SampleMoments moments_of(std::span<const double> samples) {
  if (samples.size() < 10) throw Error(ErrorCode::bad_request, "beta fit needs at least 10 samples");
  detail::CompensatedSum sum;
  detail::CompensatedSum sum_log;
  detail::CompensatedSum sum_log1m;
  for (double x : samples) {
    const double v = std::clamp(x, kClamp, 1.0 - kClamp);
    sum += v;
    sum_log += std::log(v);
    sum_log1m += std::log1p(-v);
  }
  const double n = static_cast<double>(samples.size());
  SampleMoments m;
  m.mean = sum.value() / n;
  detail::CompensatedSum sq;
  for (double x : samples) {
    const double d = std::clamp(x, kClamp, 1.0 - kClamp) - m.mean;
    sq += d * d;
  }
  m.variance = sq.value() / (n - 1.0);
  m.mean_log = sum_log.value() / n;
  m.mean_log1m = sum_log1m.value() / n;
  if (!(m.variance > 0.0)) throw Error(ErrorCode::bad_request, "beta fit needs samples with nonzero variance");
  return m;
}

BetaFit moments_estimate(const SampleMoments& m) {
  const double common = m.mean * (1.0 - m.mean) / m.variance - 1.0;
  if (!(common > 0.0)) {
    throw Error(ErrorCode::bad_request, "sample variance too large for a beta distribution");
  }
  return BetaFit::from_shape(m.mean * common, (1.0 - m.mean) * common, FitMethod::moments);
}

// Mean log-likelihood per sample.
double log_likelihood(double alpha, double beta, const SampleMoments& m) {
  using boost::math::lgamma;
  return (alpha - 1.0) * m.mean_log + (beta - 1.0) * m.mean_log1m - lgamma(alpha) - lgamma(beta) +
         lgamma(alpha + beta);
}

}  // namespace

BetaFit fit_beta_moments(std::span<const double> samples) { return moments_estimate(moments_of(samples)); }

BetaFit fit_beta(std::span<const double> samples) {
  using boost::math::digamma;
  using boost::math::trigamma;

  const SampleMoments m = moments_of(samples);
  const BetaFit start = moments_estimate(m);
  double alpha = start.alpha;
  double beta = start.beta;
  double ll = log_likelihood(alpha, beta, m);

  for (int iter = 1; iter <= 100; ++iter) {
    const double psi_sum = digamma(alpha + beta);
    const double g1 = psi_sum - digamma(alpha) + m.mean_log;
    const double g2 = psi_sum - digamma(beta) + m.mean_log1m;
    const double tri_sum = trigamma(alpha + beta);
    const double h11 = tri_sum - trigamma(alpha);
    const double h22 = tri_sum - trigamma(beta);
    const double h12 = tri_sum;
    const double det = h11 * h22 - h12 * h12;
    if (!(det > 0.0) || !std::isfinite(det)) break;
    // Newton direction -H^{-1} g; H is negative definite.
    const double d_alpha = -(h22 * g1 - h12 * g2) / det;
    const double d_beta = -(h11 * g2 - h12 * g1) / det;

    double step = 1.0;
    double next_alpha = alpha + d_alpha;
    double next_beta = beta + d_beta;
    double next_ll = 0.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      next_alpha = alpha + step * d_alpha;
      next_beta = beta + step * d_beta;
      if (next_alpha > 0.0 && next_beta > 0.0) {
        next_ll = log_likelihood(next_alpha, next_beta, m);
        if (next_ll >= ll - 1e-14 * std::abs(ll)) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const double change = std::abs(next_alpha - alpha) / alpha + std::abs(next_beta - beta) / beta;
    alpha = next_alpha;
    beta = next_beta;
    ll = next_ll;
    if (change < 1e-12) return BetaFit::from_shape(alpha, beta, FitMethod::mle, iter);
  }
  return start;
}

double DisorderReport::fraction_at_least(double threshold) const {
  if (overlaps.empty()) return 0.0;
  const auto count = std::count_if(overlaps.begin(), overlaps.end(), [&](double f) { return f >= threshold; });
  return static_cast<double>(count) / static_cast<double>(overlaps.size());
}

std::size_t default_worker_count() {
  std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CHAINFORGE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) workers = std::min(workers, static_cast<std::size_t>(cap));
  }
  return workers;
}

DisorderReport run_experiment(const ChainCouplings& c, const DisorderConfig& cfg,
                              const ProgressCallback& progress, std::stop_token stop) {
  if (!(cfg.r >= 0.0 && cfg.r < 1.0)) throw Error(ErrorCode::bad_request, "disorder level r must lie in [0, 1)");
  if (cfg.samples < 1) throw Error(ErrorCode::bad_request, "need at least one sample");
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) {
    throw Error(ErrorCode::bad_request, "transfer time must be positive");
  }
  if (cfg.bins < 1) throw Error(ErrorCode::bad_request, "histogram needs at least one bin");

  DisorderReport report;
  report.overlaps.assign(cfg.samples, 0.0);

  const std::size_t workers =
      std::min(cfg.threads > 0 ? cfg.threads : default_worker_count(), cfg.samples);
  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> next_chunk{0};
  std::atomic<std::size_t> completed{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    try {
      for (;;) {
        if (failed.load(std::memory_order_relaxed) || stop.stop_requested()) return;
        const std::size_t begin = next_chunk.fetch_add(1) * kChunk;
        if (begin >= cfg.samples) return;
        const std::size_t end = std::min(begin + kChunk, cfg.samples);
        for (std::size_t i = begin; i < end; ++i) {
          SplitMix64 rng = SplitMix64::substream(cfg.seed, i);
          const ChainCouplings perturbed = perturb_couplings(c, cfg.r, rng);
          try {
            report.overlaps[i] = transfer_overlap(eigendecompose(perturbed), cfg.tau);
          } catch (const Error& e) {
            throw Error(e.code(), "sample " + std::to_string(i) + ": " + e.what(), i);
          }
        }
        const std::size_t done = completed.fetch_add(end - begin) + (end - begin);
        if (progress) progress(done);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      failed = true;
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  if (completed.load() < cfg.samples) throw Cancelled{};

  detail::CompensatedSum sum;
  for (double f : report.overlaps) sum += f;
  report.mean = sum.value() / static_cast<double>(cfg.samples);
  report.hist = histogram(report.overlaps, cfg.bins);
  try {
    report.fit = fit_beta(report.overlaps);
  } catch (const Error&) {
    report.fit.reset();
  }
  return report;
}

}  // namespace chainforge
