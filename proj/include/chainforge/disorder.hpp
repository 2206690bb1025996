#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <stop_token>
#include <string_view>
#include <vector>

#include "chainforge/iep.hpp"

namespace chainforge {

// SplitMix64 (Steele, Lea, Flood 2014). Every Monte Carlo sample owns one
// generator whose state is derived from (seed, sample index) alone, so
// results do not depend on how samples are spread over threads.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept;

  std::uint64_t next() noexcept;

  // Top 53 bits mapped to [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// b_j -> b_j (1 + R_j), R_j uniform on [-r, r], drawn independently per
// coupling. Fields are left untouched.
ChainCouplings perturb_couplings(const ChainCouplings& c, double r, SplitMix64& rng);

struct DisorderConfig {
  double r = 0.0;
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  double tau = 0.0;
  std::size_t bins = 50;
  std::size_t threads = 0;  // 0: default_worker_count()
};

// Equal-width bins on [0, 1]; bins are left-closed, the last one also
// right-closed.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> samples, std::size_t bins);

enum class FitMethod { mle, moments };

std::string_view to_string(FitMethod method);

struct BetaFit {
  double alpha = 1.0;
  double beta = 1.0;
  double mu = 0.5;
  double sigma2 = 1.0 / 12.0;
  FitMethod method = FitMethod::mle;
  int iterations = 0;

  static BetaFit from_shape(double alpha, double beta, FitMethod method, int iterations = 0);
};

// Maximum-likelihood beta fit by damped Newton iteration started from the
// method-of-moments estimate; returns the moments estimate if Newton does
// not converge within 100 iterations. Samples are clamped into
// [1e-9, 1 - 1e-9]. Needs at least 10 samples with nonzero variance.
BetaFit fit_beta(std::span<const double> samples);

// Method-of-moments estimate alone.
BetaFit fit_beta_moments(std::span<const double> samples);

struct DisorderReport {
  std::vector<double> overlaps;
  double mean = 0.0;
  Histogram hist;
  std::optional<BetaFit> fit;  // absent when the sample cannot be fitted

  // Fraction of samples with overlap >= threshold.
  double fraction_at_least(double threshold) const;
};

// Invoked with the number of completed samples; may be called from worker
// threads.
using ProgressCallback = std::function<void(std::size_t)>;

struct Cancelled : std::exception {
  const char* what() const noexcept override { return "disorder run cancelled"; }
};

// Samples f_{1,N}(tau) over independently perturbed copies of `c`.
// Deterministic in (c, cfg) for any thread count. Throws Cancelled when the
// stop token fires before completion.
DisorderReport run_experiment(const ChainCouplings& c, const DisorderConfig& cfg,
                              const ProgressCallback& progress = {},
                              std::stop_token stop = {});

// Hardware concurrency capped by the CHAINFORGE_THREADS environment variable.
std::size_t default_worker_count();

}  // namespace chainforge
