#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cmath>
#include <random>

#include "chainforge/dynamics.hpp"
#include "chainforge/error.hpp"
#include "chainforge/iep.hpp"
#include "support.hpp"

using namespace chainforge;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Weights by direct product at 50 digits on the [-1, 1] rescaled nodes.
std::vector<big> big_weights(const Spectrum& s) {
  const big mid = (big(s.max()) + big(s.min())) / 2;
  const big half = (big(s.max()) - big(s.min())) / 2;
  std::vector<big> x;
  for (double v : s.values()) x.push_back((big(v) - mid) / half);
  std::vector<big> w;
  for (std::size_t k = 0; k < x.size(); ++k) {
    big prod = 1;
    for (std::size_t p = 0; p < x.size(); ++p) {
      if (p != k) prod *= abs(x[k] - x[p]);
    }
    w.push_back(1 / prod);
  }
  return w;
}

double big_weighted_variance(const Spectrum& s) {
  const std::vector<big> w = big_weights(s);
  big num = 0, den = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    num += w[k] * big(s[k]) * big(s[k]);
    den += w[k];
  }
  return static_cast<double>(num / den);
}

double max_abs(std::span<const double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_SUITE("iep") {

TEST_CASE("weights of small spectra") {
  const auto w3 = compute_weights(Spectrum({-1.0, 0.0, 1.0}));
  CHECK(w3 == std::vector<double>{0.5, 1.0, 0.5});
  const auto w2 = compute_weights(Spectrum({-1.0, 1.0}));
  CHECK(w2 == std::vector<double>{0.5, 0.5});
}

TEST_CASE("weights match a 50-digit product") {
  const Spectrum cases[] = {generate_linear(5, 1), generate_linear(31, 7), generate_inverted_quadratic(41),
                            generate_cosine(60), Spectrum({-3.0, 0.25, 0.5, 7.0, 11.0})};
  for (const Spectrum& s : cases) {
    const auto w = compute_weights(s);
    const auto ref = big_weights(s);
    for (std::size_t k = 0; k < w.size(); ++k) {
      CHECK(w[k] == doctest::Approx(static_cast<double>(ref[k])).epsilon(1e-12));
      CHECK(w[k] > 0.0);
    }
  }
}

TEST_CASE("solve small spectra") {
  const ChainCouplings two = solve(Spectrum({-1.0, 1.0}));
  CHECK(two.a()[0] == doctest::Approx(0.0));
  CHECK(two.a()[1] == doctest::Approx(0.0));
  CHECK(two.b()[0] == doctest::Approx(1.0).epsilon(1e-15));

  const ChainCouplings three = solve(Spectrum({-2.0, 0.0, 2.0}));
  CHECK(three.b()[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(three.b()[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  for (double a : three.a()) CHECK(std::abs(a) < 1e-15);
}

TEST_CASE("linear spectra give the closed-form couplings") {
  // Spacing A: b_j = (A / 2) sqrt(j (N - j)).
  for (int n : {2, 5, 6, 31, 100, 201}) {
    for (int a : {1, 7}) {
      const ChainCouplings c = solve(generate_linear(n, a));
      for (int j = 1; j < n; ++j) {
        const double want = 0.5 * a * std::sqrt(static_cast<double>(j) * (n - j));
        CHECK(c.b()[j - 1] == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
  const ChainCouplings five = solve(generate_linear(5, 1));
  CHECK(five.b()[1] == doctest::Approx(std::sqrt(6.0) / 2).epsilon(1e-14));
}

TEST_CASE("cosine spectra give the uniform chain") {
  for (int n : {2, 5, 16, 51}) {
    const ChainCouplings c = solve(generate_cosine(n));
    for (double b : c.b()) CHECK(std::abs(b - 1.0) < 1e-10);
    for (double a : c.a()) CHECK(std::abs(a) < 1e-12);
  }
}

TEST_CASE("shifting reduces the outer couplings only") {
  const ChainCouplings plain = solve(generate_linear(31, 7));
  const ChainCouplings shifted = solve(shift_spectrum(generate_linear(31, 7), 6));
  CHECK(shifted.b()[0] < 0.5 * plain.b()[0]);
  CHECK(shifted.b()[29] < 0.5 * plain.b()[29]);
  for (std::size_t j = 3; j < 27; ++j) {
    CHECK(std::abs(shifted.b()[j] / plain.b()[j] - 1.0) < 0.15);
  }
}

TEST_CASE("round trip, persymmetry and positivity on random spectra") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> size(3, 101);
  for (int trial = 0; trial < 100; ++trial) {
    const Spectrum s = testing::random_symmetric(gen, size(gen), 100.0);
    const ChainCouplings c = solve(s);
    CHECK(c.is_persymmetric());
    for (double b : c.b()) CHECK(b > 0.0);
    CHECK(max_abs(c.a()) < 1e-12 * max_abs(c.b()));
    // Independent oracle: Sturm bisection rather than the QL solver.
    const auto ev = testing::bisection_eigenvalues(c.a(), c.b());
    CHECK(testing::max_rel_error(ev, s.values()) < 1e-8);
  }
}

TEST_CASE("round trip on asymmetric spectra") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-10.0, 30.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> v;
    for (int k = 0; k < 3 + trial; ++k) v.push_back(u(gen));
    const Spectrum s(v);
    const ChainCouplings c = solve(s);
    CHECK(c.is_persymmetric());
    const Spectrum back = forward_eigenvalues(c);
    CHECK(testing::max_rel_error(back.values(), s.values()) < 1e-8);
  }
}

TEST_CASE("first coupling squared is the weighted variance") {
  for (int n : {11, 31}) {
    const Spectrum cases[] = {generate_linear(n, 7), generate_inverted_quadratic(n), generate_cosine(n),
                              shift_spectrum(generate_linear(n, 7), 6)};
    for (const Spectrum& s : cases) {
      const double b1 = solve(s).b()[0];
      const double oracle = big_weighted_variance(s);
      CHECK(b1 * b1 == doctest::Approx(oracle).epsilon(1e-10));
      CHECK(weighted_variance(s) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("solve is scale covariant") {
  const Spectrum s = generate_inverted_quadratic(21);
  const ChainCouplings base = solve(s);
  for (double c : {1e-3, 0.5, 3.0, 1e4}) {
    const ChainCouplings scaled = solve(s.scaled(c));
    for (std::size_t j = 0; j < base.b().size(); ++j) {
      CHECK(scaled.b()[j] == doctest::Approx(c * base.b()[j]).epsilon(1e-12));
    }
  }
  // An offset spectrum moves the fields but not the couplings.
  std::vector<double> moved(s.values().begin(), s.values().end());
  for (double& v : moved) v += 5.0;
  const ChainCouplings offset = solve(Spectrum(moved));
  for (std::size_t j = 0; j < base.a().size(); ++j) CHECK(offset.a()[j] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("mirror completion is exact for both parities") {
  for (int n : {2, 3, 4, 5, 30, 31}) {
    const ChainCouplings c = solve(generate_linear(n, 3));
    REQUIRE(c.size() == static_cast<std::size_t>(n));
    REQUIRE(c.b().size() == static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n; ++j) CHECK(c.a()[j] == c.a()[n - 1 - j]);
    for (int j = 0; j < n - 1; ++j) CHECK(c.b()[j] == c.b()[n - 2 - j]);
  }
}

TEST_CASE("large chains") {
  for (int n : {401, 1001}) {
    const Spectrum cases[] = {generate_linear(n, 1), generate_inverted_quadratic(n), generate_cosine(n)};
    for (const Spectrum& s : cases) {
      const ChainCouplings c = solve(s);
      CHECK(testing::max_rel_error(forward_eigenvalues(c).values(), s.values()) < 1e-8);
    }
  }
}

TEST_CASE("overlong linear chain raises a sizing error") {
  try {
    solve(generate_linear(2001, 1));
    FAIL("expected solver_overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::solver_overflow);
    CHECK(is_numerical(e.code()));
  }
}

TEST_CASE("forward eigenvalues") {
  const Spectrum two = forward_eigenvalues(ChainCouplings({0, 0}, {1}));
  CHECK(two[0] == doctest::Approx(-1.0));
  CHECK(two[1] == doctest::Approx(1.0));
  const Spectrum three = forward_eigenvalues(ChainCouplings({0, 0, 0}, {1, 1}));
  CHECK(three[0] == doctest::Approx(-std::sqrt(2.0)));
  CHECK(std::abs(three[1]) < 1e-15);
  CHECK(three[2] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("coupling validation") {
  CHECK_THROWS_AS(ChainCouplings({0, 0}, {0.0}), Error);
  CHECK_THROWS_AS(ChainCouplings({0, 0}, {-1.0}), Error);
  CHECK_THROWS_AS(ChainCouplings({0, 0, 0}, {1.0}), Error);
  CHECK_THROWS_AS(ChainCouplings({0, NAN}, {1.0}), Error);
  CHECK(ChainCouplings::uniform(4).is_persymmetric());
  CHECK_FALSE(ChainCouplings({0, 0, 0}, {1.0, 1.0 + 1e-15}).is_persymmetric());
}

}  // TEST_SUITE
