#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebmix/isotonic.hpp"
#include "ebmix/optimize.hpp"
#include "test_support.hpp"

using namespace ebmix;

namespace {

double objective(std::span<const double> u, std::span<const double> w, std::span<const double> b) {
  double f = 0;
  for (std::size_t i = 0; i < b.size(); ++i) f += w[i] * b[i] * b[i] - 2 * u[i] * b[i];
  return f;
}

// Best over all consecutive-block partitions with clamped block ratios.
double brute_force(std::span<const double> u, std::span<const double> w, double lo, double hi) {
  const std::size_t q = u.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (q - 1)); ++mask) {
    std::vector<double> b(q);
    std::size_t start = 0;
    double prev = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (std::size_t i = 0; i < q && ok; ++i) {
      if (i + 1 == q || (mask >> i & 1U)) {
        double su = 0, sw = 0;
        for (std::size_t t = start; t <= i; ++t) {
          su += u[t];
          sw += w[t];
        }
        const double v = sw > 0 ? std::clamp(su / sw, lo, hi) : (su > 0 ? hi : lo);
        ok = v >= prev;
        prev = v;
        for (std::size_t t = start; t <= i; ++t) b[t] = v;
        start = i + 1;
      }
    }
    if (ok) best = std::min(best, objective(u, w, b));
  }
  return best;
}

}  // namespace

TEST_CASE("monotone input is returned as the ratios") {
  const std::vector<double> u{1, 2, 3}, w{4, 4, 4};
  const auto b = isotonic_ratio(u, w, 0, 1);
  CHECK(b[0] == doctest::Approx(0.25));
  CHECK(b[1] == doctest::Approx(0.5));
  CHECK(b[2] == doctest::Approx(0.75));
}

TEST_CASE("a violating pair is pooled") {
  const std::vector<double> u{3, 1}, w{4, 4};
  const auto b = isotonic_ratio(u, w, 0, 1);
  CHECK(b[0] == doctest::Approx(0.5));
  CHECK(b[1] == doctest::Approx(0.5));
}

TEST_CASE("bounds clamp and zero weights are handled") {
  const std::vector<double> u{1, 5, 0.5}, w{0, 1, 0};
  const auto b = isotonic_ratio(u, w, 0, 1);
  for (double x : b) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  CHECK(std::is_sorted(b.begin(), b.end()));
}

TEST_CASE("tied groups share one value") {
  const std::vector<double> u{1, 3, 1}, w{2, 4, 4};
  const std::vector<int> g{0, 1, 1};
  const auto b = isotonic_ratio(u, w, 0, 1, g);
  CHECK(b[1] == b[2]);
  CHECK(b[1] == doctest::Approx(0.5));
}

TEST_CASE("PAVA matches exhaustive search on random problems") {
  RngStream r(7, 0);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t q = 1 + r.below(9);
    const auto u = testing::uniform_vector(r, q, -1, 3);
    auto w = testing::uniform_vector(r, q, 0, 4);
    if (rep % 5 == 0) w[r.below(q)] = 0.0;
    const auto b = isotonic_ratio(u, w, 0, 1);
    REQUIRE(b.size() == q);
    CHECK(std::is_sorted(b.begin(), b.end()));
    CHECK(objective(u, w, b) <= brute_force(u, w, 0, 1) + 1e-10);
  }
}

TEST_CASE("golden section on smooth and boundary minima") {
  const auto m = golden_section([](double x) { return (x - 1.3) * (x - 1.3) + 2; }, -5, 5);
  CHECK(m.x == doctest::Approx(1.3).epsilon(1e-8));
  CHECK(m.f == doctest::Approx(2.0));
  const auto e = golden_section([](double x) { return x; }, 2, 7);
  CHECK(e.x == doctest::Approx(2.0));
}

TEST_CASE("grid then golden finds the global minimum of a multimodal function") {
  auto f = [](double x) { return std::sin(3 * x) + 0.1 * (x - 4) * (x - 4); };
  const auto m = grid_then_golden(f, -10, 10, 400);
  double best = 1e9;
  for (double x = -10; x <= 10; x += 1e-5) best = std::min(best, f(x));
  CHECK(m.f <= best + 1e-9);
}
