// Scalar and AVX2 kernels must agree; the scalar ones must agree with
// straightforward reference loops.
#include <doctest.h>

#include <cmath>

#include "ebmix/distributions.hpp"
#include "ebmix/simd/kernels.hpp"
#include "test_support.hpp"

using namespace ebmix;
using namespace ebmix::simd;

namespace {

double rel(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<const KernelTable*> tables() {
  std::vector<const KernelTable*> t{&table_for(Isa::scalar)};
  if (isa_available(Isa::avx2)) t.push_back(&table_for(Isa::avx2));
  return t;
}

}  // namespace

TEST_CASE("reductions match reference loops for every length 0..37") {
  RngStream r(1, 0);
  for (std::size_t n = 0; n < 38; ++n) {
    const auto x = testing::uniform_vector(r, n, -5, 5);
    const auto y = testing::uniform_vector(r, n, -5, 5);
    double s = 0, ssd = 0, sdf = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s += x[i];
      ssd += (x[i] - 0.3) * (x[i] - 0.3);
      sdf += (x[i] - y[i]) * (x[i] - y[i]);
    }
    for (const auto* t : tables()) {
      CHECK(rel(t->sum(x.data(), n), s) < 1e-13);
      CHECK(rel(t->sum_sq_dev(x.data(), n, 0.3), ssd) < 1e-13);
      CHECK(rel(t->sum_sq_diff(x.data(), y.data(), n), sdf) < 1e-13);
    }
  }
}

TEST_CASE("nig log weights match log_nig_pdf") {
  RngStream r(2, 0);
  const std::size_t n = 53;
  const auto mu = testing::uniform_vector(r, n, -3, 3);
  const auto s2 = testing::uniform_vector(r, n, 0.05, 4);
  std::vector<double> log_s2(n), inv_s2(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_s2[i] = std::log(s2[i]);
    inv_s2[i] = 1.0 / s2[i];
  }
  const auto terms = make_nig_terms(0.4, 2.5, 3.0, 1.7);
  for (const auto* t : tables()) {
    std::vector<double> out(n);
    t->nig_log_weights(mu.data(), log_s2.data(), inv_s2.data(), n, terms, out.data());
    for (std::size_t i = 0; i < n; ++i)
      CHECK(rel(out[i], log_nig_pdf(mu[i], s2[i], 0.4, 2.5, 3.0, 1.7)) < 1e-12);
  }
}

TEST_CASE("exp_inplace across the range, including underflow and overflow") {
  std::vector<double> x;
  for (double v = -760.0; v <= 720.0; v += 0.37) x.push_back(v);
  x.push_back(-std::numeric_limits<double>::infinity());
  x.push_back(0.0);
  for (const auto* t : tables()) {
    auto y = x;
    t->exp_inplace(y.data(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = std::exp(x[i]);
      if (e == 0.0 || std::isinf(e))
        CHECK(y[i] == e);
      else
        CHECK(std::abs(y[i] - e) / e < 4e-15);
    }
  }
}

TEST_CASE("sure_sm_sum") {
  RngStream r(3, 0);
  for (std::size_t n : {0u, 1u, 4u, 7u, 33u}) {
    const auto b = testing::uniform_vector(r, n, 0, 1);
    const auto d = testing::uniform_vector(r, n, 0, 9);
    const auto v = testing::uniform_vector(r, n, 0.1, 2);
    double ref = 0;
    for (std::size_t i = 0; i < n; ++i) ref += b[i] * b[i] * d[i] + (1 - 2 * b[i]) * v[i];
    for (const auto* t : tables()) CHECK(rel(t->sure_sm_sum(b.data(), d.data(), v.data(), n), ref) < 1e-13);
  }
}

TEST_CASE("dispatch can be pinned to each available ISA") {
  const Isa before = active_isa();
  const std::vector<double> x{1, 2, 3, 4, 5};
  set_isa(Isa::scalar);
  CHECK(active_isa() == Isa::scalar);
  CHECK(sum(x) == 15.0);
  if (isa_available(Isa::avx2)) {
    set_isa(Isa::avx2);
    CHECK(active_isa() == Isa::avx2);
    CHECK(sum(x) == 15.0);
  } else {
    CHECK_THROWS(set_isa(Isa::avx2));
  }
  set_isa(before);
  CHECK(isa_name(Isa::scalar) == "scalar");
}
