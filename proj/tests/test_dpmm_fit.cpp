#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ebmix/dpmm.hpp"
#include "ebmix/dpmm_io.hpp"
#include "ebmix/errors.hpp"

using namespace ebmix;
using namespace ebmix::dpmm;

namespace {

// Two well-separated groups of means, n replications each.
DataMatrix two_groups(std::size_t q, std::size_t n, std::uint64_t seed) {
  RngStream r(seed, 0);
  std::vector<double> v;
  for (std::size_t j = 0; j < q; ++j) {
    const double mu = j % 2 ? 8.0 : -2.0;
    for (std::size_t i = 0; i < n; ++i) v.push_back(mu + 0.5 * r.normal());
  }
  return DataMatrix(n, q, std::move(v));
}

SamplerConfig quick(std::uint64_t seed = 3) {
  SamplerConfig c;
  c.n_iter = 600;
  c.n_burnin = 200;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("elicitation on standardized data") {
  Summaries s;
  s.grand_mean = 3e-17;
  s.grand_var = 1.0;
  s.between_var = 0.8;
  const auto h = elicit_hyperparams(s, VarianceMode::unknown);
  CHECK(h.m0 == 0.0);
  CHECK(h.zeta2 == doctest::Approx(0.8));
  CHECK(h.a_lambda == 1.0);
  CHECK(h.b_lambda == 2.0);
  CHECK(h.a_alpha == 1.0);
  CHECK(h.b_alpha == 1.0);
  CHECK(h.gamma == doctest::Approx(0.1));
  CHECK(h.k == 10);

  HyperOverrides o;
  o.gamma = 5.0;
  o.k = 4;
  const auto g = elicit_hyperparams(s, VarianceMode::unknown, o);
  CHECK(g.gamma == 5.0);
  CHECK(g.k == 4);
}

TEST_CASE("known-variance elicitation matches precision moments") {
  const std::vector<double> var{0.5, 1.0, 2.0, 4.0};
  const auto pm = precision_moments(var);
  const double mean = (2 + 1 + 0.5 + 0.25) / 4;
  double ss = 0;
  for (double p : {2.0, 1.0, 0.5, 0.25}) ss += (p - mean) * (p - mean);
  CHECK(pm.mean == doctest::Approx(mean));
  CHECK(pm.variance == doctest::Approx(ss / 3));
  Summaries s;
  s.grand_var = 1;
  s.between_var = 1;
  const auto h = elicit_hyperparams(s, VarianceMode::known, {}, pm);
  CHECK(h.b_alpha == doctest::Approx(pm.variance / (mean * mean)));
  CHECK(h.b_beta == doctest::Approx(pm.variance / mean));
  // equal variances: unit rates
  const auto flat = elicit_hyperparams(s, VarianceMode::known, {}, precision_moments(std::vector<double>(4, 2.0)));
  CHECK(flat.b_alpha == 1.0);
  CHECK(flat.b_beta == 1.0);
}

TEST_CASE("degenerate inputs are rejected") {
  Summaries s;
  s.grand_var = 1;
  s.between_var = 0;
  CHECK_THROWS_AS(elicit_hyperparams(s, VarianceMode::unknown), ElicitationError);
  Hyperparams h;
  h.k = 0;
  CHECK_THROWS_AS(h.validate(), ParameterError);
  SamplerConfig c;
  c.n_burnin = c.n_iter;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("init clamps k to q with a warning") {
  const auto d = two_groups(4, 3, 1);
  auto h = elicit_for(d);
  RngStream r(1, 0);
  std::vector<std::string> warn;
  const auto s = init_state(ChainData::from(d), h, r, &warn);
  CHECK(s.k() == 4);
  CHECK_FALSE(warn.empty());
  for (double v : s.sigma2) CHECK(v > 0.0);
}

TEST_CASE("fit is deterministic per seed and stream") {
  const auto d = two_groups(40, 4, 2);
  const auto a = fit_default(d, quick());
  const auto b = fit_default(d, quick());
  CHECK(a.mu_hat == b.mu_hat);
  CHECK(a.sigma2_hat == b.sigma2_hat);
  auto other = quick();
  other.stream = 9;
  CHECK(fit_default(d, other).mu_hat != a.mu_hat);
  CHECK(a.n_kept == 400);
}

TEST_CASE("two separated groups: estimates land near their group means") {
  const auto d = two_groups(60, 4, 3);
  const auto s = fit_default(d, quick());
  for (std::size_t j = 0; j < 60; ++j) CHECK(std::abs(s.mu_hat[j] - (j % 2 ? 8.0 : -2.0)) < 0.6);
  REQUIRE(s.pi_sorted_mean.size() == 10);
  CHECK(std::is_sorted(s.pi_sorted_mean.rbegin(), s.pi_sorted_mean.rend()));
  CHECK(s.pi_sorted_mean[0] + s.pi_sorted_mean[1] > 0.9);
  for (double a : s.acceptance_alpha) CHECK(a >= 0.0);
}

TEST_CASE("known variances pass through verbatim") {
  RngStream r(4, 0);
  std::vector<double> x, v;
  for (int j = 0; j < 50; ++j) {
    v.push_back(0.1 + 0.02 * j);
    x.push_back((j % 3) * 2.0 + std::sqrt(v.back()) * r.normal());
  }
  const auto d = DataMatrix::with_known_variances(x, v);
  const auto s = fit_default(d, quick());
  CHECK(s.sigma2_hat == v);
  CHECK(s.mu_hat.size() == 50);
}

TEST_CASE("density grid on the original scale") {
  const auto d = two_groups(40, 4, 5);
  auto c = quick();
  DensityGridSpec g;
  g.mu_points = 30;
  g.sigma2_points = 20;
  c.density = g;
  const auto s = fit_default(d, c);
  REQUIRE(s.density);
  CHECK(s.density->mu.size() == 30);
  CHECK(s.density->sigma2.size() == 20);
  CHECK(s.density->values.size() == 600);
  for (double v : s.density->values) CHECK(v >= 0.0);
  std::ostringstream os;
  write_density_csv(os, *s.density);
  const std::string out = os.str();
  CHECK(out.rfind("mu,sigma2,density\n", 0) == 0);
  CHECK(std::count(out.begin(), out.end(), '\n') == 601);
}

TEST_CASE("mixture density integrates to about one") {
  const std::vector<ComponentParams> comps{{0.0, 1.0, 3.0, 2.0}, {2.0, 4.0, 5.0, 1.0}};
  const std::vector<double> pi{0.3, 0.7};
  double total = 0;
  const double dm = 0.02, ds = 0.005;
  for (double mu = -8; mu < 8; mu += dm)
    for (double s2 = ds / 2; s2 < 15; s2 += ds) total += mixture_density(comps, pi, mu, s2) * dm * ds;
  CHECK(total == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("merge weights chains by kept draws") {
  PosteriorSummary a, b;
  a.mu_hat = {1.0};
  a.sigma2_hat = {2.0};
  a.pi_sorted_mean = {1.0};
  a.n_kept = 100;
  b.mu_hat = {4.0};
  b.sigma2_hat = {5.0};
  b.pi_sorted_mean = {0.0};
  b.n_kept = 200;
  const std::vector<PosteriorSummary> v{a, b};
  const auto m = merge(v);
  CHECK(m.mu_hat[0] == doctest::Approx(3.0));
  CHECK(m.sigma2_hat[0] == doctest::Approx(4.0));
  CHECK(m.n_kept == 300);
}

TEST_CASE("summary JSON layout") {
  const auto d = two_groups(20, 4, 6);
  const auto c = quick();
  const auto s = fit_default(d, c);
  const auto j = summary_to_json(s, c, {{"command", "fit"}});
  for (const char* key : {"mu_hat", "sigma2_hat", "pi_sorted", "acceptance", "n_kept",
                          "hyperparameters", "warnings", "config", "seed"})
    CHECK(j.contains(key));
  CHECK(j["mu_hat"].size() == 20);
  CHECK(j.dump() == summary_to_json(s, c, {{"command", "fit"}}).dump());
}
