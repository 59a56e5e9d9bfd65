#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ebmix/errors.hpp"
#include "ebmix/simlab.hpp"
#include "test_support.hpp"

using namespace ebmix;
using namespace ebmix::sim;

namespace {

dpmm::SamplerConfig tiny_sampler() {
  dpmm::SamplerConfig c;
  c.n_iter = 200;
  c.n_burnin = 50;
  return c;
}

StudyConfig tiny_study(int example) {
  StudyConfig s;
  s.example = example;
  s.q_values = {20, 40};
  s.estimators = {"Naive", "SURE.M.XKB", "NIG-DPMM"};
  s.n_reps = 4;
  s.seed = 17;
  s.sampler = tiny_sampler();
  return s;
}

}  // namespace

TEST_CASE("example table") {
  for (int id = 1; id <= 8; ++id) {
    CHECK(example_spec(id).mode == VarianceMode::known);
    CHECK(example_spec(id).n == 1);
  }
  for (int id = 9; id <= 14; ++id) {
    CHECK(example_spec(id).mode == VarianceMode::unknown);
    CHECK(example_spec(id).n == 4);
  }
  CHECK(example_spec(6).uniform_errors);
  CHECK_THROWS_AS(example_spec(15), ParameterError);
  CHECK_THROWS_AS(example_spec(0), ParameterError);
}

TEST_CASE("variance laws have the expected means") {
  // E sigma2 per example; Ex4: E[1/chi2_10] = 1/8; Ex9: IG(5,2) -> 0.5;
  // Ex10: G(9,3) -> 3; Ex12: 4 U(0.1,1) -> 2.2; Ex5: (0.1 + 0.5)/2.
  const std::vector<std::pair<int, double>> cases{{1, 0.55}, {4, 0.125}, {5, 0.3},
                                                  {9, 0.5},  {10, 3.0},  {12, 2.2}};
  for (auto [id, expect] : cases) {
    RngStream r(id, 0);
    std::vector<double> s2;
    for (int i = 0; i < 100000; ++i) s2.push_back(draw_pair(id, r).second);
    const auto st = testing::sample_stats(s2);
    INFO("example " << id);
    CHECK(testing::within_se(st.mean, expect, st.se));
  }
}

TEST_CASE("structural relations between mu and sigma2") {
  RngStream r(2, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto [mu, s2] = draw_pair(3, r);
    CHECK(mu == s2);
    const auto [m13, v13] = draw_pair(13, r);
    CHECK(v13 >= std::max(m13 - 1.0, 0.1));
    CHECK(v13 <= std::max(m13 + 1.0, 1.0));
    CHECK(draw_pair(14, r).second >= 0.1);
  }
}

TEST_CASE("generate: shapes, modes and uniform errors") {
  RngStream r(3, 0);
  const auto g = generate(6, 200, r);
  CHECK(g.data.mode() == VarianceMode::known);
  CHECK(g.data.q() == 200);
  for (std::size_t j = 0; j < 200; ++j) {
    CHECK(g.data.known_variances()[j] == g.sigma2[j]);
    CHECK(std::abs(g.data.at(0, j) - g.mu[j]) <= std::sqrt(3.0 * g.sigma2[j]) + 1e-12);
  }
  const auto u = generate(9, 50, r);
  CHECK(u.data.mode() == VarianceMode::unknown);
  CHECK(u.data.n() == 4);
}

TEST_CASE("apply_estimator plumbing") {
  RngStream r(4, 0);
  const auto g = generate(9, 30, r);
  const auto naive = apply_estimator("Naive", g.data, g.mu, tiny_sampler());
  const auto s = summarize(g.data);
  CHECK(naive.mu_hat == s.col_means);
  CHECK(naive.sigma2_hat == *s.col_vars);
  const auto one = apply_estimator("NIG-DPMM-1", g.data, g.mu, tiny_sampler());
  CHECK(one.pi_sorted.size() == 1);
  CHECK(one.mu_hat.size() == 30);
}

TEST_CASE("estimator names are checked against the registry") {
  CHECK(is_dpmm("NIG-DPMM"));
  CHECK(is_dpmm("NIG-DPMM-1"));
  CHECK_FALSE(is_dpmm("Naive"));
  const auto all = all_estimator_names();
  CHECK(std::find(all.begin(), all.end(), "Oracle.XKB") != all.end());
  CHECK_NOTHROW(check_estimator_names({"Naive", "NIG-DPMM"}));
  try {
    check_estimator_names({"Nope"});
    FAIL("expected ParameterError");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("SURE.SM.XKB") != std::string::npos);
  }
}

TEST_CASE("study results do not depend on the thread count") {
  auto one = tiny_study(11);
  one.jobs = 1;
  auto many = tiny_study(11);
  many.jobs = 3;
  const auto a = run_study(one);
  const auto b = run_study(many);
  CHECK(report_to_json(a).dump() == report_to_json(b).dump());
}

TEST_CASE("risk rows summarize the replication records") {
  const auto rep = run_study(tiny_study(1));
  const auto row = rep.row("Naive", 20);
  std::vector<double> l;
  for (const auto& rec : rep.records[0][0]) l.push_back(rec.loss_mu);
  const auto st = testing::sample_stats(l);
  CHECK(row.n_ok == 4);
  CHECK(row.n_failed == 0);
  CHECK(row.mse_mu == doctest::Approx(st.mean));
  CHECK(row.se_mu == doctest::Approx(st.se));
  CHECK(rep.rows().size() == 6);
}

TEST_CASE("report writers") {
  const auto rep = run_study(tiny_study(9));
  std::ostringstream csv, svg;
  write_report_csv(csv, rep);
  CHECK(csv.str().rfind("example,estimator,q,n_reps,n_ok,n_failed,mse_mu,se_mu,mse_sigma2,se_sigma2\n", 0) == 0);
  write_report_svg(svg, rep, true);
  const std::string s = svg.str();
  CHECK(s.find("<svg") != std::string::npos);
  std::size_t lines = 0;
  for (auto p = s.find("<polyline"); p != std::string::npos; p = s.find("<polyline", p + 1)) ++lines;
  CHECK(lines == 3);
}

TEST_CASE("gamma sensitivity runs one DPMM report per gamma") {
  auto base = tiny_study(11);
  base.q_values = {20};
  const auto g = gamma_sensitivity(base, {0.1, 100.0});
  REQUIRE(g.reports.size() == 2);
  for (const auto& r : g.reports) CHECK(r.estimators == std::vector<std::string>{"NIG-DPMM"});
  std::ostringstream box;
  write_gamma_boxplot_csv(box, g);
  CHECK(box.str().rfind("gamma,q,rep,rank,pi\n", 0) == 0);
  CHECK(gamma_to_json(g)["gamma_sensitivity"].size() == 2);
}
