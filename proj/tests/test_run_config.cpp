#include <doctest.h>

#include "ebmix/errors.hpp"
#include "ebmix/run_config.hpp"

using namespace ebmix;

TEST_CASE("defaults round-trip") {
  const RunConfig c;
  CHECK(RunConfig::from_text(c.to_text()) == c);
}

TEST_CASE("non-default values round-trip exactly") {
  RunConfig c;
  c.command = "simulate";
  c.input = "data/x.csv";
  c.known_variance = true;
  c.estimators = {"Naive", "NIG-DPMM"};
  c.example = 11;
  c.q_values = {20, 100};
  c.seed = 18446744073709551615ULL;
  c.gamma = 0.1 + 0.2;  // not exactly representable in short decimal
  c.gammas = {1e-7, 3.141592653589793};
  c.mh_step_alpha = 1.0 / 3.0;
  c.adapt_mh = false;
  c.formats = {"json"};
  c.density = true;
  c.subset = "pitchers";
  c.permutations = 10;
  c.rows = 250;
  const RunConfig back = RunConfig::from_text(c.to_text());
  CHECK(back == c);
  CHECK(back.to_text() == c.to_text());
}

TEST_CASE("comments, blank lines and spacing are tolerated") {
  const auto c = RunConfig::from_text("# run\n\n  reps=7  \nq = 5, 9\n");
  CHECK(c.reps == 7);
  CHECK(c.q_values == std::vector<std::size_t>{5, 9});
}

TEST_CASE("bad keys and values are parameter errors") {
  CHECK_THROWS_AS(RunConfig::from_text("nonsense = 1\n"), ParameterError);
  CHECK_THROWS_AS(RunConfig::from_text("reps = many\n"), ParameterError);
  CHECK_THROWS_AS(RunConfig::from_text("gamma = 0.1x\n"), ParameterError);
  CHECK_THROWS_AS(RunConfig::from_text("density = maybe\n"), ParameterError);
  CHECK_THROWS_AS(RunConfig::from_text("just text\n"), ParameterError);
  CHECK_THROWS_AS(RunConfig::from_file("/no/such.cfg"), DataError);
}

TEST_CASE("sampler and overrides are derived from the config") {
  RunConfig c;
  c.n_iter = 300;
  c.burnin = 100;
  c.k = 4;
  c.gamma = 2.0;
  c.density = true;
  c.grid_points = 15;
  const auto s = c.sampler();
  CHECK(s.n_iter == 300);
  CHECK(s.n_burnin == 100);
  REQUIRE(s.density);
  CHECK(s.density->mu_points == 15);
  const auto o = c.overrides();
  CHECK(*o.k == 4);
  CHECK(*o.gamma == 2.0);
  CHECK(c.wants("csv"));
  CHECK_FALSE(c.wants("svg"));
}
