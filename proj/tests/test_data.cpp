#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ebmix/data.hpp"
#include "ebmix/errors.hpp"
#include "test_support.hpp"

using namespace ebmix;

namespace {

DataMatrix random_matrix(std::size_t n, std::size_t q, std::uint64_t seed) {
  RngStream r(seed, 0);
  std::vector<double> v(n * q);
  for (std::size_t j = 0; j < q; ++j)
    for (std::size_t i = 0; i < n; ++i) v[j * n + i] = 3.0 * j + 2.0 * r.normal() + 10.0;
  return DataMatrix(n, q, std::move(v));
}

}  // namespace

TEST_CASE("summaries of a small matrix") {
  // rows are replications
  const auto d = DataMatrix::from_rows({{1, 4}, {3, 8}});
  CHECK(d.n() == 2);
  CHECK(d.q() == 2);
  CHECK(d.at(1, 1) == 8.0);
  const auto s = summarize(d);
  CHECK(s.col_means == std::vector<double>{2, 6});
  REQUIRE(s.col_vars);
  CHECK((*s.col_vars)[0] == doctest::Approx(2.0));
  CHECK((*s.col_vars)[1] == doctest::Approx(8.0));
  CHECK(s.grand_mean == doctest::Approx(4.0));
  CHECK(s.grand_var == doctest::Approx((9 + 0 + 1 + 16) / 3.0));
  CHECK(s.between_var == doctest::Approx(8.0));
}

TEST_CASE("variance split: (nq-1) grand = (n-1) sum S2 + n (q-1) between") {
  for (auto [n, q] : {std::pair{4u, 30u}, std::pair{2u, 5u}, std::pair{7u, 3u}}) {
    const auto d = random_matrix(n, q, n * 100 + q);
    const auto s = summarize(d);
    double within = 0.0;
    for (double v : *s.col_vars) within += v;
    CHECK((n * q - 1.0) * s.grand_var ==
          doctest::Approx((n - 1.0) * within + n * (q - 1.0) * s.between_var).epsilon(1e-12));
  }
}

TEST_CASE("single observation per coordinate has no column variances") {
  const auto d = DataMatrix::with_known_variances({1, 2, 4}, {0.5, 0.5, 1});
  CHECK(d.mode() == VarianceMode::known);
  CHECK_FALSE(summarize(d).col_vars.has_value());
}

TEST_CASE("standardize gives mean 0 and variance 1, restore inverts it") {
  const auto d = random_matrix(4, 25, 9);
  const auto st = standardize(d);
  const auto s = summarize(st.data);
  CHECK(std::abs(s.grand_mean) < 1e-12);
  CHECK(s.grand_var == doctest::Approx(1.0));
  const auto back = restore(st.data, st.transform);
  for (std::size_t k = 0; k < d.values().size(); ++k)
    CHECK(back.values()[k] == doctest::Approx(d.values()[k]).epsilon(1e-12));
}

TEST_CASE("known variances are rescaled by standardize") {
  const auto d = DataMatrix::with_known_variances({1, 2, 4, 9}, {0.5, 0.5, 1, 2});
  const auto st = standardize(d);
  const double sc = st.transform.scale;
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(st.data.known_variances()[j] == doctest::Approx(d.known_variances()[j] / (sc * sc)));
}

TEST_CASE("back_transform maps estimates to the original scale") {
  const ScaleTransform t{5.0, 2.0};
  const std::vector<double> mu{0.0, 1.0}, s2{1.0, 0.25};
  const auto e = back_transform(mu, s2, t);
  CHECK(e.mu == std::vector<double>{5.0, 7.0});
  CHECK(e.sigma2 == std::vector<double>{4.0, 1.0});
}

TEST_CASE("zero grand variance is a data error") {
  const auto d = DataMatrix::from_rows({{2, 2}, {2, 2}});
  CHECK_THROWS_AS(standardize(d), DataError);
}

TEST_CASE("CSV parsing") {
  SUBCASE("matrix with header") {
    std::istringstream in("a,b,c\n1,2,3\n4,5,6\n");
    const auto d = read_matrix_csv(in);
    CHECK(d.n() == 2);
    CHECK(d.q() == 3);
    CHECK(d.at(1, 2) == 6.0);
  }
  SUBCASE("matrix without header") {
    std::istringstream in("1,2\n3,4\n5,6\n");
    const auto d = read_matrix_csv(in);
    CHECK(d.n() == 3);
    CHECK(d.q() == 2);
  }
  SUBCASE("ragged rows") {
    std::istringstream in("1,2\n3\n");
    CHECK_THROWS_AS(read_matrix_csv(in), DataError);
  }
  SUBCASE("non-numeric body") {
    std::istringstream in("1,2\n3,x\n");
    CHECK_THROWS_AS(read_matrix_csv(in), DataError);
  }
  SUBCASE("known-variance pairs") {
    std::istringstream in("value,variance\n1.5,0.2\n-2,1\n");
    const auto d = read_known_variance_csv(in);
    CHECK(d.mode() == VarianceMode::known);
    CHECK(d.q() == 2);
    CHECK(d.known_variances()[1] == 1.0);
  }
  SUBCASE("known-variance needs two columns") {
    std::istringstream in("1,2,3\n");
    CHECK_THROWS_AS(read_known_variance_csv(in), DataError);
  }
  SUBCASE("non-positive variance") {
    std::istringstream in("1,0\n2,1\n");
    CHECK_THROWS_AS(read_known_variance_csv(in), DataError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(read_matrix_csv_file("/no/such/file.csv"), DataError); }
}

TEST_CASE("field helpers") {
  CHECK(split_csv_line(" a , \"b\" ,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(parse_double("2.5e-3") == doctest::Approx(0.0025));
  CHECK_FALSE(parse_double("abc"));
  CHECK_FALSE(parse_double("nan"));
  CHECK_FALSE(parse_double("1e999"));
  CHECK_FALSE(parse_double("1.0x"));
}
