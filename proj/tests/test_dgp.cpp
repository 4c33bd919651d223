#include <catch_amalgamated.hpp>

#include "msdsp/dgp.hpp"

using namespace msdsp;
using Catch::Matchers::WithinAbs;

TEST_CASE("case 1 covariate construction", "[dgp]") {
  const auto tr = gen_case1(300, 11);
  REQUIRE(tr.X.cols() == 6);
  CHECK((tr.X.col(0).array() == 1.0).all());
  for (Index i : {0, 2, 5}) CHECK((tr.s_true.col(i).array() == 0).all());
  CHECK(tr.beta_true(0, 1) == 1.0);
  CHECK(tr.beta_true(150, 1) == 2.0);
  CHECK(tr.beta_true(250, 1) == 0.5);
  CHECK(tr.beta_true(50, 3) == 1.5);
  CHECK(tr.beta_true(250, 3) == 0.0);
  CHECK(tr.beta_true(150, 4) == 0.0);
  CHECK(tr.beta_true(250, 4) == -1.0);
  CHECK(tr.beta_true(99, 1) == 1.0);
  CHECK(tr.beta_true(100, 1) == 2.0);
  const Eigen::VectorXd fit = (tr.X.array() * tr.beta_true.array()).rowwise().sum().matrix() + tr.eps;
  CHECK((fit - tr.y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("case 1 population correlation", "[dgp]") {
  const auto tr = gen_case1(100000, 3);
  const Eigen::ArrayXd x1 = tr.X.col(1).array() - tr.X.col(1).mean();
  const Eigen::ArrayXd x2 = tr.X.col(2).array() - tr.X.col(2).mean();
  const double corr = (x1 * x2).sum() / std::sqrt(x1.square().sum() * x2.square().sum());
  CHECK_THAT(corr, WithinAbs(1.0 / std::sqrt(1.0 + 1.8 * 1.8 / 1.16), 0.01));
}

TEST_CASE("case 2 regimes", "[dgp]") {
  const auto tr = gen_case2(300, 5);
  CHECK((tr.s_true.col(0).array() == 0).all());
  CHECK(tr.s_true(0, 2) == 0);
  CHECK(tr.s_true(299, 2) == 0);
  CHECK(tr.s_true(150, 2) == 1);
  CHECK((tr.s_true.col(1).array() == 1).all());
  CHECK(tr.s_true(0, 3) == 1);
  CHECK(tr.s_true(150, 3) == 0);
  CHECK(tr.s_true(299, 3) == 1);
  CHECK_FALSE(case2_gradual_rows(300).empty());
}

TEST_CASE("generators are deterministic and the noise has unit variance", "[dgp]") {
  const auto a = gen_case2(200, 9), b = gen_case2(200, 9);
  CHECK(a.y == b.y);
  CHECK(a.X == b.X);
  const auto big = gen_case1(10000, 1);
  const double m = big.eps.mean();
  CHECK_THAT((big.eps.array() - m).square().mean(), WithinAbs(1.0, 0.05));
  CHECK_THROWS_AS(gen_case1(20, 1), Error);
}

TEST_CASE("switching SV design is internally consistent", "[dgp]") {
  const auto tr = gen_switching_sv(400, 2);
  for (Index t = 0; t + 1 < 400; ++t)
    CHECK_THAT(tr.y[t + 1], WithinAbs(tr.beta_true(t, 1) * tr.X(t, 1) + tr.eps[t + 1], 1e-12));
  CHECK(tr.s_true.col(1).cast<int>().sum() > 0);
  CHECK(tr.s_true.col(1).cast<int>().sum() < 400);
}
