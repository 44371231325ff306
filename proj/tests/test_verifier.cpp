#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace ellord;

namespace {

const TestFunction& named(const std::vector<TestFunction>& cat, const char* name) {
  const TestFunction* f = find_test_function(cat, name);
  REQUIRE(f != nullptr);
  return *f;
}

}  // namespace

TEST_CASE("paired estimate of identical distributions is exactly zero") {
  const auto x = th::equi(2, 1.0, 0.3);
  const auto cat = test_function_catalog(2, x.mu);
  MonteCarloOptions opt;
  opt.samples = 5000;
  const MCEstimate e = estimate_diff(x, x, named(cat, "pair_product"), opt);
  CHECK(e.value == 0.0);
  CHECK(e.std_error == 0.0);
  CHECK(e.samples == 5000);
}

TEST_CASE("paired estimate recovers a known covariance change") {
  const auto x = th::equi(2, 1.0, 0.2);
  const auto y = th::equi(2, 1.0, 0.6);
  const auto cat = test_function_catalog(2, Eigen::VectorXd::Zero(2));
  MonteCarloOptions opt;
  opt.samples = 100000;
  const MCEstimate e = estimate_diff(x, y, named(cat, "pair_product"), opt);
  // E x0 x1 moves from 0.2 to 0.6 under a unit-variance normal
  CHECK(std::abs(e.value - 0.4) < 0.03);
  CHECK(e.std_error > 0.0);
  CHECK(e.std_error < 0.02);
}

TEST_CASE("the moment guard refuses integrands the radial tail cannot support") {
  const auto x = th::equi(2, 1.0, 0.0, th::tgen(5.0));
  const auto y = th::equi(2, 1.0, 0.4, th::tgen(5.0));
  const auto cat = test_function_catalog(2, Eigen::VectorXd::Zero(2));
  MonteCarloOptions opt;
  opt.samples = 1000;

  // superpolynomial growth against a polynomial tail
  CHECK_THROWS_MATCHES(estimate_diff(x, y, named(cat, "exp_sum"), opt), Error,
                       th::errc_is(Errc::MomentGuardTripped));
  // quadratic growth is fine for five degrees of freedom
  CHECK_NOTHROW(estimate_diff(x, y, named(cat, "pair_product"), opt));
  // bounded functions always pass
  CHECK_NOTHROW(estimate_diff(x, y, named(cat, "upper_orthant"), opt));
  // mixed generators are not comparable
  const auto z = th::equi(2, 1.0, 0.4);
  CHECK_THROWS_MATCHES(estimate_diff(x, z, named(cat, "pair_product"), opt), Error,
                       th::errc_is(Errc::GeneratorMismatch));
}

TEST_CASE("verification agrees with a holding supermodular verdict") {
  const auto x = th::equi(3, 1.0, 0.2);
  const auto y = th::equi(3, 1.0, 0.6);
  MonteCarloOptions opt;
  opt.samples = 20000;
  const VerificationReport rep = verify_order(Relation::Sm, x, y, opt);
  CHECK(rep.relation == Relation::Sm);
  CHECK(rep.claimed == Outcome::Holds);
  CHECK(rep.seed == opt.seed);
  CHECK(rep.samples == opt.samples);
  CHECK(!rep.estimates.empty());
  CHECK(rep.swapped.empty());
  CHECK(rep.consistent);
  for (const auto& e : rep.estimates) {
    if (e.skipped) continue;
    INFO(e.function);
    CHECK_FALSE(e.violation);
  }
}

TEST_CASE("verification exhibits a violation for a failing verdict") {
  const auto x = th::equi(3, 1.0, 0.6);
  const auto y = th::equi(3, 1.0, 0.2);  // covariance drops: sm fails
  MonteCarloOptions opt;
  opt.samples = 20000;
  const VerificationReport rep = verify_order(Relation::Sm, x, y, opt);
  CHECK(rep.claimed == Outcome::Fails);
  int violations = 0;
  for (const auto& e : rep.estimates) violations += (!e.skipped && e.violation);
  CHECK(violations > 0);
  CHECK(rep.consistent);
  // the swapped run shows the reversed direction
  CHECK(!rep.swapped.empty());
  bool swapped_positive = false;
  for (const auto& e : rep.swapped)
    if (!e.skipped && e.diff > 3.0 * e.se) swapped_positive = true;
  CHECK(swapped_positive);
}

TEST_CASE("an undetermined verdict verifies as consistent") {
  const auto x = th::equi(2, 1.0, 0.2, th::discrete());
  const auto y = th::equi(2, 1.0, 0.2, th::discrete());
  MonteCarloOptions opt;
  opt.samples = 5000;
  const VerificationReport rep = verify_order(Relation::St, x, y, opt);
  CHECK(rep.claimed == Outcome::Undetermined);
  CHECK(rep.consistent);
}

TEST_CASE("orthant probability of a centered bivariate pair matches the arcsine value") {
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 0.5, 0.5, 1.0;
  const auto d = th::dist(Eigen::VectorXd::Zero(2), s);
  MonteCarloOptions opt;
  opt.samples = 200000;
  const Eigen::VectorXd a = Eigen::VectorXd::Zero(2);
  const MCEstimate up = orthant_probability(d, a, OrthantSide::Upper, opt);
  const MCEstimate lo = orthant_probability(d, a, OrthantSide::Lower, opt);
  // 1/4 + asin(1/2)/(2 pi) = 1/3
  CHECK(std::abs(up.value - 1.0 / 3.0) < 0.005);
  CHECK(std::abs(lo.value - 1.0 / 3.0) < 0.005);
  CHECK(up.std_error > 0.0);
  CHECK(up.std_error < 0.002);

  Eigen::VectorXd bad(3);
  bad.setZero();
  CHECK_THROWS_MATCHES(orthant_probability(d, bad, OrthantSide::Upper, opt), Error,
                       th::errc_is(Errc::DimensionMismatch));
}

TEST_CASE("interpolation identity reproduces a normal covariance change") {
  Eigen::MatrixXd sy(2, 2);
  sy << 1.0, 0.3, 0.3, 1.0;
  const auto x = th::dist(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  const auto y = th::dist(Eigen::VectorXd::Zero(2), sy);
  const auto cat = test_function_catalog(2, Eigen::VectorXd::Zero(2));
  MonteCarloOptions opt;
  opt.samples = 40000;
  opt.lambda_nodes = 8;
  const IdentityReport rep = identity_check(x, y, named(cat, "pair_product"), opt);
  CHECK(rep.function == "pair_product");
  CHECK(rep.samples == opt.samples);
  CHECK(rep.lambda_nodes == 8);
  CHECK(rep.nodes.size() == 8);
  CHECK(rep.node_values.size() == 8);
  CHECK(rep.consistent);
  const double band = 3.0 * (rep.lhs_se + rep.rhs_se);
  CHECK(std::abs(rep.lhs - rep.rhs) <= band);
  // for x0*x1 both sides equal the covariance change
  CHECK(std::abs(rep.lhs - 0.3) <= 3.0 * rep.lhs_se + 1e-12);
  CHECK(std::abs(rep.rhs - 0.3) <= 3.0 * rep.rhs_se + 1e-12);
}

TEST_CASE("interpolation identity holds for a bounded-radius generator and a smooth member") {
  Eigen::MatrixXd sy(2, 2);
  sy << 1.0, 0.4, 0.4, 1.0;
  const auto x = th::dist(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), th::discrete());
  const auto y = th::dist(Eigen::VectorXd::Zero(2), sy, th::discrete());
  const auto cat = test_function_catalog(2, Eigen::VectorXd::Zero(2));
  MonteCarloOptions opt;
  opt.samples = 40000;

  const IdentityReport prod = identity_check(x, y, named(cat, "pair_product"), opt);
  CHECK(prod.consistent);
  // E x0 x1 = (E R^2 / n) sigma01 = (3.5 / 2) * 0.4
  CHECK(std::abs(prod.lhs - 0.7) <= 3.0 * prod.lhs_se + 1e-12);

  const IdentityReport soft = identity_check(x, y, named(cat, "softplus_sum"), opt);
  CHECK(soft.consistent);
  CHECK(std::abs(soft.lhs - soft.rhs) <= 3.0 * (soft.lhs_se + soft.rhs_se));

  // a function without derivatives cannot enter the identity
  CHECK_THROWS_MATCHES(identity_check(x, y, named(cat, "upper_orthant"), opt), Error,
                       th::errc_is(Errc::UnsupportedArity));
}

TEST_CASE("joint tail comparison on a bivariate pair reports exact values") {
  const auto x = th::equi(2, 1.0, 0.0);
  const auto y = th::equi(2, 1.0, 0.6);
  MonteCarloOptions opt;
  opt.samples = 100000;
  const SlepianReport rep = slepian_check(x, y, std::nullopt, opt);
  CHECK(rep.uo_decision.outcome == Outcome::Holds);
  CHECK(rep.consistent);
  REQUIRE(rep.exact_x.has_value());
  REQUIRE(rep.exact_y.has_value());
  CHECK(std::abs(*rep.exact_x - 0.25) < 1e-12);
  CHECK(std::abs(*rep.exact_y - (0.25 + std::asin(0.6) / (2.0 * EIGEN_PI))) < 1e-12);
  CHECK(std::abs(rep.p_x - *rep.exact_x) < 4.0 * rep.p_x_se + 1e-3);
  CHECK(std::abs(rep.p_y - *rep.exact_y) < 4.0 * rep.p_y_se + 1e-3);
  CHECK(rep.diff > 0.0);
  CHECK(rep.diff_se < rep.p_x_se + rep.p_y_se);  // coupling helps
}

TEST_CASE("correlation sweep is monotone for normal and heavy-tailed generators") {
  const std::vector<double> rhos{0.0, 0.3, 0.6};
  MonteCarloOptions opt;
  opt.samples = 20000;
  for (const auto& gen : {th::normal(), th::tgen(5.0)}) {
    const SlepianSuiteReport rep =
        slepian_suite(GridBuilder::Equicorrelated, gen, 3, rhos, 1.0, std::nullopt, opt);
    INFO(rep.summary);
    CHECK(rep.consistent);
    CHECK(rep.points.size() == 3);
    CHECK(rep.steps.size() == 2);
    CHECK(rep.dim == 3);
    for (const auto& p : rep.points) CHECK_FALSE(p.exact_upper.has_value());  // only n = 2
    for (const auto& s : rep.steps) {
      CHECK(s.upper_ok);
      CHECK(s.lower_ok);
    }
  }
}

TEST_CASE("correlation sweep exposes exact bivariate values and is reproducible") {
  const std::vector<double> rhos{0.0, 0.5};
  MonteCarloOptions opt;
  opt.samples = 20000;
  const SlepianSuiteReport a =
      slepian_suite(GridBuilder::Equicorrelated, th::normal(), 2, rhos, 1.0, std::nullopt, opt);
  CHECK(a.consistent);
  REQUIRE(a.points.size() == 2);
  REQUIRE(a.points[0].exact_upper.has_value());
  CHECK(std::abs(*a.points[0].exact_upper - 0.25) < 1e-12);
  REQUIRE(a.points[1].exact_upper.has_value());
  CHECK(std::abs(*a.points[1].exact_upper - (0.25 + std::asin(0.5) / (2.0 * EIGEN_PI))) < 1e-12);

  const SlepianSuiteReport b =
      slepian_suite(GridBuilder::Equicorrelated, th::normal(), 2, rhos, 1.0, std::nullopt, opt);
  REQUIRE(b.points.size() == a.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].p_upper == b.points[i].p_upper);
    CHECK(a.points[i].p_lower == b.points[i].p_lower);
  }
  REQUIRE(b.steps.size() == a.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].upper_diff == b.steps[i].upper_diff);
    CHECK(a.steps[i].lower_diff == b.steps[i].lower_diff);
  }
}

TEST_CASE("correlation sweep accepts the ar1 family and custom thresholds") {
  MonteCarloOptions opt;
  opt.samples = 10000;
  Eigen::VectorXd t(3);
  t << 0.5, 0.5, 0.5;
  const SlepianSuiteReport rep =
      slepian_suite(GridBuilder::Ar1, th::normal(), 3, {0.0, 0.4, 0.8}, 2.0, t, opt);
  CHECK(rep.builder == std::string("ar1"));
  CHECK(rep.consistent);
  CHECK(rep.variance == 2.0);
  CHECK(rep.threshold == t);
}

TEST_CASE("correlation sweep rejects bad arguments") {
  MonteCarloOptions opt;
  opt.samples = 1000;
  CHECK_THROWS_AS(slepian_suite(GridBuilder::Equicorrelated, th::normal(), 3, {}, 1.0,
                                std::nullopt, opt),
                  Error);
  CHECK_THROWS_AS(slepian_suite(GridBuilder::Equicorrelated, th::normal(), 3, {0.0}, -1.0,
                                std::nullopt, opt),
                  Error);
  Eigen::VectorXd bad(2);
  bad.setZero();
  CHECK_THROWS_MATCHES(slepian_suite(GridBuilder::Equicorrelated, th::normal(), 3, {0.0}, 1.0,
                                     bad, opt),
                       Error, th::errc_is(Errc::DimensionMismatch));
  // equicorrelation below the positive-definiteness floor for n = 3
  CHECK_THROWS_AS(slepian_suite(GridBuilder::Equicorrelated, th::normal(), 3, {-0.9}, 1.0,
                                std::nullopt, opt),
                  Error);
}

TEST_CASE("moment panel moves in the predicted directions under a supermodular increase") {
  const auto x = th::equi(3, 1.0, 0.2);
  const auto y = th::equi(3, 1.0, 0.6);
  MonteCarloOptions opt;
  opt.samples = 20000;
  const MomentSuiteReport rep = moment_suite(x, y, opt);
  CHECK(rep.sm_decision.outcome == Outcome::Holds);
  INFO(rep.summary);
  CHECK(rep.consistent);

  auto entry = [&](const std::string& name) -> const MomentEntry* {
    for (const auto& e : rep.entries)
      if (e.estimate.function == name) return &e;
    return nullptr;
  };
  const struct {
    const char* name;
    int dir;
  } expected[] = {
      {"product_moment_0_1", +1}, {"minimum", +1},           {"maximum", -1},
      {"sample_variance", -1},    {"running_max_square", +1}, {"cubic_sum_squared", +1},
  };
  for (const auto& ex : expected) {
    const MomentEntry* e = entry(ex.name);
    INFO(ex.name);
    REQUIRE(e != nullptr);
    CHECK(e->direction == ex.dir);
    CHECK_FALSE(e->estimate.skipped);
    CHECK_FALSE(e->estimate.violation);
  }
}

TEST_CASE("moment panel skips integrands the radial tail cannot support") {
  const auto x = th::equi(3, 1.0, 0.2, th::tgen(5.0));
  const auto y = th::equi(3, 1.0, 0.6, th::tgen(5.0));
  MonteCarloOptions opt;
  opt.samples = 20000;
  const MomentSuiteReport rep = moment_suite(x, y, opt);
  CHECK(rep.consistent);
  bool found_skipped = false;
  for (const auto& e : rep.entries)
    if (e.estimate.function == "cubic_sum_squared") {
      found_skipped = e.estimate.skipped;
      CHECK(!e.estimate.note.empty());
    }
  CHECK(found_skipped);
}

TEST_CASE("moment panel flags the reversed pair") {
  const auto x = th::equi(3, 1.0, 0.6);
  const auto y = th::equi(3, 1.0, 0.2);
  MonteCarloOptions opt;
  opt.samples = 20000;
  const MomentSuiteReport rep = moment_suite(x, y, opt);
  CHECK(rep.sm_decision.outcome == Outcome::Fails);
  CHECK_FALSE(rep.consistent);
  bool any_violation = false;
  for (const auto& e : rep.entries) any_violation = any_violation || e.estimate.violation;
  CHECK(any_violation);
}
