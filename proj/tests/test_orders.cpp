#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace ellord;

namespace {

EllipticalDistribution shift(const EllipticalDistribution& d, const Eigen::VectorXd& delta) {
  return {d.mu + delta, d.sigma, d.gen};
}

EllipticalDistribution bump(const EllipticalDistribution& d, const Eigen::MatrixXd& D) {
  return {d.mu, d.sigma + D, d.gen};
}

Eigen::VectorXd ones(int n, double v = 1.0) { return Eigen::VectorXd::Constant(n, v); }

}  // namespace

TEST_CASE("shifted location with matching dispersion is st-ordered") {
  const auto x = th::equi(3, 1.0, 0.3);
  CHECK(check_order(Relation::St, x, shift(x, ones(3, 0.5))).outcome == Outcome::Holds);
  CHECK(check_order(Relation::St, x, x).outcome == Outcome::Holds);
  CHECK(check_order(Relation::St, x, shift(x, -ones(3, 0.1))).outcome == Outcome::Fails);
  Eigen::VectorXd mixed(3);
  mixed << 1.0, -0.2, 0.0;
  CHECK(check_order(Relation::St, x, shift(x, mixed)).outcome == Outcome::Fails);
  // any dispersion change defeats the shifted coupling
  CHECK(check_order(Relation::St, x, bump(x, 0.2 * Eigen::MatrixXd::Identity(3, 3))).outcome ==
        Outcome::Fails);
}

TEST_CASE("bounded radial support routes st, ism, and uo to undetermined") {
  const auto x = th::equi(2, 1.0, 0.2, th::discrete());
  for (Relation r : {Relation::St, Relation::Ism, Relation::Uo}) {
    const auto d = check_order(r, x, shift(x, ones(2, 0.5)));
    CHECK(d.outcome == Outcome::Undetermined);
    CHECK(d.reason.find("support") != std::string::npos);
  }
}

TEST_CASE("convex order needs equal means and a psd dispersion gap") {
  const auto x = th::equi(3, 1.0, 0.3);
  for (Relation r : {Relation::Cx, Relation::Lcx}) {
    CHECK(check_order(r, x, bump(x, 0.2 * Eigen::MatrixXd::Identity(3, 3))).outcome ==
          Outcome::Holds);
    CHECK(check_order(r, x, x).outcome == Outcome::Holds);
    CHECK(check_order(r, x, shift(x, ones(3, 0.1))).outcome == Outcome::Fails);
    const auto d = check_order(r, x, bump(x, -0.2 * Eigen::MatrixXd::Identity(3, 3)));
    REQUIRE(d.outcome == Outcome::Fails);
    REQUIRE(d.witness_vector.has_value());
    // the witness direction certifies the gap is not psd
    const Eigen::MatrixXd D = -0.2 * Eigen::MatrixXd::Identity(3, 3);
    CHECK(d.witness_vector->dot(D * *d.witness_vector) < 0.0);
  }
}

TEST_CASE("increasing convex order trichotomy") {
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  const auto x = th::dist(Eigen::VectorXd::Zero(2), I2);

  // sufficient: nonnegative shift and psd gap
  CHECK(check_order(Relation::Icx, x, {ones(2, 0.3), I2 * 1.2, x.gen}).outcome == Outcome::Holds);
  // necessary: mean shift must be nonnegative
  CHECK(check_order(Relation::Icx, x, shift(x, -ones(2, 0.1))).outcome == Outcome::Fails);
  // not copositive: fails with a certificate
  Eigen::MatrixXd drop(2, 2);
  drop << -0.2, 0.0, 0.0, 0.3;
  const auto nd = check_order(Relation::Icx, x, bump(x, drop));
  REQUIRE(nd.outcome == Outcome::Fails);
  REQUIRE(nd.witness_vector.has_value());
  CHECK(nd.witness_vector->minCoeff() >= -1e-12);
  CHECK(nd.witness_vector->dot(drop * *nd.witness_vector) < 0.0);
  // copositive but not psd with trivial kernel: genuinely open
  Eigen::MatrixXd gap(2, 2);
  gap << 0.0, 0.5, 0.5, 0.0;
  CHECK(check_order(Relation::Icx, x, bump(x, gap)).outcome == Outcome::Undetermined);
}

TEST_CASE("supermodular order compares dependence at fixed marginals") {
  const auto x = th::equi(3, 1.0, 0.2);
  const auto y = th::equi(3, 1.0, 0.6);
  CHECK(check_order(Relation::Sm, x, y).outcome == Outcome::Holds);
  CHECK(check_order(Relation::Sm, y, x).outcome == Outcome::Fails);  // antisymmetry
  CHECK(check_order(Relation::Sm, x, x).outcome == Outcome::Holds);
  CHECK(check_order(Relation::Sm, x, shift(y, ones(3, 0.1))).outcome == Outcome::Fails);
  // touching a marginal variance breaks it
  CHECK(check_order(Relation::Sm, x, bump(y, 0.1 * Eigen::MatrixXd::Identity(3, 3))).outcome ==
        Outcome::Fails);
}

TEST_CASE("increasing supermodular order: sufficiency, necessity, and the gap") {
  const auto x = th::equi(3, 1.0, 0.2);
  const auto y = th::equi(3, 1.0, 0.6);
  for (Relation r : {Relation::Ism, Relation::Uo}) {
    // sufficiency: upward shift plus increased correlations
    CHECK(check_order(r, x, shift(y, ones(3, 0.4))).outcome == Outcome::Holds);
    CHECK(check_order(r, x, y).outcome == Outcome::Holds);
    // a shift with matching dispersion is fine even though pairwise product
    // moments can decrease (the coupling argument wins)
    const auto xneg = shift(x, ones(3, -2.0));
    CHECK(check_order(r, xneg, x).outcome == Outcome::Holds);
    // necessity: negative shift component
    CHECK(check_order(r, x, shift(y, -ones(3, 0.1))).outcome == Outcome::Fails);
    // necessity: marginal variance moved
    CHECK(check_order(r, x, bump(x, 0.1 * Eigen::MatrixXd::Identity(3, 3))).outcome ==
          Outcome::Fails);
    // equal means: covariance decrease decides
    CHECK(check_order(r, y, x).outcome == Outcome::Fails);
    // mean raised but correlation dropped, product moments still up: open
    CHECK(check_order(r, x, shift(th::equi(3, 1.0, 0.1), ones(3, 1.0))).outcome ==
          Outcome::Undetermined);
    // mean raised slightly, correlation dropped enough: product moment falls
    CHECK(check_order(r, th::equi(3, 1.0, 0.5), shift(th::equi(3, 1.0, 0.1), ones(3, 0.1)))
              .outcome == Outcome::Fails);
  }
}

TEST_CASE("directionally convex orders read the gap entrywise") {
  const auto x = th::equi(3, 1.0, 0.3);
  const Eigen::MatrixXd J = Eigen::MatrixXd::Constant(3, 3, 0.1);
  CHECK(check_order(Relation::Dcx, x, bump(x, J)).outcome == Outcome::Holds);
  CHECK(check_order(Relation::Dcx, x, shift(bump(x, J), ones(3, 0.1))).outcome == Outcome::Fails);
  CHECK(check_order(Relation::Idcx, x, shift(bump(x, J), ones(3, 0.1))).outcome ==
        Outcome::Holds);
  CHECK(check_order(Relation::Idcx, x, shift(bump(x, J), -ones(3, 0.1))).outcome ==
        Outcome::Fails);
  // equicorrelation decrease has negative offdiagonal entries
  const auto less = th::equi(3, 1.0, 0.1);
  const auto d = check_order(Relation::Dcx, x, less);
  CHECK(d.outcome == Outcome::Fails);
  CHECK(d.reason.find("covariance decreases") != std::string::npos);
}

TEST_CASE("componentwise convex orders forbid dependence changes") {
  const auto x = th::equi(3, 1.0, 0.3);
  const Eigen::MatrixXd I3 = Eigen::MatrixXd::Identity(3, 3);
  CHECK(check_order(Relation::Ccx, x, bump(x, 0.2 * I3)).outcome == Outcome::Holds);
  CHECK(check_order(Relation::Iccx, x, shift(bump(x, 0.2 * I3), ones(3, 0.1))).outcome ==
        Outcome::Holds);
  CHECK(check_order(Relation::Ccx, x, th::equi(3, 1.0, 0.5)).outcome == Outcome::Fails);
  CHECK(check_order(Relation::Ccx, x, bump(x, -0.2 * I3)).outcome == Outcome::Fails);
  CHECK(check_order(Relation::Iccx, x, shift(x, -ones(3, 0.1))).outcome == Outcome::Fails);
}

TEST_CASE("copositive and completely positive dispersion orders") {
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  const auto x = th::dist(Eigen::VectorXd::Zero(2), I2);

  Eigen::MatrixXd gap(2, 2);
  gap << 0.0, 0.5, 0.5, 0.0;
  CHECK(check_order(Relation::Cp, x, bump(x, gap)).outcome == Outcome::Holds);
  CHECK(check_order(Relation::Cp, x, x).outcome == Outcome::Holds);
  CHECK(check_order(Relation::Cp, x, shift(x, ones(2, 0.1))).outcome == Outcome::Fails);
  Eigen::MatrixXd neg = -0.1 * I2;
  CHECK(check_order(Relation::Cp, x, bump(x, neg)).outcome == Outcome::Fails);

  Eigen::MatrixXd cpgap(2, 2);
  cpgap << 0.2, 0.1, 0.1, 0.2;
  CHECK(check_order(Relation::Cop, x, bump(x, cpgap)).outcome == Outcome::Holds);
  // negative entry: certainly not completely positive
  Eigen::MatrixXd negent(2, 2);
  negent << 0.2, -0.1, -0.1, 0.2;
  CHECK(check_order(Relation::Cop, x, bump(x, negent)).outcome == Outcome::Fails);

  // the 5x5 doubly nonnegative cycle gap leaves the factorizer undecided
  const double eps = 0.1;
  Eigen::MatrixXd cyc = 2.0 * Eigen::MatrixXd::Identity(5, 5);
  for (int i = 0; i < 5; ++i) {
    cyc(i, (i + 1) % 5) = 1.0 + eps;
    cyc((i + 1) % 5, i) = 1.0 + eps;
  }
  const auto x5 = th::dist(Eigen::VectorXd::Zero(5), Eigen::MatrixXd::Identity(5, 5));
  CHECK(check_order(Relation::Cop, x5, bump(x5, cyc)).outcome == Outcome::Undetermined);

  // dimensions beyond the exact copositivity test are undecided, not an error
  const int big = 17;
  const auto xb = th::dist(Eigen::VectorXd::Zero(big), Eigen::MatrixXd::Identity(big, big));
  CHECK(check_order(Relation::Cp, xb, xb).outcome == Outcome::Undetermined);
}

TEST_CASE("reflexivity everywhere the support precondition allows") {
  RandomStream rs(3111);
  for (const auto& g : {th::normal(), th::tgen(6.0)}) {
    const auto d = th::dist(th::random_vec(3, rs), th::random_psd(3, rs), g);
    for (Relation r : all_relations()) CHECK(check_order(r, d, d).outcome == Outcome::Holds);
  }
  const auto b = th::dist(th::random_vec(3, rs), th::random_psd(3, rs), th::discrete());
  for (Relation r : all_relations()) {
    const auto out = check_order(r, b, b).outcome;
    if (r == Relation::St || r == Relation::Ism || r == Relation::Uo)
      CHECK(out == Outcome::Undetermined);
    else
      CHECK(out == Outcome::Holds);
  }
}

TEST_CASE("implication lattice on randomized pairs") {
  RandomStream rs(2717);
  int cx_holds = 0, sm_holds = 0, st_holds = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 2 + static_cast<int>(rs.uniform() * 3.0);  // 2..4
    const Eigen::MatrixXd sx = th::random_psd(n, rs);
    EllipticalDistribution x{Eigen::VectorXd::Zero(n), sx, th::normal()};
    EllipticalDistribution y = x;
    const double pick = rs.uniform();
    if (pick < 0.25) {
      // raise dependence at fixed marginals: sm should hold
      y.sigma = sx + 0.2 * (Eigen::MatrixXd::Constant(n, n, 1.0) -
                            Eigen::MatrixXd::Identity(n, n));
    } else if (pick < 0.5) {
      y.sigma += th::random_psd(n, rs) * 0.3;  // psd bump: cx should hold
    } else if (pick < 0.75) {
      y = {x.mu, sx + Eigen::MatrixXd::Constant(n, n, 0.2), x.gen};  // raise all covariances
    } else {
      y.mu = x.mu + th::random_vec(n, rs, 0.5).cwiseAbs();  // upward shift
    }
    const auto dec_cx = check_order(Relation::Cx, x, y);
    const auto dec_sm = check_order(Relation::Sm, x, y);
    const auto dec_st = check_order(Relation::St, x, y);
    if (dec_cx.outcome == Outcome::Holds) {
      ++cx_holds;
      CHECK(check_order(Relation::Icx, x, y).outcome == Outcome::Holds);
      CHECK(check_order(Relation::Lcx, x, y).outcome == Outcome::Holds);
    }
    if (dec_sm.outcome == Outcome::Holds) {
      ++sm_holds;
      CHECK(check_order(Relation::Dcx, x, y).outcome == Outcome::Holds);
      // zero means here, so the increasing variants follow as well
      CHECK(check_order(Relation::Ism, x, y).outcome == Outcome::Holds);
      CHECK(check_order(Relation::Uo, x, y).outcome == Outcome::Holds);
    }
    if (dec_st.outcome == Outcome::Holds) {
      ++st_holds;
      CHECK(check_order(Relation::Icx, x, y).outcome == Outcome::Holds);
    }
  }
  // the sampler must actually exercise each branch
  CHECK(cx_holds > 0);
  CHECK(sm_holds > 0);
  CHECK(st_holds > 0);
}

TEST_CASE("decidable rows never return undetermined") {
  RandomStream rs(515);
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 2 + static_cast<int>(rs.uniform() * 3.0);
    const auto x = th::dist(th::random_vec(n, rs), th::random_psd(n, rs));
    const auto y = th::dist(th::random_vec(n, rs), th::random_psd(n, rs));
    for (Relation r : {Relation::St, Relation::Cx, Relation::Lcx, Relation::Sm, Relation::Dcx,
                       Relation::Idcx, Relation::Ccx, Relation::Iccx, Relation::Cp}) {
      CHECK(check_order(r, x, y).outcome != Outcome::Undetermined);
    }
    // equal-mean pairs decide the increasing-supermodular rows too
    const auto y0 = th::dist(x.mu, y.sigma);
    CHECK(check_order(Relation::Ism, x, y0).outcome != Outcome::Undetermined);
    CHECK(check_order(Relation::Uo, x, y0).outcome != Outcome::Undetermined);
  }
}

TEST_CASE("comparisons refuse mismatched inputs") {
  const auto x = th::equi(2, 1.0, 0.2);
  CHECK_THROWS_AS(check_order(Relation::St, x, th::equi(3, 1.0, 0.2)), Error);
  CHECK_THROWS_AS(check_order(Relation::St, x, th::equi(2, 1.0, 0.2, th::tgen(5.0))), Error);
  CHECK_THROWS_AS(check_order(Relation::Sm, th::equi(2, 1.0, 0.2, th::tgen(5.0)),
                              th::equi(2, 1.0, 0.2, th::tgen(7.0))),
                  Error);
}

TEST_CASE("check_all_orders covers each relation exactly once") {
  const auto x = th::equi(2, 1.0, 0.2);
  const auto out = check_all_orders(x, th::equi(2, 1.0, 0.5));
  REQUIRE(out.size() == all_relations().size());
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].relation == all_relations()[i]);
}

TEST_CASE("univariate front end") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  Eigen::MatrixXd four(1, 1);
  four << 4.0;
  const auto n01 = th::dist(Eigen::VectorXd::Zero(1), one);
  const auto n11 = th::dist(ones(1, 1.0), one);
  const auto n04 = th::dist(Eigen::VectorXd::Zero(1), four);

  CHECK(check_univariate(n01, n11, Relation::St).outcome == Outcome::Holds);
  CHECK(check_univariate(n11, n01, Relation::St).outcome == Outcome::Fails);
  CHECK(check_univariate(n01, n04, Relation::Cx).outcome == Outcome::Holds);
  CHECK(check_univariate(n04, n01, Relation::Cx).outcome == Outcome::Fails);
  CHECK(check_univariate(n04, n11, Relation::Icx).outcome == Outcome::Fails);
  CHECK(check_univariate(n01, {ones(1, 0.5), four, n01.gen}, Relation::Icx).outcome ==
        Outcome::Holds);

  CHECK_THROWS_AS(check_univariate(n01, n11, Relation::Sm), Error);
  CHECK_THROWS_AS(check_univariate(th::equi(2, 1.0, 0.1), th::equi(2, 1.0, 0.2), Relation::St),
                  Error);

  // the univariate rules agree with the general engine at n = 1
  RandomStream rs(99);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::MatrixXd sa(1, 1), sb(1, 1);
    sa << 0.2 + rs.uniform();
    sb << 0.2 + rs.uniform();
    const auto a = th::dist(th::random_vec(1, rs), sa);
    const auto b = th::dist(th::random_vec(1, rs), sb);
    for (Relation r : {Relation::St, Relation::Cx, Relation::Icx})
      CHECK(check_univariate(a, b, r).outcome == check_order(r, a, b).outcome);
  }
}

TEST_CASE("explanations name the relation and the outcome") {
  const auto x = th::equi(2, 1.0, 0.2);
  const auto d = check_order(Relation::Sm, x, th::equi(2, 1.0, 0.5));
  const std::string text = explain(d);
  CHECK(text.find("sm") != std::string::npos);
  CHECK(text.find("Holds") != std::string::npos);
  const auto f = check_order(Relation::Cx, x, th::equi(2, 1.0, 0.5, th::normal()));
  CHECK(explain(f).find("Fails") != std::string::npos);
}
