#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "helpers.hpp"

using namespace ellord;

namespace {

TestFunction value_only(std::string name, std::function<double(const Eigen::VectorXd&)> v,
                        std::vector<Relation> tags, int growth = 2, bool bounded = false) {
  TestFunction f;
  f.name = std::move(name);
  f.formula = "ad hoc";
  f.member_of = std::move(tags);
  f.growth_degree = growth;
  f.bounded = bounded;
  f.value = std::move(v);
  return f;
}

}  // namespace

TEST_CASE("every relation has at least five catalog members") {
  for (int n : {2, 3, 5}) {
    const Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (Relation r : all_relations()) {
      const auto members = catalog_for(r, n, c);
      INFO("relation " << relation_name(r) << " at n=" << n);
      CHECK(members.size() >= 5);
    }
  }
}

TEST_CASE("catalog lookup by name") {
  const Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
  const auto cat = test_function_catalog(3, c);
  const TestFunction* f = find_test_function(cat, "pair_product");
  REQUIRE(f != nullptr);
  CHECK(f->in(Relation::Sm));
  Eigen::VectorXd x(3);
  x << 2.0, 3.0, -1.0;
  CHECK(f->value(x) == 6.0);
  CHECK(find_test_function(cat, "no_such_function") == nullptr);
}

TEST_CASE("smooth members expose consistent gradients and hessians") {
  RandomStream rs(0xFD);
  for (int n : {2, 3}) {
    const Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (const auto& f : test_function_catalog(n, c)) {
      if (!f.smooth() || !f.gradient) continue;
      for (int rep = 0; rep < 3; ++rep) {
        const Eigen::VectorXd x = th::random_vec(n, rs, 2.0);
        const double h = 1e-5;
        const Eigen::VectorXd g = f.gradient(x);
        const Eigen::MatrixXd H = f.hessian(x);
        CHECK((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        for (int i = 0; i < n; ++i) {
          Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
          e[i] = h;
          const double fd = (f.value(x + e) - f.value(x - e)) / (2.0 * h);
          INFO(f.name << " gradient coordinate " << i);
          CHECK(std::abs(fd - g[i]) < 1e-5 * (1.0 + std::abs(g[i])));
          const Eigen::VectorXd gfd = (f.gradient(x + e) - f.gradient(x - e)) / (2.0 * h);
          CHECK((gfd - H.col(i)).cwiseAbs().maxCoeff() < 1e-5 * (1.0 + H.cwiseAbs().maxCoeff()));
        }
      }
    }
  }
}

TEST_CASE("every catalog member passes the numeric check of every class it claims") {
  for (int n : {2, 3}) {
    const Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (const auto& f : test_function_catalog(n, c)) {
      for (Relation r : f.member_of) {
        INFO(f.name << " claims " << relation_name(r) << " at n=" << n);
        const auto counter = numeric_class_check(f, r, n);
        CHECK_FALSE(counter.has_value());
      }
    }
  }
  // the dimension-five special member as well
  const Eigen::VectorXd c5 = Eigen::VectorXd::Zero(5);
  const auto cat5 = test_function_catalog(5, c5);
  const TestFunction* horn = find_test_function(cat5, "horn_quadratic");
  REQUIRE(horn != nullptr);
  CHECK_FALSE(numeric_class_check(*horn, Relation::Cop, 5).has_value());
}

TEST_CASE("the numeric check flags genuine violations") {
  // the negated product is submodular, not supermodular
  const auto negprod = value_only(
      "neg_product", [](const Eigen::VectorXd& x) { return -x[0] * x[1]; }, {Relation::Sm});
  CHECK(numeric_class_check(negprod, Relation::Sm, 2).has_value());

  // a concave function is not convex
  const auto concave = value_only(
      "neg_sqnorm", [](const Eigen::VectorXd& x) { return -x.squaredNorm(); }, {Relation::Cx});
  CHECK(numeric_class_check(concave, Relation::Cx, 2).has_value());

  // a decreasing function is not increasing
  const auto decr = value_only(
      "neg_sum", [](const Eigen::VectorXd& x) { return -x.sum(); }, {Relation::St}, 1);
  CHECK(numeric_class_check(decr, Relation::St, 3).has_value());

  // -x0*x1*x2 has a negative third mixed difference
  const auto negtriple = value_only(
      "neg_triple", [](const Eigen::VectorXd& x) { return -x[0] * x[1] * x[2]; }, {Relation::Uo},
      3);
  CHECK(numeric_class_check(negtriple, Relation::Uo, 3).has_value());

  // a non-quadratic convex function is rejected from the constant-hessian cones
  const auto quartic = value_only(
      "quartic", [](const Eigen::VectorXd& x) { return std::pow(x.sum(), 4.0); }, {Relation::Cp},
      4);
  CHECK(numeric_class_check(quartic, Relation::Cp, 2).has_value());

  // a quadratic with a negative entry in its (constant) hessian fails cp
  const auto indef = value_only(
      "offsign", [](const Eigen::VectorXd& x) { return x[0] * x[0] - x[0] * x[1] + x[1] * x[1]; },
      {Relation::Cp});
  CHECK(numeric_class_check(indef, Relation::Cp, 2).has_value());
}

TEST_CASE("class algebra: truncation and monotone composition preserve membership") {
  const Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
  const auto cat = test_function_catalog(3, c);
  const TestFunction* base = find_test_function(cat, "smooth_min");
  REQUIRE(base != nullptr);
  REQUIRE(base->in(Relation::Ism));

  // max(f, k) of an increasing supermodular function stays in the class
  const auto fv = base->value;
  const auto trunc = value_only(
      "smooth_min_floor",
      [fv](const Eigen::VectorXd& x) { return std::max(fv(x), -0.75); }, {Relation::Ism},
      base->growth_degree);
  CHECK_FALSE(numeric_class_check(trunc, Relation::Ism, 3).has_value());

  // an increasing transform keeps the increasing class
  const auto comp = value_only(
      "tanh_of_min", [fv](const Eigen::VectorXd& x) { return std::tanh(fv(x)); }, {Relation::St},
      0, true);
  CHECK_FALSE(numeric_class_check(comp, Relation::St, 3).has_value());
}

TEST_CASE("catalog members record their growth and boundedness") {
  const Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
  const auto cat = test_function_catalog(3, c);
  std::map<std::string, const TestFunction*> by_name;
  for (const auto& f : cat) by_name.emplace(f.name, &f);

  REQUIRE(by_name.count("logistic_product"));
  CHECK(by_name["logistic_product"]->bounded);
  REQUIRE(by_name.count("upper_orthant"));
  CHECK(by_name["upper_orthant"]->bounded);
  REQUIRE(by_name.count("exp_sum"));
  CHECK(by_name["exp_sum"]->growth_degree == -1);
  REQUIRE(by_name.count("pair_product"));
  CHECK(by_name["pair_product"]->growth_degree == 2);

  // membership lists never repeat a relation
  for (const auto& f : cat) {
    std::vector<Relation> seen;
    for (Relation r : f.member_of) {
      CHECK(std::find(seen.begin(), seen.end(), r) == seen.end());
      seen.push_back(r);
    }
  }
}
