#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ellord/error.hpp"
#include "ellord/orders.hpp"
#include "ellord/random.hpp"

namespace ellord {

/// A scalar test function on R^n tagged with the order relations whose
/// defining class contains it. Gradient and Hessian closures are present for
/// smooth members and empty otherwise. growth_degree bounds |f(x)| by a
/// polynomial of that degree at infinity; -1 means faster than any polynomial.
struct TestFunction {
  std::string name;
  std::string formula;
  std::vector<Relation> member_of;
  int growth_degree = 0;
  bool bounded = false;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;

  bool in(Relation r) const {
    return std::find(member_of.begin(), member_of.end(), r) != member_of.end();
  }
  bool smooth() const { return static_cast<bool>(hessian); }
};

namespace detail {

inline double logistic(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double softplus(double t) {
  if (t > 35.0) return t;
  if (t < -35.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

inline Eigen::VectorXd softmin_weights(const Eigen::VectorXd& x) {
  const double m = x.minCoeff();
  Eigen::VectorXd w = (-(x.array() - m)).exp();
  return w / w.sum();
}

inline Eigen::VectorXd softmax_weights(const Eigen::VectorXd& x) {
  const double m = x.maxCoeff();
  Eigen::VectorXd w = (x.array() - m).exp();
  return w / w.sum();
}

inline TestFunction square_of_functional(const std::string& name, const Eigen::VectorXd& a,
                                         double c, std::vector<Relation> tags) {
  TestFunction f;
  f.name = name;
  f.formula = "(a'x - c)^2";
  f.member_of = std::move(tags);
  f.growth_degree = 2;
  f.value = [a, c](const Eigen::VectorXd& x) {
    const double t = a.dot(x) - c;
    return t * t;
  };
  f.gradient = [a, c](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(2.0 * (a.dot(x) - c) * a);
  };
  f.hessian = [a](const Eigen::VectorXd&) { return Eigen::MatrixXd(2.0 * a * a.transpose()); };
  return f;
}

inline TestFunction quadratic_form(const std::string& name, const Eigen::MatrixXd& A,
                                   const Eigen::VectorXd& c, std::vector<Relation> tags) {
  TestFunction f;
  f.name = name;
  f.formula = "(x - c)'A(x - c)";
  f.member_of = std::move(tags);
  f.growth_degree = 2;
  f.value = [A, c](const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = x - c;
    return d.dot(A * d);
  };
  f.gradient = [A, c](const Eigen::VectorXd& x) { return Eigen::VectorXd(2.0 * A * (x - c)); };
  f.hessian = [A](const Eigen::VectorXd&) { return Eigen::MatrixXd(2.0 * A); };
  return f;
}

inline Eigen::MatrixXd horn_matrix() {
  Eigen::MatrixXd h(5, 5);
  h << 1, -1, 1, 1, -1,
      -1, 1, -1, 1, 1,
      1, -1, 1, -1, 1,
      1, 1, -1, 1, -1,
      -1, 1, 1, -1, 1;
  return h;
}

}  // namespace detail

/// The built-in catalog for dimension n, with location-sensitive offsets taken
/// from `center` so the functions vary where the sampled mass sits.
inline std::vector<TestFunction> test_function_catalog(int n, const Eigen::VectorXd& center) {
  if (n < 1) throw Error(Errc::DimensionMismatch, "catalog needs n >= 1");
  if (center.size() != n)
    throw Error(Errc::DimensionMismatch, "center length must equal the dimension");
  using R = Relation;
  std::vector<TestFunction> cat;
  const double csum = center.sum();

  {
    TestFunction f;
    f.name = "smooth_min";
    f.formula = "-log(sum_i exp(-x_i))";
    f.member_of = {R::St, R::Sm, R::Ism, R::Uo};
    f.growth_degree = 1;
    f.value = [](const Eigen::VectorXd& x) {
      const double m = x.minCoeff();
      return m - std::log((-(x.array() - m)).exp().sum());
    };
    f.gradient = [](const Eigen::VectorXd& x) { return detail::softmin_weights(x); };
    f.hessian = [](const Eigen::VectorXd& x) {
      const Eigen::VectorXd p = detail::softmin_weights(x);
      Eigen::MatrixXd h = p * p.transpose();
      h.diagonal() -= p;
      return h;
    };
    cat.push_back(std::move(f));
  }
  {
    TestFunction f;
    f.name = "smooth_max";
    f.formula = "log(sum_i exp(x_i))";
    f.member_of = {R::St, R::Cx, R::Icx};
    f.growth_degree = 1;
    f.value = [](const Eigen::VectorXd& x) {
      const double m = x.maxCoeff();
      return m + std::log((x.array() - m).exp().sum());
    };
    f.gradient = [](const Eigen::VectorXd& x) { return detail::softmax_weights(x); };
    f.hessian = [](const Eigen::VectorXd& x) {
      const Eigen::VectorXd p = detail::softmax_weights(x);
      Eigen::MatrixXd h = -(p * p.transpose());
      h.diagonal() += p;
      return h;
    };
    cat.push_back(std::move(f));
  }
  {
    TestFunction f;
    f.name = "softplus_sum";
    f.formula = "log(1 + exp(sum_i x_i - c))";
    f.member_of = {R::St, R::Cx, R::Lcx, R::Icx, R::Sm, R::Ism,
                   R::Dcx, R::Idcx, R::Ccx, R::Iccx};
    f.growth_degree = 1;
    f.value = [csum](const Eigen::VectorXd& x) { return detail::softplus(x.sum() - csum); };
    f.gradient = [csum, n](const Eigen::VectorXd& x) {
      return Eigen::VectorXd(Eigen::VectorXd::Constant(n, detail::logistic(x.sum() - csum)));
    };
    f.hessian = [csum, n](const Eigen::VectorXd& x) {
      const double s = detail::logistic(x.sum() - csum);
      return Eigen::MatrixXd(Eigen::MatrixXd::Constant(n, n, s * (1.0 - s)));
    };
    cat.push_back(std::move(f));
  }
  {
    TestFunction f;
    f.name = "running_max_smooth";
    f.formula = "log(sum_k exp(s_k - c_k)), s_k = x_1 + ... + x_k";
    f.member_of = {R::St, R::Cx, R::Icx, R::Sm, R::Ism, R::Dcx, R::Idcx, R::Ccx, R::Iccx};
    f.growth_degree = 1;
    Eigen::VectorXd coff(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += center[i];
      coff[i] = acc;
    }
    auto weights = [coff, n](const Eigen::VectorXd& x) {
      Eigen::VectorXd s(n);
      double run = 0.0;
      for (int i = 0; i < n; ++i) {
        run += x[i];
        s[i] = run - coff[i];
      }
      return detail::softmax_weights(s);
    };
    f.value = [coff, n](const Eigen::VectorXd& x) {
      Eigen::VectorXd s(n);
      double run = 0.0;
      for (int i = 0; i < n; ++i) {
        run += x[i];
        s[i] = run - coff[i];
      }
      const double m = s.maxCoeff();
      return m + std::log((s.array() - m).exp().sum());
    };
    f.gradient = [weights, n](const Eigen::VectorXd& x) {
      const Eigen::VectorXd p = weights(x);
      Eigen::VectorXd tail(n);
      double run = 0.0;
      for (int i = n - 1; i >= 0; --i) {
        run += p[i];
        tail[i] = run;
      }
      return tail;
    };
    f.hessian = [weights, n](const Eigen::VectorXd& x) {
      const Eigen::VectorXd p = weights(x);
      Eigen::VectorXd tail(n);
      double run = 0.0;
      for (int i = n - 1; i >= 0; --i) {
        run += p[i];
        tail[i] = run;
      }
      Eigen::MatrixXd h(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h(i, j) = tail[std::max(i, j)] - tail[i] * tail[j];
      return h;
    };
    cat.push_back(std::move(f));
  }
  {
    TestFunction f;
    f.name = "logistic_product";
    f.formula = "prod_i sigma(x_i - c_i)";
    f.member_of = {R::St, R::Sm, R::Ism, R::Uo};
    f.growth_degree = 0;
    f.bounded = true;
    const Eigen::VectorXd c = center;
    f.value = [c](const Eigen::VectorXd& x) {
      double v = 1.0;
      for (int i = 0; i < x.size(); ++i) v *= detail::logistic(x[i] - c[i]);
      return v;
    };
    f.gradient = [c](const Eigen::VectorXd& x) {
      const int m = static_cast<int>(x.size());
      double v = 1.0;
      Eigen::VectorXd s(m);
      for (int i = 0; i < m; ++i) {
        s[i] = detail::logistic(x[i] - c[i]);
        v *= s[i];
      }
      Eigen::VectorXd g(m);
      for (int i = 0; i < m; ++i) g[i] = v * (1.0 - s[i]);
      return g;
    };
    f.hessian = [c](const Eigen::VectorXd& x) {
      const int m = static_cast<int>(x.size());
      double v = 1.0;
      Eigen::VectorXd s(m);
      for (int i = 0; i < m; ++i) {
        s[i] = detail::logistic(x[i] - c[i]);
        v *= s[i];
      }
      Eigen::MatrixXd h(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          h(i, j) = (i == j) ? v * (1.0 - s[i]) * (1.0 - 2.0 * s[i])
                             : v * (1.0 - s[i]) * (1.0 - s[j]);
      return h;
    };
    cat.push_back(std::move(f));
  }
  if (n >= 2) {
    TestFunction f;
    f.name = "neg_sample_variance";
    f.formula = "-(1/(n-1)) sum_i (x_i - mean(x))^2";
    f.member_of = {R::Sm};
    f.growth_degree = 2;
    f.value = [n](const Eigen::VectorXd& x) {
      const double m = x.mean();
      return -(x.array() - m).square().sum() / (n - 1);
    };
    f.gradient = [n](const Eigen::VectorXd& x) {
      const double m = x.mean();
      return Eigen::VectorXd(-(2.0 / (n - 1)) * (x.array() - m).matrix());
    };
    f.hessian = [n](const Eigen::VectorXd&) {
      Eigen::MatrixXd h = Eigen::MatrixXd::Constant(n, n, 2.0 / (static_cast<double>(n) * (n - 1)));
      h.diagonal().array() -= 2.0 / (n - 1);
      return h;
    };
    cat.push_back(std::move(f));
  }
  if (n >= 2) {
    TestFunction f;
    f.name = "pair_product";
    f.formula = "x_0 * x_1";
    f.member_of = {R::Sm, R::Dcx, R::Ccx};
    f.growth_degree = 2;
    f.value = [](const Eigen::VectorXd& x) { return x[0] * x[1]; };
    f.gradient = [n](const Eigen::VectorXd& x) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
      g[0] = x[1];
      g[1] = x[0];
      return g;
    };
    f.hessian = [n](const Eigen::VectorXd&) {
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
      h(0, 1) = h(1, 0) = 1.0;
      return h;
    };
    cat.push_back(std::move(f));

    TestFunction g = f;
    g.name = "neg_pair_product";
    g.formula = "-x_0 * x_1";
    g.member_of = {R::Ccx};
    g.value = [](const Eigen::VectorXd& x) { return -x[0] * x[1]; };
    g.gradient = [n](const Eigen::VectorXd& x) {
      Eigen::VectorXd gr = Eigen::VectorXd::Zero(n);
      gr[0] = -x[1];
      gr[1] = -x[0];
      return gr;
    };
    g.hessian = [n](const Eigen::VectorXd&) {
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
      h(0, 1) = h(1, 0) = -1.0;
      return h;
    };
    cat.push_back(std::move(g));
  }
  {
    TestFunction f;
    f.name = "coordinate";
    f.formula = "x_0";
    f.member_of = {R::St, R::Cx, R::Lcx, R::Icx, R::Sm, R::Ism,
                   R::Dcx, R::Idcx, R::Uo, R::Ccx, R::Iccx};
    f.growth_degree = 1;
    f.value = [](const Eigen::VectorXd& x) { return x[0]; };
    f.gradient = [n](const Eigen::VectorXd&) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
      g[0] = 1.0;
      return g;
    };
    f.hessian = [n](const Eigen::VectorXd&) { return Eigen::MatrixXd(Eigen::MatrixXd::Zero(n, n)); };
    cat.push_back(std::move(f));

    TestFunction g = f;
    g.name = "neg_coordinate";
    g.formula = "-x_0";
    g.member_of = {R::Cx, R::Lcx, R::Sm, R::Dcx, R::Ccx};
    g.value = [](const Eigen::VectorXd& x) { return -x[0]; };
    g.gradient = [n](const Eigen::VectorXd&) {
      Eigen::VectorXd gr = Eigen::VectorXd::Zero(n);
      gr[0] = -1.0;
      return gr;
    };
    cat.push_back(std::move(g));
  }
  {
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = (i % 2 == 0) ? 1.0 : -1.0;
    a /= std::sqrt(static_cast<double>(n));
    cat.push_back(detail::square_of_functional("square_alternating", a, a.dot(center),
                                               {Relation::Cx, Relation::Lcx, Relation::Ccx}));
  }
  if (n >= 2) {
    const double c01 = center[0] - center[1];
    TestFunction f;
    f.name = "smooth_absdiff";
    f.formula = "sqrt(1 + (x_0 - x_1 - c)^2)";
    f.member_of = {R::Cx, R::Lcx, R::Ccx};
    f.growth_degree = 1;
    f.value = [c01](const Eigen::VectorXd& x) {
      const double u = x[0] - x[1] - c01;
      return std::sqrt(1.0 + u * u);
    };
    f.gradient = [c01, n](const Eigen::VectorXd& x) {
      const double u = x[0] - x[1] - c01;
      const double d = u / std::sqrt(1.0 + u * u);
      Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
      g[0] = d;
      g[1] = -d;
      return g;
    };
    f.hessian = [c01, n](const Eigen::VectorXd& x) {
      const double u = x[0] - x[1] - c01;
      const double k = std::pow(1.0 + u * u, -1.5);
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
      h(0, 0) = h(1, 1) = k;
      h(0, 1) = h(1, 0) = -k;
      return h;
    };
    cat.push_back(f);

    TestFunction g;
    g.name = "monotone_absdiff";
    g.formula = "x_0 + x_1 + sqrt(1 + (x_0 - x_1 - c)^2)";
    g.member_of = {R::St, R::Cx, R::Icx, R::Ccx, R::Iccx};
    g.growth_degree = 1;
    g.value = [c01](const Eigen::VectorXd& x) {
      const double u = x[0] - x[1] - c01;
      return x[0] + x[1] + std::sqrt(1.0 + u * u);
    };
    g.gradient = [c01, n](const Eigen::VectorXd& x) {
      const double u = x[0] - x[1] - c01;
      const double d = u / std::sqrt(1.0 + u * u);
      Eigen::VectorXd gr = Eigen::VectorXd::Zero(n);
      gr[0] = 1.0 + d;
      gr[1] = 1.0 - d;
      return gr;
    };
    g.hessian = f.hessian;
    cat.push_back(std::move(g));
  }
  {
    TestFunction f;
    f.name = "tanh_sum_square";
    f.formula = "(sum_i tanh(x_i - c_i))^2";
    f.member_of = {R::Sm};
    f.growth_degree = 0;
    f.bounded = true;
    const Eigen::VectorXd c = center;
    f.value = [c](const Eigen::VectorXd& x) {
      const double s = (x - c).array().tanh().sum();
      return s * s;
    };
    f.gradient = [c](const Eigen::VectorXd& x) {
      const Eigen::ArrayXd t = (x - c).array().tanh();
      return Eigen::VectorXd(2.0 * t.sum() * (1.0 - t.square()));
    };
    f.hessian = [c](const Eigen::VectorXd& x) {
      const Eigen::ArrayXd t = (x - c).array().tanh();
      const Eigen::ArrayXd tp = 1.0 - t.square();
      const double s = t.sum();
      Eigen::MatrixXd h = 2.0 * (tp.matrix() * tp.matrix().transpose());
      for (int i = 0; i < x.size(); ++i) h(i, i) = 2.0 * tp[i] * tp[i] - 4.0 * s * t[i] * tp[i];
      return h;
    };
    cat.push_back(std::move(f));
  }
  {
    TestFunction f;
    f.name = "upper_orthant";
    f.formula = "prod_i 1{x_i > c_i}";
    f.member_of = {R::St, R::Sm, R::Ism, R::Uo};
    f.growth_degree = 0;
    f.bounded = true;
    const Eigen::VectorXd c = center;
    f.value = [c](const Eigen::VectorXd& x) {
      for (int i = 0; i < x.size(); ++i)
        if (!(x[i] > c[i])) return 0.0;
      return 1.0;
    };
    cat.push_back(std::move(f));
  }
  {
    TestFunction f;
    f.name = "exp_sum";
    f.formula = "exp((sum_i x_i - c) / n)";
    f.member_of = {R::St, R::Cx, R::Lcx, R::Icx, R::Sm, R::Ism,
                   R::Dcx, R::Idcx, R::Uo, R::Ccx, R::Iccx};
    f.growth_degree = -1;
    f.value = [csum, n](const Eigen::VectorXd& x) { return std::exp((x.sum() - csum) / n); };
    f.gradient = [csum, n](const Eigen::VectorXd& x) {
      const double v = std::exp((x.sum() - csum) / n);
      return Eigen::VectorXd(Eigen::VectorXd::Constant(n, v / n));
    };
    f.hessian = [csum, n](const Eigen::VectorXd& x) {
      const double v = std::exp((x.sum() - csum) / n);
      return Eigen::MatrixXd(Eigen::MatrixXd::Constant(n, n, v / (static_cast<double>(n) * n)));
    };
    cat.push_back(std::move(f));
  }
  if (n >= 2) {
    const double c0 = center[0], c1 = center[1];
    TestFunction f;
    f.name = "softplus_product";
    f.formula = "softplus(x_0 - c_0) * softplus(x_1 - c_1)";
    f.member_of = {R::St, R::Sm, R::Ism, R::Dcx, R::Idcx, R::Uo, R::Ccx, R::Iccx};
    f.growth_degree = 2;
    f.value = [c0, c1](const Eigen::VectorXd& x) {
      return detail::softplus(x[0] - c0) * detail::softplus(x[1] - c1);
    };
    f.gradient = [c0, c1, n](const Eigen::VectorXd& x) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
      g[0] = detail::logistic(x[0] - c0) * detail::softplus(x[1] - c1);
      g[1] = detail::softplus(x[0] - c0) * detail::logistic(x[1] - c1);
      return g;
    };
    f.hessian = [c0, c1, n](const Eigen::VectorXd& x) {
      const double s0 = detail::logistic(x[0] - c0), s1 = detail::logistic(x[1] - c1);
      const double p0 = detail::softplus(x[0] - c0), p1 = detail::softplus(x[1] - c1);
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
      h(0, 0) = s0 * (1.0 - s0) * p1;
      h(1, 1) = s1 * (1.0 - s1) * p0;
      h(0, 1) = h(1, 0) = s0 * s1;
      return h;
    };
    cat.push_back(std::move(f));
  }

  const std::vector<Relation> sq_tags = {Relation::Cx,  Relation::Lcx, Relation::Sm,
                                         Relation::Dcx, Relation::Ccx, Relation::Cp,
                                         Relation::Cop};
  {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    a[0] = 1.0;
    cat.push_back(detail::square_of_functional("square_first", a, a.dot(center), sq_tags));
  }
  {
    Eigen::VectorXd a = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    cat.push_back(detail::square_of_functional("square_uniform", a, a.dot(center), sq_tags));
  }
  {
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = static_cast<double>(i + 1);
    a /= a.norm();
    cat.push_back(detail::square_of_functional("square_ramp", a, a.dot(center), sq_tags));
  }
  if (n >= 2) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    a[0] = a[1] = 1.0 / std::sqrt(2.0);
    cat.push_back(detail::square_of_functional("square_pair", a, a.dot(center), sq_tags));
  }
  {
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = 0.5 + std::abs(std::sin(i + 1.0));
    a /= a.norm();
    cat.push_back(detail::square_of_functional("square_wave", a, a.dot(center), sq_tags));
  }
  cat.push_back(detail::quadratic_form("centered_sqnorm", Eigen::MatrixXd::Identity(n, n), center,
                                       {Relation::Cx, Relation::Sm, Relation::Dcx, Relation::Ccx,
                                        Relation::Cp, Relation::Cop}));
  cat.push_back(detail::quadratic_form(
      "nonneg_quadratic", Eigen::MatrixXd::Identity(n, n) + Eigen::MatrixXd::Ones(n, n), center,
      {Relation::Cx, Relation::Sm, Relation::Dcx, Relation::Cp, Relation::Cop}));
  if (n == 5)
    cat.push_back(detail::quadratic_form("horn_quadratic", detail::horn_matrix(), center,
                                         {Relation::Cop}));
  return cat;
}

inline std::vector<TestFunction> catalog_for(Relation r, int n, const Eigen::VectorXd& center) {
  std::vector<TestFunction> out;
  for (auto& f : test_function_catalog(n, center))
    if (f.in(r)) out.push_back(std::move(f));
  return out;
}

inline const TestFunction* find_test_function(const std::vector<TestFunction>& cat,
                                              const std::string& name) {
  for (const auto& f : cat)
    if (f.name == name) return &f;
  return nullptr;
}

namespace detail {

// acceptance bar for a divided difference of order k: the requested tolerance
// plus the round-off floor of the stencil, both scaled by local magnitude
inline double fd_bar(double tol, double h, int k, double mag) {
  const double eps = std::numeric_limits<double>::epsilon();
  return (tol + std::ldexp(eps, k + 2) / std::pow(h, k)) * (1.0 + mag);
}

inline Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& x, double h, double& mag) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd hess(n, n);
  const double f0 = f(x);
  mag = std::abs(f0);
  auto at = [&](const Eigen::VectorXd& p) {
    const double v = f(p);
    mag = std::max(mag, std::abs(v));
    return v;
  };
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd up = x, dn = x;
    up[i] += h;
    dn[i] -= h;
    hess(i, i) = (at(up) - 2.0 * f0 + at(dn)) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp[i] += h; pp[j] += h;
      pm[i] += h; pm[j] -= h;
      mp[i] -= h; mp[j] += h;
      mm[i] -= h; mm[j] -= h;
      hess(i, j) = hess(j, i) = (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h * h);
    }
  }
  return hess;
}

inline bool fd_increasing(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x, double h, double tol) {
  const double f0 = f(x);
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd up = x;
    up[i] += h;
    const double fi = f(up);
    const double mag = std::max(std::abs(f0), std::abs(fi));
    if ((fi - f0) / h < -fd_bar(tol, h, 1, mag)) return false;
  }
  return true;
}

inline bool fd_convex(const std::function<double(const Eigen::VectorXd&)>& f,
                      const Eigen::VectorXd& x, double h, double tol) {
  double mag = 0.0;
  Eigen::MatrixXd hess = fd_hessian(f, x, h, mag);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -fd_bar(tol, h, 2, mag);
}

inline bool fd_supermodular(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h, double tol) {
  double mag = 0.0;
  Eigen::MatrixXd hess = fd_hessian(f, x, h, mag);
  const double bar = fd_bar(tol, h, 2, mag);
  for (int i = 0; i < hess.rows(); ++i)
    for (int j = i + 1; j < hess.cols(); ++j)
      if (hess(i, j) < -bar) return false;
  return true;
}

inline bool fd_cw_convex(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x, double h, double tol) {
  const double f0 = f(x);
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd up = x, dn = x;
    up[i] += h;
    dn[i] -= h;
    const double a = f(up), b = f(dn);
    const double mag = std::max({std::abs(f0), std::abs(a), std::abs(b)});
    if ((a - 2.0 * f0 + b) / (h * h) < -fd_bar(tol, h, 2, mag)) return false;
  }
  return true;
}

// mixed forward difference over a set of distinct coordinates, divided by h^k
inline bool fd_delta_monotone(const std::function<double(const Eigen::VectorXd&)>& f,
                              const Eigen::VectorXd& x, double h, double tol) {
  const int n = static_cast<int>(x.size());
  std::vector<int> idx;
  std::function<bool(int, int)> scan = [&](int start, int left) -> bool {
    if (left == 0) {
      const int k = static_cast<int>(idx.size());
      double acc = 0.0, mag = 0.0;
      for (unsigned mask = 0; mask < (1u << k); ++mask) {
        Eigen::VectorXd p = x;
        int bits = 0;
        for (int b = 0; b < k; ++b)
          if (mask & (1u << b)) {
            p[idx[b]] += h;
            ++bits;
          }
        const double v = f(p);
        mag = std::max(mag, std::abs(v));
        acc += ((k - bits) % 2 == 0 ? 1.0 : -1.0) * v;
      }
      return acc / std::pow(h, k) >= -fd_bar(tol, h, k, mag);
    }
    for (int i = start; i <= n - left; ++i) {
      idx.push_back(i);
      const bool ok = scan(i + 1, left - 1);
      idx.pop_back();
      if (!ok) return false;
    }
    return true;
  };
  for (int k = 1; k <= std::min(n, 3); ++k)
    if (!scan(0, k)) return false;
  return true;
}

}  // namespace detail

/// Screens one class-membership tag of f by finite differences at `points`
/// draws from the box [-3, 3]^n. Returns the first counterexample point, or
/// nothing when every probe passes. Differences of order k accept a slack of
/// (tol + round-off floor of the stencil) scaled by the local magnitude of f.
/// The two cone-tied tags are screened through their defining quadratic shape
/// instead: a constant Hessian lying in (for cp) the nonnegative-entry PSD
/// cone or (for cop) the copositive cone.
inline std::optional<Eigen::VectorXd> numeric_class_check(const TestFunction& f, Relation tag,
                                                          int n, int points = 200, double h = 1e-4,
                                                          double tol = 1e-6) {
  if (n < 1) throw Error(Errc::DimensionMismatch, "class check needs n >= 1");
  RandomStream rs(0xC1A55u);
  auto draw = [&rs, n]() {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = -3.0 + 6.0 * rs.uniform();
    return x;
  };

  if (tag == Relation::Cp || tag == Relation::Cop) {
    // quadratic shape: Hessian must not move between probe points
    Eigen::VectorXd x0 = draw();
    double mag = 0.0;
    Eigen::MatrixXd h0 = f.smooth() ? f.hessian(x0) : detail::fd_hessian(f.value, x0, h, mag);
    const double hmag = 1.0 + h0.cwiseAbs().maxCoeff();
    for (int p = 0; p < std::min(points, 8); ++p) {
      Eigen::VectorXd x = draw();
      Eigen::MatrixXd hp = f.smooth() ? f.hessian(x) : detail::fd_hessian(f.value, x, h, mag);
      if (((hp - h0).cwiseAbs().maxCoeff()) > 1e-5 * hmag) return x;
    }
    Eigen::MatrixXd sym = 0.5 * (h0 + h0.transpose());
    if (tag == Relation::Cop)
      return is_copositive(sym).verdict == Verdict::Yes ? std::nullopt
                                                        : std::make_optional(x0);
    const bool nonneg = sym.minCoeff() >= -tol * hmag;
    const bool psd = is_psd(sym, tol).verdict == Verdict::Yes;
    return (nonneg && psd) ? std::nullopt : std::make_optional(x0);
  }

  bool need_incr = false, need_cx = false, need_sm = false, need_cw = false, need_dm = false;
  switch (tag) {
    case Relation::St: need_incr = true; break;
    case Relation::Cx:
    case Relation::Lcx: need_cx = true; break;
    case Relation::Icx: need_incr = need_cx = true; break;
    case Relation::Sm: need_sm = true; break;
    case Relation::Ism: need_incr = need_sm = true; break;
    case Relation::Dcx: need_sm = need_cw = true; break;
    case Relation::Idcx: need_incr = need_sm = need_cw = true; break;
    case Relation::Uo: need_dm = true; break;
    case Relation::Ccx: need_cw = true; break;
    case Relation::Iccx: need_incr = need_cw = true; break;
    default: break;
  }
  for (int p = 0; p < points; ++p) {
    Eigen::VectorXd x = draw();
    if (need_incr && !detail::fd_increasing(f.value, x, h, tol)) return x;
    if (need_cx && !detail::fd_convex(f.value, x, h, tol)) return x;
    if (need_sm && !detail::fd_supermodular(f.value, x, h, tol)) return x;
    if (need_cw && !detail::fd_cw_convex(f.value, x, h, tol)) return x;
    if (need_dm && !detail::fd_delta_monotone(f.value, x, h, tol)) return x;
  }
  return std::nullopt;
}

}  // namespace ellord
