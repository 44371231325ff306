#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ellord/cones.hpp"
#include "ellord/distribution.hpp"
#include "ellord/error.hpp"

namespace ellord {

/// Integral stochastic orders decided by this library. Each one compares
/// E f(X) <= E f(Y) over a class of test functions f.
enum class Relation {
  St,    // increasing
  Cx,    // convex
  Lcx,   // linear convex: convex functions of linear functionals
  Icx,   // increasing convex
  Sm,    // supermodular
  Ism,   // increasing supermodular
  Dcx,   // directionally convex
  Idcx,  // increasing directionally convex
  Uo,    // upper orthant: indicators of upper orthants
  Ccx,   // componentwise convex
  Iccx,  // increasing componentwise convex
  Cp,    // quadratic-generated class tied to the copositive cone
  Cop,   // quadratic-generated class tied to the completely positive cone
};

inline constexpr std::array<Relation, 13> all_relations() {
  return {Relation::St,  Relation::Cx,  Relation::Lcx, Relation::Icx, Relation::Sm,
          Relation::Ism, Relation::Dcx, Relation::Idcx, Relation::Uo, Relation::Ccx,
          Relation::Iccx, Relation::Cp, Relation::Cop};
}

inline const char* relation_name(Relation r) {
  switch (r) {
    case Relation::St: return "st";
    case Relation::Cx: return "cx";
    case Relation::Lcx: return "lcx";
    case Relation::Icx: return "icx";
    case Relation::Sm: return "sm";
    case Relation::Ism: return "ism";
    case Relation::Dcx: return "dcx";
    case Relation::Idcx: return "idcx";
    case Relation::Uo: return "uo";
    case Relation::Ccx: return "ccx";
    case Relation::Iccx: return "iccx";
    case Relation::Cp: return "cp";
    case Relation::Cop: return "cop";
  }
  return "?";
}

inline const char* relation_description(Relation r) {
  switch (r) {
    case Relation::St: return "increasing functions";
    case Relation::Cx: return "convex functions";
    case Relation::Lcx: return "convex functions of linear functionals";
    case Relation::Icx: return "increasing convex functions";
    case Relation::Sm: return "supermodular functions";
    case Relation::Ism: return "increasing supermodular functions";
    case Relation::Dcx: return "directionally convex functions";
    case Relation::Idcx: return "increasing directionally convex functions";
    case Relation::Uo: return "upper orthant indicators";
    case Relation::Ccx: return "componentwise convex functions";
    case Relation::Iccx: return "increasing componentwise convex functions";
    case Relation::Cp: return "sums of squares of nonnegative linear functionals";
    case Relation::Cop: return "quadratics nonnegative on the orthant, centered";
  }
  return "?";
}

inline Relation relation_from_name(const std::string& s) {
  for (Relation r : all_relations())
    if (s == relation_name(r)) return r;
  throw Error(Errc::ParseError, "unknown relation '" + s + "'");
}

enum class Outcome { Holds, Fails, Undetermined };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Holds: return "Holds";
    case Outcome::Fails: return "Fails";
    case Outcome::Undetermined: return "Undetermined";
  }
  return "?";
}

/// Decision for one relation between a fixed pair, with a reason and, when a
/// cone argument produced one, a certifying vector or factor.
struct OrderDecision {
  Relation relation;
  Outcome outcome;
  std::string reason;
  std::optional<Eigen::VectorXd> witness_vector;
  std::optional<Eigen::MatrixXd> witness_factor;
};

namespace detail {

struct PairGap {
  Eigen::VectorXd delta;         // mean shift
  Eigen::MatrixXd D;             // dispersion gap, symmetrized
  Eigen::MatrixXd second_gap;    // gap of product moments E(Y_i Y_j) - E(X_i X_j)
  Eigen::MatrixXd second_scale;  // magnitude scale for comparing product moments
  double tol;                    // absolute comparison tolerance
  bool unbounded;                // radial support is unbounded
};

inline PairGap pair_gap(const EllipticalDistribution& x, const EllipticalDistribution& y) {
  validate(x);
  validate(y);
  require_comparable(x, y);
  PairGap g;
  g.delta = y.mu - x.mu;
  Eigen::MatrixXd raw = y.sigma - x.sigma;
  g.D = 0.5 * (raw + raw.transpose());
  const double scale = std::max(std::max(max_abs(x.mu), max_abs(y.mu)),
                                std::max(max_abs(x.sigma), max_abs(y.sigma)));
  g.tol = 1e-9 * (1.0 + scale);
  g.unbounded = x.gen.unbounded_support();
  const int n = static_cast<int>(x.dim());
  const double c = x.gen.second_moment(n) / static_cast<double>(n);
  const Eigen::MatrixXd mx = x.mu * x.mu.transpose() + c * x.sigma;
  const Eigen::MatrixXd my = y.mu * y.mu.transpose() + c * y.sigma;
  g.second_gap = my - mx;
  g.second_scale = mx.cwiseAbs() + my.cwiseAbs();
  return g;
}

inline bool vec_nonneg(const Eigen::VectorXd& v, double tol) { return v.minCoeff() >= -tol; }
inline bool vec_zero(const Eigen::VectorXd& v, double tol) {
  return v.cwiseAbs().maxCoeff() <= tol;
}
inline bool mat_zero(const Eigen::MatrixXd& a, double tol) {
  return a.cwiseAbs().maxCoeff() <= tol;
}

inline int first_negative(const Eigen::VectorXd& v, double tol) {
  for (int i = 0; i < v.size(); ++i)
    if (v[i] < -tol) return i;
  return -1;
}

inline bool offdiag_nonneg(const Eigen::MatrixXd& a, double tol, int& bi, int& bj) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j && a(i, j) < -tol) {
        bi = i;
        bj = j;
        return false;
      }
  return true;
}

inline bool offdiag_zero(const Eigen::MatrixXd& a, double tol, int& bi, int& bj) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j && std::abs(a(i, j)) > tol) {
        bi = i;
        bj = j;
        return false;
      }
  return true;
}

inline std::string coord_msg(const char* what, int i, double v) {
  std::ostringstream os;
  os << what << " at coordinate " << i << " (" << v << ")";
  return os.str();
}

inline std::string entry_msg(const char* what, int i, int j, double v) {
  std::ostringstream os;
  os << what << " at entry (" << i << ", " << j << ") (" << v << ")";
  return os.str();
}

inline OrderDecision support_unmet(Relation rel) {
  return {rel, Outcome::Undetermined,
          "support assumption unmet: this criterion needs unbounded radial support, but the "
          "generator's radial law is bounded",
          std::nullopt, std::nullopt};
}

inline OrderDecision decide_st(const PairGap& g) {
  if (!g.unbounded) return support_unmet(Relation::St);
  const int neg = first_negative(g.delta, g.tol);
  if (neg >= 0)
    return {Relation::St, Outcome::Fails,
            coord_msg("mean shift is negative", neg, g.delta[neg]), std::nullopt, std::nullopt};
  if (mat_zero(g.D, g.tol))
    return {Relation::St, Outcome::Holds,
            "nonnegative mean shift with matching dispersion matrices; the shifted coupling is "
            "monotone",
            std::nullopt, std::nullopt};
  int bi = 0, bj = 0;
  g.D.cwiseAbs().maxCoeff(&bi, &bj);
  return {Relation::St, Outcome::Fails,
          entry_msg("dispersion matrices must match but differ", bi, bj, g.D(bi, bj)),
          std::nullopt, std::nullopt};
}

inline OrderDecision decide_cx_like(Relation rel, const PairGap& g) {
  if (!vec_zero(g.delta, g.tol)) {
    int i = 0;
    g.delta.cwiseAbs().maxCoeff(&i);
    return {rel, Outcome::Fails, coord_msg("means must match but differ", i, g.delta[i]),
            std::nullopt, std::nullopt};
  }
  ConeVerdict psd = is_psd(g.D);
  if (psd.verdict == Verdict::Yes)
    return {rel, Outcome::Holds, "equal means and positive semidefinite dispersion gap",
            std::nullopt, std::nullopt};
  return {rel, Outcome::Fails,
          "dispersion gap is not positive semidefinite; the witness direction has decreasing "
          "variance",
          psd.witness_vector, std::nullopt};
}

inline OrderDecision decide_icx(const PairGap& g) {
  const int neg = first_negative(g.delta, g.tol);
  if (neg >= 0)
    return {Relation::Icx, Outcome::Fails,
            coord_msg("mean shift is negative", neg, g.delta[neg]), std::nullopt, std::nullopt};
  ConeVerdict psd = is_psd(g.D);
  if (psd.verdict == Verdict::Yes)
    return {Relation::Icx, Outcome::Holds,
            "nonnegative mean shift and positive semidefinite dispersion gap", std::nullopt,
            std::nullopt};
  if (g.D.rows() <= 16) {
    ConeVerdict cop = is_copositive(g.D);
    if (cop.verdict == Verdict::No)
      return {Relation::Icx, Outcome::Fails,
              "dispersion gap is not copositive; variance of a nonnegative linear functional "
              "decreases",
              cop.witness_vector, std::nullopt};
    auto kernel = find_positive_kernel(g.D);
    if (kernel)
      return {Relation::Icx, Outcome::Fails,
              "dispersion gap is copositive with a strictly positive kernel vector, which forces "
              "positive semidefiniteness, yet the gap is not positive semidefinite",
              kernel, std::nullopt};
    return {Relation::Icx, Outcome::Undetermined,
            "dispersion gap is copositive but not positive semidefinite and its kernel contains "
            "no strictly positive vector",
            std::nullopt, std::nullopt};
  }
  return {Relation::Icx, Outcome::Undetermined,
          "dispersion gap is not positive semidefinite and the dimension exceeds the exact "
          "copositivity test",
          psd.witness_vector, std::nullopt};
}

inline OrderDecision decide_sm(const PairGap& g) {
  if (!vec_zero(g.delta, g.tol)) {
    int i = 0;
    g.delta.cwiseAbs().maxCoeff(&i);
    return {Relation::Sm, Outcome::Fails, coord_msg("means must match but differ", i, g.delta[i]),
            std::nullopt, std::nullopt};
  }
  for (int i = 0; i < g.D.rows(); ++i)
    if (std::abs(g.D(i, i)) > g.tol)
      return {Relation::Sm, Outcome::Fails,
              coord_msg("variances must match but differ", i, g.D(i, i)), std::nullopt,
              std::nullopt};
  int bi = 0, bj = 0;
  if (!offdiag_nonneg(g.D, g.tol, bi, bj))
    return {Relation::Sm, Outcome::Fails,
            entry_msg("covariance decreases", bi, bj, g.D(bi, bj)), std::nullopt, std::nullopt};
  return {Relation::Sm, Outcome::Holds,
          "equal means, equal variances, and entrywise nondecreasing covariances", std::nullopt,
          std::nullopt};
}

inline OrderDecision decide_ism_uo(Relation rel, const PairGap& g) {
  if (!g.unbounded) return support_unmet(rel);
  int bad_diag = -1;
  for (int i = 0; i < g.D.rows(); ++i)
    if (std::abs(g.D(i, i)) > g.tol) {
      bad_diag = i;
      break;
    }
  int bi = 0, bj = 0;
  if (vec_nonneg(g.delta, g.tol) && bad_diag < 0 && offdiag_nonneg(g.D, g.tol, bi, bj))
    return {rel, Outcome::Holds,
            "nonnegative mean shift, unchanged variances, and entrywise nondecreasing "
            "covariances",
            std::nullopt, std::nullopt};
  const int neg = first_negative(g.delta, g.tol);
  if (neg >= 0)
    return {rel, Outcome::Fails, coord_msg("mean shift is negative", neg, g.delta[neg]),
            std::nullopt, std::nullopt};
  if (bad_diag >= 0)
    return {rel, Outcome::Fails,
            coord_msg("marginal variance changes", bad_diag, g.D(bad_diag, bad_diag)),
            std::nullopt, std::nullopt};
  if (vec_zero(g.delta, g.tol)) {
    // equal means with unchanged variances: the criterion closes to covariance
    // ordering, so a decreasing off-diagonal entry settles the verdict
    offdiag_nonneg(g.D, g.tol, bi, bj);
    return {rel, Outcome::Fails, entry_msg("covariance decreases", bi, bj, g.D(bi, bj)),
            std::nullopt, std::nullopt};
  }
  for (int i = 0; i < g.D.rows(); ++i)
    for (int j = i + 1; j < g.D.cols(); ++j) {
      const double mtol = 1e-9 * (1.0 + g.second_scale(i, j));
      if (g.second_gap(i, j) < -mtol)
        return {rel, Outcome::Fails,
                entry_msg("pairwise product moment decreases", i, j, g.second_gap(i, j)),
                std::nullopt, std::nullopt};
    }
  return {rel, Outcome::Undetermined,
          "sufficient conditions fail but no necessary condition is violated", std::nullopt,
          std::nullopt};
}

inline OrderDecision decide_dcx_like(Relation rel, const PairGap& g) {
  const bool increasing = (rel == Relation::Idcx);
  if (increasing) {
    const int neg = first_negative(g.delta, g.tol);
    if (neg >= 0)
      return {rel, Outcome::Fails, coord_msg("mean shift is negative", neg, g.delta[neg]),
              std::nullopt, std::nullopt};
  } else if (!vec_zero(g.delta, g.tol)) {
    int i = 0;
    g.delta.cwiseAbs().maxCoeff(&i);
    return {rel, Outcome::Fails, coord_msg("means must match but differ", i, g.delta[i]),
            std::nullopt, std::nullopt};
  }
  int bi = 0, bj = 0;
  const double mn = g.D.minCoeff(&bi, &bj);
  if (mn < -g.tol)
    return {rel, Outcome::Fails, entry_msg("covariance decreases", bi, bj, mn), std::nullopt,
            std::nullopt};
  return {rel, Outcome::Holds,
          increasing
              ? "nonnegative mean shift and entrywise nondecreasing dispersion"
              : "equal means and entrywise nondecreasing dispersion",
          std::nullopt, std::nullopt};
}

inline OrderDecision decide_ccx_like(Relation rel, const PairGap& g) {
  const bool increasing = (rel == Relation::Iccx);
  if (increasing) {
    const int neg = first_negative(g.delta, g.tol);
    if (neg >= 0)
      return {rel, Outcome::Fails, coord_msg("mean shift is negative", neg, g.delta[neg]),
              std::nullopt, std::nullopt};
  } else if (!vec_zero(g.delta, g.tol)) {
    int i = 0;
    g.delta.cwiseAbs().maxCoeff(&i);
    return {rel, Outcome::Fails, coord_msg("means must match but differ", i, g.delta[i]),
            std::nullopt, std::nullopt};
  }
  for (int i = 0; i < g.D.rows(); ++i)
    if (g.D(i, i) < -g.tol)
      return {rel, Outcome::Fails, coord_msg("variance decreases", i, g.D(i, i)), std::nullopt,
              std::nullopt};
  int bi = 0, bj = 0;
  if (!offdiag_zero(g.D, g.tol, bi, bj))
    return {rel, Outcome::Fails,
            entry_msg("covariances must match but differ", bi, bj, g.D(bi, bj)), std::nullopt,
            std::nullopt};
  return {rel, Outcome::Holds,
          increasing ? "nonnegative mean shift, nondecreasing variances, matching covariances"
                     : "equal means, nondecreasing variances, matching covariances",
          std::nullopt, std::nullopt};
}

inline OrderDecision decide_cp(const PairGap& g) {
  if (!vec_zero(g.delta, g.tol)) {
    int i = 0;
    g.delta.cwiseAbs().maxCoeff(&i);
    return {Relation::Cp, Outcome::Fails,
            coord_msg("means must match but differ", i, g.delta[i]), std::nullopt, std::nullopt};
  }
  if (g.D.rows() > 16)
    return {Relation::Cp, Outcome::Undetermined,
            "dimension exceeds the exact copositivity test", std::nullopt, std::nullopt};
  ConeVerdict cop = is_copositive(g.D);
  if (cop.verdict == Verdict::Yes)
    return {Relation::Cp, Outcome::Holds, "equal means and copositive dispersion gap",
            std::nullopt, std::nullopt};
  return {Relation::Cp, Outcome::Fails,
          "dispersion gap is not copositive; the witness is nonnegative with negative quadratic "
          "form",
          cop.witness_vector, std::nullopt};
}

inline OrderDecision decide_cop(const PairGap& g) {
  if (!vec_zero(g.delta, g.tol)) {
    int i = 0;
    g.delta.cwiseAbs().maxCoeff(&i);
    return {Relation::Cop, Outcome::Fails,
            coord_msg("means must match but differ", i, g.delta[i]), std::nullopt, std::nullopt};
  }
  ConeVerdict cp = is_completely_positive(g.D);
  if (cp.verdict == Verdict::Yes)
    return {Relation::Cop, Outcome::Holds,
            cp.witness_factor ? "equal means and completely positive dispersion gap with "
                                "explicit nonnegative factorization"
                              : "equal means and completely positive dispersion gap",
            std::nullopt, cp.witness_factor};
  if (cp.verdict == Verdict::No)
    return {Relation::Cop, Outcome::Fails,
            "dispersion gap is not completely positive: " + cp.note, cp.witness_vector,
            std::nullopt};
  return {Relation::Cop, Outcome::Undetermined,
          "dispersion gap is doubly nonnegative but no nonnegative factorization was found",
          std::nullopt, std::nullopt};
}

}  // namespace detail

/// Decides whether X precedes Y in the given integral stochastic order, from
/// parameters alone. Both distributions must share generator and dimension.
inline OrderDecision check_order(Relation rel, const EllipticalDistribution& x,
                                 const EllipticalDistribution& y) {
  const detail::PairGap g = detail::pair_gap(x, y);
  switch (rel) {
    case Relation::St: return detail::decide_st(g);
    case Relation::Cx: return detail::decide_cx_like(Relation::Cx, g);
    case Relation::Lcx: return detail::decide_cx_like(Relation::Lcx, g);
    case Relation::Icx: return detail::decide_icx(g);
    case Relation::Sm: return detail::decide_sm(g);
    case Relation::Ism: return detail::decide_ism_uo(Relation::Ism, g);
    case Relation::Dcx: return detail::decide_dcx_like(Relation::Dcx, g);
    case Relation::Idcx: return detail::decide_dcx_like(Relation::Idcx, g);
    case Relation::Uo: return detail::decide_ism_uo(Relation::Uo, g);
    case Relation::Ccx: return detail::decide_ccx_like(Relation::Ccx, g);
    case Relation::Iccx: return detail::decide_ccx_like(Relation::Iccx, g);
    case Relation::Cp: return detail::decide_cp(g);
    case Relation::Cop: return detail::decide_cop(g);
  }
  throw Error(Errc::ParseError, "unknown relation");
}

inline std::vector<OrderDecision> check_all_orders(const EllipticalDistribution& x,
                                                   const EllipticalDistribution& y) {
  std::vector<OrderDecision> out;
  out.reserve(13);
  for (Relation r : all_relations()) out.push_back(check_order(r, x, y));
  return out;
}

/// Univariate comparison for the three relations whose one-dimensional
/// criteria close completely: for scalar laws with a common generator,
///   st  holds iff the mean does not decrease and the scale matches,
///   cx  holds iff the mean matches and the scale does not decrease,
///   icx holds iff neither the mean nor the scale decreases,
/// and each fails otherwise. The st row keeps its unbounded-support proviso.
inline OrderDecision check_univariate(const EllipticalDistribution& x,
                                      const EllipticalDistribution& y, Relation rel) {
  if (x.dim() != 1 || y.dim() != 1)
    throw Error(Errc::DimensionMismatch, "univariate comparison needs one-dimensional inputs");
  if (rel != Relation::St && rel != Relation::Cx && rel != Relation::Icx)
    throw Error(Errc::UnsupportedArity,
                "univariate comparison covers 'st', 'cx', and 'icx' only");
  return check_order(rel, x, y);
}

/// Renders a decision as one readable paragraph: the relation row, the
/// verdict, the tested conditions, and any certifying witness.
inline std::string explain(const OrderDecision& d) {
  std::ostringstream os;
  os << "relation '" << relation_name(d.relation) << "' (order over "
     << relation_description(d.relation) << "): " << outcome_name(d.outcome) << ". " << d.reason
     << ".";
  if (d.witness_vector) {
    os << " witness vector: [";
    for (int i = 0; i < d.witness_vector->size(); ++i)
      os << (i ? ", " : "") << (*d.witness_vector)[i];
    os << "].";
  }
  if (d.witness_factor) {
    os << " witness factor rows:";
    for (int i = 0; i < d.witness_factor->rows(); ++i) {
      os << " [";
      for (int j = 0; j < d.witness_factor->cols(); ++j)
        os << (j ? ", " : "") << (*d.witness_factor)(i, j);
      os << "]";
    }
    os << ".";
  }
  return os.str();
}

}  // namespace ellord
