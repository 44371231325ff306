#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ellord/error.hpp"
#include "ellord/generator.hpp"

namespace ellord {

/// Parameter triple of an elliptical distribution in R^n.
struct EllipticalDistribution {
  Eigen::VectorXd mu;     ///< location
  Eigen::MatrixXd sigma;  ///< dispersion (symmetric PSD)
  GeneratorSpec gen;      ///< radial law

  int dim() const { return static_cast<int>(mu.size()); }
};

namespace detail {

inline double max_abs(const Eigen::MatrixXd& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

/// Eigenvector sign convention: first component of magnitude > tol is positive.
inline void canonical_sign(Eigen::VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-14) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

}  // namespace detail

/// Relative symmetry tolerance: 1e-10 * (1 + largest magnitude entry).
inline double symmetry_tolerance(const Eigen::MatrixXd& a) {
  return 1e-10 * (1.0 + detail::max_abs(a));
}

inline bool is_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) return false;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= symmetry_tolerance(a);
}

/// Validates dimensions, symmetry, and positive semidefiniteness
/// (smallest eigenvalue >= -1e-9 * (1 + spectral radius)).
inline void validate(const EllipticalDistribution& d) {
  const int n = d.dim();
  if (n < 1) throw Error(Errc::DimensionMismatch, "location must have at least one entry");
  if (d.sigma.rows() != n || d.sigma.cols() != n)
    throw Error(Errc::DimensionMismatch,
                "dispersion is " + std::to_string(d.sigma.rows()) + "x" +
                    std::to_string(d.sigma.cols()) + " but location has dimension " +
                    std::to_string(n));
  if (!d.mu.allFinite() || !d.sigma.allFinite())
    throw Error(Errc::BadGeneratorParameter, "parameters must be finite");
  if (!is_symmetric(d.sigma))
    throw Error(Errc::AsymmetricDispersion,
                "dispersion is not symmetric within tolerance " +
                    detail::fmt(symmetry_tolerance(d.sigma)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (d.sigma + d.sigma.transpose()));
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  if (lmin < -1e-9 * (1.0 + lmax)) {
    Eigen::VectorXd v = es.eigenvectors().col(0);
    detail::canonical_sign(v);
    std::ostringstream os;
    os << "dispersion has eigenvalue " << es.eigenvalues()[0] << " with eigenvector [";
    for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << "]";
    throw Error(Errc::NotPositiveSemidefinite, os.str());
  }
}

/// True when the two distributions may be compared: same dimension and an
/// identical radial law.
inline bool comparable(const EllipticalDistribution& x, const EllipticalDistribution& y) {
  return x.dim() == y.dim() && x.gen == y.gen;
}

inline void require_comparable(const EllipticalDistribution& x, const EllipticalDistribution& y) {
  if (x.dim() != y.dim())
    throw Error(Errc::DimensionMismatch, "distributions have dimensions " +
                                             std::to_string(x.dim()) + " and " +
                                             std::to_string(y.dim()));
  if (x.gen != y.gen)
    throw Error(Errc::GeneratorMismatch, "distributions use different radial laws (" +
                                             std::string(family_name(x.gen.family())) + " vs " +
                                             std::string(family_name(y.gen.family())) + ")");
}

/// Image law of x -> B x + b. B must be m x n with full row rank, m <= n.
inline EllipticalDistribution affine_transform(const EllipticalDistribution& d,
                                               const Eigen::MatrixXd& B,
                                               const Eigen::VectorXd& b) {
  validate(d);
  const int n = d.dim();
  const int m = static_cast<int>(B.rows());
  if (B.cols() != n)
    throw Error(Errc::DimensionMismatch, "matrix has " + std::to_string(B.cols()) +
                                             " columns, distribution has dimension " +
                                             std::to_string(n));
  if (b.size() != m)
    throw Error(Errc::DimensionMismatch, "offset has dimension " + std::to_string(b.size()) +
                                             ", matrix has " + std::to_string(m) + " rows");
  if (m < 1 || m > n)
    throw Error(Errc::DimensionMismatch, "matrix must have between 1 and n rows");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
  const double smax = svd.singularValues()[0];
  if (svd.singularValues()[m - 1] <= 1e-12 * (1.0 + smax))
    throw Error(Errc::RankDeficient, "matrix does not have full row rank");
  EllipticalDistribution out{B * d.mu + b, B * d.sigma * B.transpose(), d.gen};
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
  return out;
}

/// Restriction to the coordinates in idx (0-based, strictly increasing).
inline EllipticalDistribution marginal_of(const EllipticalDistribution& d,
                                          const std::vector<int>& idx) {
  validate(d);
  const int n = d.dim();
  if (idx.empty()) throw Error(Errc::IndexOutOfRange, "index set is empty");
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= n)
      throw Error(Errc::IndexOutOfRange,
                  "index " + std::to_string(idx[k]) + " outside [0, " + std::to_string(n) + ")");
    if (k > 0 && idx[k] <= idx[k - 1])
      throw Error(Errc::IndexOutOfRange, "indices must be strictly increasing");
  }
  const int m = static_cast<int>(idx.size());
  EllipticalDistribution out{Eigen::VectorXd(m), Eigen::MatrixXd(m, m), d.gen};
  for (int i = 0; i < m; ++i) {
    out.mu[i] = d.mu[idx[i]];
    for (int j = 0; j < m; ++j) out.sigma(i, j) = d.sigma(idx[i], idx[j]);
  }
  return out;
}

/// Covariance matrix: -2 phi'(0) Sigma = (E(R^2)/n) Sigma.
inline Eigen::MatrixXd covariance_of(const EllipticalDistribution& d) {
  validate(d);
  return (d.gen.second_moment(d.dim()) / d.dim()) * d.sigma;
}

/// Equicorrelated dispersion: var on the diagonal, var*rho off it.
/// PSD requires rho in [-1/(n-1), 1].
inline Eigen::MatrixXd build_equicorrelated(int n, double var, double rho) {
  if (n < 1) throw Error(Errc::NonPositiveParameter, "dimension must be >= 1");
  if (!(var >= 0.0)) throw Error(Errc::NonPositiveParameter, "variance must be >= 0");
  const double lo = n == 1 ? -1.0 : -1.0 / (n - 1);
  if (rho < lo - 1e-12 || rho > 1.0 + 1e-12)
    throw Error(Errc::NotPositiveSemidefinite,
                "equicorrelation " + detail::fmt(rho) + " outside [" + detail::fmt(lo) + ", 1]");
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(n, n, var * rho);
  s.diagonal().setConstant(var);
  return s;
}

/// First-order autoregressive dispersion: entries var * rho^|i-j|, |rho| <= 1.
inline Eigen::MatrixXd build_ar1(int n, double var, double rho) {
  if (n < 1) throw Error(Errc::NonPositiveParameter, "dimension must be >= 1");
  if (!(var >= 0.0)) throw Error(Errc::NonPositiveParameter, "variance must be >= 0");
  if (std::abs(rho) > 1.0 + 1e-12)
    throw Error(Errc::NotPositiveSemidefinite, "autocorrelation must satisfy |rho| <= 1");
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = var * std::pow(rho, std::abs(i - j));
  return s;
}

}  // namespace ellord
