#pragma once

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <utility>
#include <vector>

#include "ellord/distribution.hpp"
#include "ellord/error.hpp"
#include "ellord/random.hpp"

namespace ellord {

/// Symmetric PSD square root (eigenvalues clamped at zero).
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

namespace detail {

inline void fill_normals(RandomStream& rs, Eigen::VectorXd& z) {
  for (int i = 0; i < z.size(); ++i) z[i] = rs.normal();
}

inline void unit_sphere_row(RandomStream& rs, Eigen::VectorXd& u) {
  for (;;) {
    fill_normals(rs, u);
    const double nrm = u.norm();
    if (nrm > 1e-12) {
      u /= nrm;
      return;
    }
  }
}

inline int pick_atom(const std::vector<double>& cumw, double v) {
  int lo = 0, hi = static_cast<int>(cumw.size()) - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (v <= cumw[mid]) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

inline std::vector<double> cumulative_weights(const std::vector<RadialAtom>& atoms) {
  std::vector<double> c(atoms.size());
  double s = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    s += atoms[i].w;
    c[i] = s;
  }
  c.back() = 1.0;
  return c;
}

/// Weights proportional to w_i r_i^2 (the r^2-size-biased reweighting).
inline std::vector<double> size_biased_cumulative(const std::vector<RadialAtom>& atoms) {
  double e2 = 0.0;
  for (const auto& a : atoms) e2 += a.w * a.r * a.r;
  if (!(e2 > 0.0))
    throw Error(Errc::InfiniteSecondMoment,
                "radial law has zero second moment; size-biased law undefined");
  std::vector<double> c(atoms.size());
  double s = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    s += atoms[i].w * atoms[i].r * atoms[i].r / e2;
    c[i] = s;
  }
  c.back() = 1.0;
  return c;
}

inline double radius_draw(RandomStream& rs, const GeneratorSpec& gen, int n,
                          const std::vector<double>& cumw) {
  switch (gen.family()) {
    case RadialFamily::Normal:
      return std::sqrt(rs.chi_square(n));
    case RadialFamily::StudentT: {
      const double num = rs.chi_square(n);
      const double den = rs.chi_square(gen.nu());
      return std::sqrt(gen.nu() * num / den);
    }
    case RadialFamily::RadialDiscrete:
      return gen.atoms()[pick_atom(cumw, rs.uniform_pos())].r;
  }
  return 0.0;
}

/// 99.99% quantile of the Student radial law (envelope for the size-biased
/// acceptance-rejection sampler).
inline double t_radial_envelope(int n, double nu) {
  boost::math::fisher_f fdist(static_cast<double>(n), nu);
  return std::sqrt(n * boost::math::quantile(fdist, 0.9999));
}

inline double size_biased_radius_draw(RandomStream& rs, const GeneratorSpec& gen, int n,
                                      const std::vector<double>& cumw, double envelope) {
  switch (gen.family()) {
    case RadialFamily::Normal:
      return std::sqrt(rs.chi_square(n + 2));
    case RadialFamily::RadialDiscrete:
      return gen.atoms()[pick_atom(cumw, rs.uniform_pos())].r;
    case RadialFamily::StudentT:
      for (;;) {
        const double r = radius_draw(rs, gen, n, cumw);
        const double ratio = r / envelope;
        if (ratio >= 1.0 || rs.uniform() < ratio * ratio) return r;
      }
  }
  return 0.0;
}

/// N draws from the r^2-size-biased radial law (test hook; the production
/// path embeds this in the interpolant sampler).
inline Eigen::VectorXd sample_size_biased_radius(const GeneratorSpec& gen, int n,
                                                 std::int64_t N, RandomStream& stream) {
  if (n < 1) throw Error(Errc::NonPositiveParameter, "dimension must be >= 1");
  std::vector<double> cumw;
  double env = 0.0;
  if (gen.family() == RadialFamily::RadialDiscrete) cumw = size_biased_cumulative(gen.atoms());
  if (gen.family() == RadialFamily::StudentT) env = t_radial_envelope(n, gen.nu());
  RandomStream base = stream.fork();
  Eigen::VectorXd out(N);
  for (std::int64_t i = 0; i < N; ++i) {
    RandomStream rs = base.at(i);
    out[i] = size_biased_radius_draw(rs, gen, n, cumw, env);
  }
  return out;
}

}  // namespace detail

/// N points uniform on the unit sphere in R^n, one per row.
inline Eigen::MatrixXd sample_unit_sphere(int n, std::int64_t N, RandomStream& stream) {
  if (n < 1) throw Error(Errc::NonPositiveParameter, "dimension must be >= 1");
  RandomStream base = stream.fork();
  Eigen::MatrixXd out(N, n);
  Eigen::VectorXd u(n);
  for (std::int64_t i = 0; i < N; ++i) {
    RandomStream rs = base.at(i);
    detail::unit_sphere_row(rs, u);
    out.row(i) = u.transpose();
  }
  return out;
}

/// N draws of the radius R for the dimension-n law.
inline Eigen::VectorXd sample_radius(const GeneratorSpec& gen, int n, std::int64_t N,
                                     RandomStream& stream) {
  if (n < 1) throw Error(Errc::NonPositiveParameter, "dimension must be >= 1");
  std::vector<double> cumw;
  if (gen.family() == RadialFamily::RadialDiscrete)
    cumw = detail::cumulative_weights(gen.atoms());
  RandomStream base = stream.fork();
  Eigen::VectorXd out(N);
  for (std::int64_t i = 0; i < N; ++i) {
    RandomStream rs = base.at(i);
    out[i] = detail::radius_draw(rs, gen, n, cumw);
  }
  return out;
}

namespace detail {

/// One draw of X - mu given the shared primitives of a row stream.
/// Gaussian rows reuse z as R * U (exact); Student rows use the
/// scale-mixture form z * sqrt(nu / W).
inline void centered_draw(RandomStream& rs, const GeneratorSpec& gen,
                          const std::vector<double>& cumw, Eigen::VectorXd& z) {
  fill_normals(rs, z);
  switch (gen.family()) {
    case RadialFamily::Normal:
      return;
    case RadialFamily::StudentT: {
      const double w = rs.chi_square(gen.nu());
      z *= std::sqrt(gen.nu() / w);
      return;
    }
    case RadialFamily::RadialDiscrete: {
      const double nrm = z.norm();
      if (nrm > 1e-12) z /= nrm;
      else z.setZero();
      z *= gen.atoms()[pick_atom(cumw, rs.uniform_pos())].r;
      return;
    }
  }
}

}  // namespace detail

/// N x n matrix of draws, one per row.
inline Eigen::MatrixXd sample_elliptical(const EllipticalDistribution& d, std::int64_t N,
                                         RandomStream& stream) {
  validate(d);
  const int n = d.dim();
  const Eigen::MatrixXd A = psd_sqrt(d.sigma);
  std::vector<double> cumw;
  if (d.gen.family() == RadialFamily::RadialDiscrete)
    cumw = detail::cumulative_weights(d.gen.atoms());
  RandomStream base = stream.fork();
  Eigen::MatrixXd out(N, n);
  Eigen::VectorXd z(n);
  for (std::int64_t i = 0; i < N; ++i) {
    RandomStream rs = base.at(i);
    detail::centered_draw(rs, d.gen, cumw, z);
    out.row(i) = (d.mu + A * z).transpose();
  }
  return out;
}

/// Coupled draws sharing the radial and spherical primitives row by row.
/// Identical inputs give bitwise-identical outputs.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_coupled(
    const EllipticalDistribution& dx, const EllipticalDistribution& dy, std::int64_t N,
    RandomStream& stream) {
  validate(dx);
  validate(dy);
  require_comparable(dx, dy);
  const int n = dx.dim();
  const Eigen::MatrixXd Ax = psd_sqrt(dx.sigma);
  const Eigen::MatrixXd Ay = psd_sqrt(dy.sigma);
  std::vector<double> cumw;
  if (dx.gen.family() == RadialFamily::RadialDiscrete)
    cumw = detail::cumulative_weights(dx.gen.atoms());
  RandomStream base = stream.fork();
  Eigen::MatrixXd X(N, n), Y(N, n);
  Eigen::VectorXd z(n);
  for (std::int64_t i = 0; i < N; ++i) {
    RandomStream rs = base.at(i);
    detail::centered_draw(rs, dx.gen, cumw, z);
    X.row(i) = (dx.mu + Ax * z).transpose();
    Y.row(i) = (dy.mu + Ay * z).transpose();
  }
  return {std::move(X), std::move(Y)};
}

/// Draws from the interpolation companion law of d: radius Rtilde * V^{1/n}
/// with Rtilde from the r^2-size-biased radial law and V uniform (the
/// uniform-ball thinning), direction uniform on the sphere.
inline Eigen::MatrixXd sample_psi1_elliptical(const EllipticalDistribution& d, std::int64_t N,
                                              RandomStream& stream) {
  validate(d);
  const int n = d.dim();
  if (!(d.gen.second_moment(n) > 0.0))
    throw Error(Errc::InfiniteSecondMoment,
                "radial law has zero second moment; companion law undefined");
  const Eigen::MatrixXd A = psd_sqrt(d.sigma);
  std::vector<double> cumw;
  double env = 0.0;
  if (d.gen.family() == RadialFamily::RadialDiscrete)
    cumw = detail::size_biased_cumulative(d.gen.atoms());
  if (d.gen.family() == RadialFamily::StudentT)
    env = detail::t_radial_envelope(n, d.gen.nu());
  RandomStream base = stream.fork();
  Eigen::MatrixXd out(N, n);
  Eigen::VectorXd u(n);
  for (std::int64_t i = 0; i < N; ++i) {
    RandomStream rs = base.at(i);
    detail::unit_sphere_row(rs, u);
    const double rt = detail::size_biased_radius_draw(rs, d.gen, n, cumw, env);
    const double ball = std::pow(rs.uniform_pos(), 1.0 / n);
    out.row(i) = (d.mu + (rt * ball) * (A * u)).transpose();
  }
  return out;
}

}  // namespace ellord
