#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "ellord/error.hpp"
#include "ellord/generator.hpp"

namespace ellord {

/// Result of a truncated series / recursion evaluation.
struct SeriesEval {
  double value;
  int terms_used;
  double truncation_bound;  ///< bound on |returned - exact|
};

namespace detail {

/// Direct series sum_k z^k / ((gamma)_k k!) with compensated long double
/// accumulation. Safe for z >= -50 (cancellation stays below ~1e6) and any
/// positive z within range.
inline SeriesEval hyp0f1_series(double gamma, double z) {
  long double term = 1.0L, sum = 1.0L, comp = 0.0L;
  long double max_mag = 1.0L;
  const long double lz = static_cast<long double>(z);
  const long double lg = static_cast<long double>(gamma);
  int k = 1;
  const int kmax = 100000;
  for (; k <= kmax; ++k) {
    term *= lz / (static_cast<long double>(k) * (lg + (k - 1)));
    const long double y = term - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    const long double am = std::abs(term);
    if (am > max_mag) max_mag = am;
    if (std::abs(sum) > max_mag) max_mag = std::abs(sum);
    if (am <= 1e-19L * (1.0L + std::abs(sum)) && k * k >= 4.0 * std::abs(z)) break;
  }
  if (k > kmax) throw Error(Errc::NumericFailure, "hypergeometric series did not converge");
  const double value = static_cast<double>(sum);
  // after the stop rule the term ratio is <= 1/4, so the tail is < |term|/3
  const double bound = static_cast<double>(std::abs(term)) / 3.0 +
                       3e-19 * static_cast<double>(max_mag) * std::sqrt(static_cast<double>(k));
  return {value, k, bound};
}

/// Half-integer-order Bessel route: 0F1(gamma; -x^2/4) =
/// Gamma(gamma) (x/2)^{1-gamma} J_{gamma-1}(x), with J_{+-1/2} in closed form
/// and upward recurrence (stable while the order stays below x).
inline SeriesEval hyp0f1_bessel_halfint(double gamma, double z) {
  const double x = 2.0 * std::sqrt(-z);
  const double pref = std::sqrt(2.0 / (M_PI * x));
  double jm = pref * std::cos(x);  // order -1/2
  double jc = pref * std::sin(x);  // order +1/2
  const int steps = static_cast<int>(std::lround(gamma - 0.5));  // target order gamma-1
  double nuc = 0.5;
  if (steps == 0) {
    jc = jm;
  } else {
    for (int s = 1; s < steps; ++s) {
      const double jn = (2.0 * nuc / x) * jc - jm;
      jm = jc;
      jc = jn;
      nuc += 1.0;
    }
  }
  const double value = std::exp(std::lgamma(gamma) + (1.0 - gamma) * std::log(x / 2.0)) * jc;
  return {value, steps, 5e-14 * (1.0 + std::abs(value))};
}

/// Bessel route for general order >= 0: 0F1(gamma; -x^2/4) =
/// Gamma(gamma) (x/2)^{1-gamma} J_{gamma-1}(x). Used far enough out that
/// std::cyl_bessel_j sits in its accurate continued-fraction / asymptotic
/// regimes. The prefactor is assembled in log space.
inline SeriesEval hyp0f1_bessel_general(double gamma, double z) {
  const double x = 2.0 * std::sqrt(-z);
  const double j = std::cyl_bessel_j(gamma - 1.0, x);
  const double value = std::exp(std::lgamma(gamma) + (1.0 - gamma) * std::log(x / 2.0)) * j;
  return {value, 0, 1e-12 * (1.0 + std::abs(value))};
}

/// General large-|z| route: downward recursion on the contiguous relation
/// f(a-1) = f(a) + z/(a(a-1)) f(a+1) for f(a) = 0F1(a; z), anchored high
/// enough that the direct series has no cancellation. The competing solution
/// of the recursion explodes upward, so downward propagation is stable.
inline SeriesEval hyp0f1_contiguous(double gamma, double z) {
  const double anchor = std::ceil(std::abs(z) / 0.9 - gamma) + 10.0;
  if (!(anchor < 5e7))
    throw Error(Errc::NumericFailure, "argument too negative for the recursion anchor");
  const int K = static_cast<int>(anchor);
  SeriesEval hi1 = hyp0f1_series(gamma + K, z);
  SeriesEval hi2 = hyp0f1_series(gamma + K + 1, z);
  long double fk = hi1.value, fkp1 = hi2.value;
  for (int k = K; k >= 1; --k) {
    const long double a = static_cast<long double>(gamma) + k;
    const long double fkm1 = fk + static_cast<long double>(z) / (a * (a - 1.0L)) * fkp1;
    fkp1 = fk;
    fk = fkm1;
  }
  const double value = static_cast<double>(fk);
  const double bound = hi1.truncation_bound + hi2.truncation_bound +
                       3e-19 * K * (1.0 + std::abs(value));
  return {value, K + hi1.terms_used + hi2.terms_used, bound};
}

}  // namespace detail

/// Confluent limit function 0F1(gamma; z) = sum_k z^k / ((gamma)_k k!).
///
/// Uses the direct series for z >= -50 and switches to stable Bessel-type
/// evaluation for deeply negative arguments where the series cancels
/// catastrophically.
inline SeriesEval hyp0f1(double gamma, double z) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw Error(Errc::NonPositiveParameter, "hyp0f1 requires gamma > 0");
  if (!std::isfinite(z)) throw Error(Errc::NumericFailure, "hyp0f1 argument must be finite");
  if (z >= -50.0) return detail::hyp0f1_series(gamma, z);
  const double two_gamma = 2.0 * gamma;
  const bool half_integer =
      std::abs(two_gamma - std::lround(two_gamma)) < 1e-12 && (std::lround(two_gamma) % 2 == 1);
  // both Bessel connections need the target order well below x = 2 sqrt(-z)
  const double x = 2.0 * std::sqrt(-z);
  if (half_integer && gamma - 1.0 < 0.9 * x) return detail::hyp0f1_bessel_halfint(gamma, z);
  if (gamma >= 1.0 && gamma - 1.0 < 0.9 * x && z < -2500.0)
    return detail::hyp0f1_bessel_general(gamma, z);
  return detail::hyp0f1_contiguous(gamma, z);
}

namespace detail {

inline double hyp0f1_value(double gamma, double z) { return hyp0f1(gamma, z).value; }

/// Gauss-Legendre rule on [-1, 1], cached per order.
inline const std::pair<std::vector<double>, std::vector<double>>& gl_rule(int k) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  std::vector<double> x(k), w(k);
  for (int i = 0; i < (k + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (k + 0.5));
    double p0 = 0, p1 = 0;
    for (int it2 = 0; it2 < 100; ++it2) {
      p0 = 1.0;
      p1 = 0.0;
      for (int j = 0; j < k; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1);
      }
      const double dp = k * (t * p0 - p1) / (t * t - 1.0);
      const double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) {
        p0 = 1.0;
        p1 = 0.0;
        for (int j = 0; j < k; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1);
        }
        break;
      }
    }
    const double dp = k * (t * p0 - p1) / (t * t - 1.0);
    x[i] = -t;
    x[k - 1 - i] = t;
    w[i] = w[k - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return cache.emplace(k, std::make_pair(std::move(x), std::move(w))).first->second;
}

template <class F>
double gl_integrate(F&& f, double a, double b, int k) {
  const auto& rule = gl_rule(k);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += rule.second[i] * f(mid + half * rule.first[i]);
  return s * half;
}

template <class F>
double adaptive_gl_rec(F&& f, double a, double b, double whole, double tol_abs, double tol_rel,
                       int depth) {
  const double m = 0.5 * (a + b);
  const double left = gl_integrate(f, a, m, 100);
  const double right = gl_integrate(f, m, b, 100);
  const double sum = left + right;
  if (depth <= 0 || std::abs(sum - whole) <= std::max(tol_abs, tol_rel * std::abs(sum)))
    return sum;
  return adaptive_gl_rec(f, a, m, left, 0.5 * tol_abs, tol_rel, depth - 1) +
         adaptive_gl_rec(f, m, b, right, 0.5 * tol_abs, tol_rel, depth - 1);
}

/// Adaptive Gauss-Legendre on [a, b] with 100-point panels.
template <class F>
double adaptive_gl(F&& f, double a, double b, double tol_abs = 1e-13, double tol_rel = 1e-12,
                   int depth = 16) {
  const double whole = gl_integrate(f, a, b, 100);
  return adaptive_gl_rec(f, a, b, whole, tol_abs, tol_rel, depth);
}

/// log density of the dimension-n Gaussian radius (chi with n dof).
inline double chi_log_pdf(int n, double r) {
  if (r <= 0.0) return -std::numeric_limits<double>::infinity();
  return (1.0 - 0.5 * n) * std::log(2.0) - std::lgamma(0.5 * n) + (n - 1) * std::log(r) -
         0.5 * r * r;
}

/// log density of the dimension-n Student radius R = sqrt(n F(n, nu)).
inline double t_radial_log_pdf(int n, double nu, double r) {
  if (r <= 0.0) return -std::numeric_limits<double>::infinity();
  const double x = r * r / n;
  const double logB = std::lgamma(0.5 * n) + std::lgamma(0.5 * nu) - std::lgamma(0.5 * (n + nu));
  const double log_fF = -logB + 0.5 * n * std::log(static_cast<double>(n) / nu) +
                        (0.5 * n - 1.0) * std::log(x) - 0.5 * (n + nu) * std::log1p(n * x / nu);
  return std::log(2.0 * r / n) + log_fF;
}

/// Integral of kernel(r) against the radial density (optionally weighted by
/// r^2) over (0, inf), via r = s/(1-s) on adaptively refined panels.
template <class Kernel>
double radial_integral(const GeneratorSpec& gen, int n, bool weight_r2, Kernel&& kernel) {
  auto log_pdf = [&](double r) {
    return gen.family() == RadialFamily::Normal ? chi_log_pdf(n, r)
                                                : t_radial_log_pdf(n, gen.nu(), r);
  };
  auto f = [&](double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double r = s / (1.0 - s);
    double lg = log_pdf(r) - 2.0 * std::log1p(-s);
    if (weight_r2) lg += 2.0 * std::log(r);
    // the kernels are bounded, so weights below e^-120 cannot move the result;
    // skipping them keeps r^2 within range for slowly decaying radial tails
    if (lg < -120.0) return 0.0;
    return std::exp(lg) * kernel(r);
  };
  return adaptive_gl(f, 0.0, 1.0);
}

/// Characteristic generator by quadrature over the radial law (cross-check
/// path; also the production path for psi1 of continuous laws).
inline double psi_by_quadrature(const GeneratorSpec& gen, int n, double u, bool size_biased) {
  const double gamma = 0.5 * n + (size_biased ? 1.0 : 0.0);
  const double norm = size_biased ? gen.second_moment(n) : 1.0;
  const double raw = radial_integral(gen, n, size_biased, [&](double r) {
    return hyp0f1_value(gamma, -0.25 * r * r * u);
  });
  return raw / norm;
}

inline double second_moment_by_quadrature(const GeneratorSpec& gen, int n) {
  if (gen.family() == RadialFamily::RadialDiscrete) {
    double s = 0.0;
    for (const auto& a : gen.atoms()) s += a.w * a.r * a.r;
    return s;
  }
  return radial_integral(gen, n, true, [](double) { return 1.0; });
}

}  // namespace detail

/// Characteristic generator psi(u) of the dimension-n elliptical law, u >= 0.
inline double psi_value(const GeneratorSpec& gen, int n, double u) {
  if (n < 1) throw Error(Errc::NonPositiveParameter, "dimension must be >= 1");
  if (!(u >= 0.0)) throw Error(Errc::NegativeArgument, "psi argument must be >= 0");
  switch (gen.family()) {
    case RadialFamily::Normal:
      return std::exp(-0.5 * u);
    case RadialFamily::RadialDiscrete: {
      double s = 0.0;
      for (const auto& a : gen.atoms())
        s += a.w * detail::hyp0f1_value(0.5 * n, -0.25 * a.r * a.r * u);
      return s;
    }
    case RadialFamily::StudentT:
      return detail::psi_by_quadrature(gen, n, u, false);
  }
  return 0.0;
}

/// Interpolation companion generator
/// psi1(u) = (1/E(R^2)) Integral 0F1(n/2+1; -r^2 u/4) r^2 dP_R(r), u >= 0.
/// Satisfies psi'(u) = -(E(R^2)/(2n)) psi1(u).
inline double psi1_value(const GeneratorSpec& gen, int n, double u) {
  if (n < 1) throw Error(Errc::NonPositiveParameter, "dimension must be >= 1");
  if (!(u >= 0.0)) throw Error(Errc::NegativeArgument, "psi1 argument must be >= 0");
  const double e2 = gen.second_moment(n);
  if (!(e2 > 0.0))
    throw Error(Errc::InfiniteSecondMoment,
                "radial law has zero second moment; companion generator undefined");
  if (gen.family() == RadialFamily::RadialDiscrete) {
    double s = 0.0;
    for (const auto& a : gen.atoms())
      s += a.w * a.r * a.r * detail::hyp0f1_value(0.5 * n + 1.0, -0.25 * a.r * a.r * u);
    return s / e2;
  }
  return detail::psi_by_quadrature(gen, n, u, true);
}

/// E(R^2) of the radial law in dimension n (closed forms).
inline double radial_second_moment(const GeneratorSpec& gen, int n) {
  return gen.second_moment(n);
}

}  // namespace ellord
