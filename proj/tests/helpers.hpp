#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ellord/ellord.hpp"

namespace th {

// Catch matcher: exception carries the expected error code
class ErrcMatcher : public Catch::Matchers::MatcherGenericBase {
 public:
  explicit ErrcMatcher(ellord::Errc c) : code_(c) {}
  bool match(const ellord::Error& e) const { return e.code() == code_; }
  std::string describe() const override {
    return std::string("has error code ") + ellord::errc_name(code_);
  }

 private:
  ellord::Errc code_;
};

inline ErrcMatcher errc_is(ellord::Errc c) { return ErrcMatcher(c); }

inline ellord::GeneratorSpec normal() { return ellord::GeneratorSpec::normal(); }

inline ellord::GeneratorSpec tgen(double nu) { return ellord::GeneratorSpec::student_t(nu); }

inline ellord::GeneratorSpec discrete() {
  return ellord::GeneratorSpec::radial_discrete({{1.0, 0.5}, {2.0, 0.3}, {3.0, 0.2}});
}

inline ellord::EllipticalDistribution dist(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                           const ellord::GeneratorSpec& g = normal()) {
  return {mu, sigma, g};
}

inline ellord::EllipticalDistribution equi(int n, double var, double rho,
                                           const ellord::GeneratorSpec& g = normal()) {
  return {Eigen::VectorXd::Zero(n), ellord::build_equicorrelated(n, var, rho), g};
}

// deterministic pseudo-random symmetric matrix with entries in [-1, 1]
inline Eigen::MatrixXd random_symmetric(int n, ellord::RandomStream& rs) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = 2.0 * rs.uniform() - 1.0;
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

// deterministic pseudo-random PSD matrix, comfortably conditioned
inline Eigen::MatrixXd random_psd(int n, ellord::RandomStream& rs) {
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = 2.0 * rs.uniform() - 1.0;
  return b * b.transpose() / n + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::VectorXd random_vec(int n, ellord::RandomStream& rs, double half_width = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = half_width * (2.0 * rs.uniform() - 1.0);
  return v;
}

// brute-force copositivity oracle: minimize w'Aw over the probability simplex
// by a full grid sweep followed by pairwise-transfer descent from the best
// grid point. Returns the polished minimum.
inline double simplex_min_quadratic(const Eigen::MatrixXd& A, int steps = 100) {
  const int n = static_cast<int>(A.rows());
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  best[0] = 1.0;
  double best_q = A(0, 0);

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  // enumerate compositions of `steps` into n parts
  const double h = 1.0 / steps;
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      idx[static_cast<std::size_t>(pos)] = left;
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w[i] = idx[static_cast<std::size_t>(i)] * h;
      const double q = w.dot(A * w);
      if (q < best_q) {
        best_q = q;
        best = w;
      }
      return;
    }
    for (int k = 0; k <= left; ++k) {
      idx[static_cast<std::size_t>(pos)] = k;
      rec(pos + 1, left - k);
    }
  };
  rec(0, steps);

  // pairwise transfer descent: move mass between two coordinates, exact
  // one-dimensional quadratic minimization per pair, until no sweep improves.
  Eigen::VectorXd w = best;
  for (int sweep = 0; sweep < 200; ++sweep) {
    bool improved = false;
    Eigen::VectorXd Aw = A * w;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        // w' = w + t(e_i - e_j), t in [-w_i, w_j]
        const double d = A(i, i) - 2.0 * A(i, j) + A(j, j);
        const double g = 2.0 * (Aw[i] - Aw[j]);
        double t;
        if (d > 1e-14) {
          t = std::clamp(-g / (2.0 * d), -w[i], w[j]);
        } else {
          t = (g > 0) ? -w[i] : w[j];  // linear (or concave): go to a boundary
        }
        const double delta = g * t + d * t * t;
        if (delta < -1e-15) {
          w[i] += t;
          w[j] -= t;
          Aw = A * w;
          improved = true;
        }
      }
    const double q = w.dot(A * w);
    if (q < best_q) best_q = q;
    if (!improved) break;
  }
  return best_q;
}

}  // namespace th
