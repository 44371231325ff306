#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ellord/distribution.hpp"
#include "ellord/error.hpp"
#include "ellord/random.hpp"

namespace ellord {

enum class Verdict { Yes, No, Undetermined };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Yes: return "Yes";
    case Verdict::No: return "No";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "?";
}

/// Outcome of a matrix cone membership test. A No for the semidefinite or
/// copositive cone carries a vector witness with w'Aw < 0 (nonnegative w for
/// the copositive cone); a Yes for the completely positive cone carries a
/// factor B >= 0 with B'B = A.
struct ConeVerdict {
  Verdict verdict;
  std::optional<Eigen::VectorXd> witness_vector;
  std::optional<Eigen::MatrixXd> witness_factor;
  std::string note;
};

namespace detail {

inline Eigen::MatrixXd require_symmetric_input(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw Error(Errc::DimensionMismatch, "matrix must be square and nonempty");
  if (!is_symmetric(a))
    throw Error(Errc::AsymmetricInput, "matrix is not symmetric within tolerance");
  return 0.5 * (a + a.transpose());
}

/// Dense primal simplex for max c'x s.t. Ax <= b, x >= 0, with b >= 0.
/// Bland's rule (lowest index) for determinism and anti-cycling.
/// Returns the optimum; fills xout.
inline double simplex_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& c, Eigen::VectorXd& xout) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Eigen::MatrixXd T(m + 1, n + m + 1);
  T.setZero();
  T.block(0, 0, m, n) = A;
  T.block(0, n, m, m).setIdentity();
  T.col(n + m).head(m) = b;
  T.row(m).head(n) = -c.transpose();
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  const double eps = 1e-9;
  for (int iter = 0; iter < 20000; ++iter) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j)
      if (T(m, j) < -eps) {
        enter = j;
        break;
      }
    if (enter < 0) break;
    int leave = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      if (T(i, enter) > eps) {
        const double ratio = T(i, n + m) / T(i, enter);
        if (leave < 0 || ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && basis[i] < basis[leave]))
          leave = i, best = ratio;
      }
    }
    if (leave < 0) break;  // unbounded; cannot happen with box constraints
    T.row(leave) /= T(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = T(i, enter);
      if (f != 0.0) T.row(i) -= f * T.row(leave);
    }
    basis[leave] = enter;
  }
  xout = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) xout[basis[i]] = T(i, n + m);
  return T(m, n + m);
}

/// Strictly positive vector in the column span of V, or nullopt.
/// Solves max t s.t. Vc >= t, |c_j| <= 1, 0 <= t <= 1 by simplex.
inline std::optional<Eigen::VectorXd> positive_vector_in_span(const Eigen::MatrixXd& V) {
  const int n = static_cast<int>(V.rows());
  const int k = static_cast<int>(V.cols());
  if (k == 0) return std::nullopt;
  Eigen::MatrixXd Vn = V;
  for (int j = 0; j < k; ++j) {
    const double m = Vn.col(j).cwiseAbs().maxCoeff();
    if (m > 0) Vn.col(j) /= m;
  }
  if (k == 1) {
    Eigen::VectorXd v = Vn.col(0);
    const double mx = v.cwiseAbs().maxCoeff();
    if (v.maxCoeff() <= 0) v = -v;
    if (v.minCoeff() > 1e-10 * mx) return v;
    return std::nullopt;
  }
  // variables (p, q, t) with c = p - q
  const int nv = 2 * k + 1;
  const int rows = n + 2 * k + 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, nv);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  A.block(0, 0, n, k) = -Vn;
  A.block(0, k, n, k) = Vn;
  A.col(2 * k).head(n).setOnes();
  for (int j = 0; j < 2 * k + 1; ++j) {
    A(n + j, j) = 1.0;
    b[n + j] = 1.0;
  }
  Eigen::VectorXd cobj = Eigen::VectorXd::Zero(nv);
  cobj[2 * k] = 1.0;
  Eigen::VectorXd x;
  const double topt = simplex_max(A, b, cobj, x);
  if (topt <= 1e-9) return std::nullopt;
  Eigen::VectorXd z = Vn * (x.head(k) - x.segment(k, k));
  if (z.minCoeff() <= 0) return std::nullopt;
  return z;
}

inline void enumerate_subsets_by_size(int n, const std::function<bool(const std::vector<int>&)>& visit) {
  for (int size = 1; size <= n; ++size) {
    std::vector<int> idx(size);
    for (int i = 0; i < size; ++i) idx[i] = i;
    for (;;) {
      if (visit(idx)) return;
      int i = size - 1;
      while (i >= 0 && idx[i] == n - size + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
}

}  // namespace detail

/// Positive semidefiniteness: smallest eigenvalue >= -tol * (1 + spectral
/// radius). A No carries the minimizing eigenvector.
inline ConeVerdict is_psd(const Eigen::MatrixXd& a, double tol = 1e-9) {
  const Eigen::MatrixXd s = detail::require_symmetric_input(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const double lmin = es.eigenvalues().minCoeff();
  const double rad = es.eigenvalues().cwiseAbs().maxCoeff();
  std::ostringstream os;
  if (lmin >= -tol * (1.0 + rad)) {
    os << "smallest eigenvalue " << lmin << " within tolerance";
    return {Verdict::Yes, std::nullopt, std::nullopt, os.str()};
  }
  Eigen::VectorXd v = es.eigenvectors().col(0);
  detail::canonical_sign(v);
  os << "eigenvalue " << es.eigenvalues()[0] << " is negative";
  return {Verdict::No, v, std::nullopt, os.str()};
}

/// Copositivity (x >= 0 implies x'Ax >= 0), exact for n <= 16 by principal
/// submatrix eigenstructure: A fails to be copositive exactly when some
/// principal submatrix has a strictly positive eigenvector with a negative
/// eigenvalue. A No carries a nonnegative witness w with w'Aw < 0.
inline ConeVerdict is_copositive(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd s = detail::require_symmetric_input(a);
  const int n = static_cast<int>(s.rows());
  if (n > 16)
    throw Error(Errc::DimensionTooLarge,
                "copositivity test enumerates principal submatrices; n <= 16 required");
  const double scale = 1.0 + detail::max_abs(s);
  if (s.minCoeff() >= -1e-12 * scale)
    return {Verdict::Yes, std::nullopt, std::nullopt, "entrywise nonnegative"};
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const double rad = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() >= -1e-9 * (1.0 + rad))
      return {Verdict::Yes, std::nullopt, std::nullopt, "positive semidefinite"};
  }
  const double tol_neg = 1e-10 * scale;
  ConeVerdict result{Verdict::Yes, std::nullopt, std::nullopt,
                     "no principal submatrix has a strictly positive eigenvector with a "
                     "negative eigenvalue"};
  detail::enumerate_subsets_by_size(n, [&](const std::vector<int>& idx) {
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) sub(i, j) = s(idx[i], idx[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    const Eigen::VectorXd& lam = es.eigenvalues();
    int g0 = 0;
    while (g0 < m && lam[g0] < -tol_neg) {
      int g1 = g0;
      while (g1 + 1 < m && lam[g1 + 1] < -tol_neg && lam[g1 + 1] - lam[g1] <= 1e-8 * scale) ++g1;
      std::optional<Eigen::VectorXd> v;
      if (g1 == g0) {
        Eigen::VectorXd cand = es.eigenvectors().col(g0);
        if (cand.maxCoeff() < -cand.minCoeff()) cand = -cand;
        const double mx = cand.cwiseAbs().maxCoeff();
        if (cand.minCoeff() >= -1e-8 * mx) v = cand.cwiseMax(0.0);
      } else {
        v = detail::positive_vector_in_span(es.eigenvectors().middleCols(g0, g1 - g0 + 1));
      }
      if (v) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < m; ++i) w[idx[i]] = (*v)[i];
        w /= w.maxCoeff();
        const double q = w.dot(s * w);
        if (q < -1e-11 * scale * w.squaredNorm()) {
          std::ostringstream os;
          os << "witness w >= 0 with w'Aw = " << q;
          result = {Verdict::No, w, std::nullopt, os.str()};
          return true;
        }
      }
      g0 = g1 + 1;
    }
    return false;
  });
  return result;
}

namespace detail {

/// Cholesky that tolerates zero pivots; returns false when a pivot is
/// materially negative. L is lower triangular.
inline bool semidefinite_cholesky(const Eigen::MatrixXd& a, Eigen::MatrixXd& L) {
  const int n = static_cast<int>(a.rows());
  const double scale = 1.0 + max_abs(a);
  L = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j) - L.row(j).head(j).squaredNorm();
    if (d < -1e-10 * scale) return false;
    if (d <= 1e-14 * scale) {
      L(j, j) = 0.0;
      continue;  // residual check catches a bad zero column
    }
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i)
      L(i, j) = (a(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
  }
  return true;
}

inline bool try_nonneg_cholesky(const Eigen::MatrixXd& t, const std::vector<int>& perm,
                                Eigen::MatrixXd& bout) {
  const int n = static_cast<int>(t.rows());
  const double scale = 1.0 + max_abs(t);
  Eigen::MatrixXd P(n, n);
  P.setZero();
  for (int i = 0; i < n; ++i) P(i, perm[i]) = 1.0;
  const Eigen::MatrixXd tp = P * t * P.transpose();
  Eigen::MatrixXd L;
  if (!semidefinite_cholesky(tp, L)) return false;
  if (L.minCoeff() < -1e-10 * scale) return false;
  Eigen::MatrixXd B = L.cwiseMax(0.0).transpose() * P;
  if ((B.transpose() * B - t).cwiseAbs().maxCoeff() > 1e-10 * scale) return false;
  bout = B;
  return true;
}

/// Symmetric nonnegative factorization search: T ~ H H' with H >= 0,
/// damped multiplicative updates then projected Barzilai-Borwein descent.
inline bool symmetric_nnmf(const Eigen::MatrixXd& t, int m, std::uint64_t seed,
                           Eigen::MatrixXd& hout) {
  const int n = static_cast<int>(t.rows());
  const double tnorm = t.norm();
  const double target = 1e-10 * (1.0 + tnorm);
  RandomStream rs(seed);
  Eigen::MatrixXd H(n, m);
  for (int i = 0; i < n; ++i) {
    const double s = std::sqrt(std::max(t(i, i), 1e-12) / m);
    for (int j = 0; j < m; ++j) H(i, j) = std::abs(rs.normal()) * s;
  }
  const double beta = 0.7;
  for (int iter = 0; iter < 1500; ++iter) {
    const Eigen::MatrixXd TH = t * H;
    const Eigen::MatrixXd HHH = H * (H.transpose() * H);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        const double denom = HHH(i, j) + 1e-300;
        H(i, j) *= (1.0 - beta) + beta * std::max(TH(i, j), 0.0) / denom;
      }
    if (iter % 50 == 0 && (H * H.transpose() - t).norm() <= target) break;
  }
  Eigen::MatrixXd G = 4.0 * (H * H.transpose() - t) * H;
  double alpha = 1e-3 / (1.0 + tnorm);
  Eigen::MatrixXd bestH = H;
  double best = (H * H.transpose() - t).norm();
  for (int iter = 0; iter < 6000; ++iter) {
    Eigen::MatrixXd Hn = (H - alpha * G).cwiseMax(0.0);
    Eigen::MatrixXd Gn = 4.0 * (Hn * Hn.transpose() - t) * Hn;
    const Eigen::MatrixXd S = Hn - H;
    const Eigen::MatrixXd Yd = Gn - G;
    const double sy = (S.array() * Yd.array()).sum();
    const double ss = (S.array() * S.array()).sum();
    alpha = (sy > 1e-300) ? std::clamp(ss / sy, 1e-12, 1e3) : 1e-3 / (1.0 + tnorm);
    H = Hn;
    G = Gn;
    const double res = (H * H.transpose() - t).norm();
    if (res < best) {
      best = res;
      bestH = H;
      if (best <= target) break;
    }
  }
  if (best > 1e-9 * (1.0 + tnorm)) return false;
  hout = bestH;
  return true;
}

inline std::vector<std::vector<int>> factorization_orders(const Eigen::MatrixXd& t) {
  const int n = static_cast<int>(t.rows());
  std::vector<std::vector<int>> orders;
  std::vector<int> id(n);
  for (int i = 0; i < n; ++i) id[i] = i;
  if (n <= 5) {
    std::vector<int> p = id;
    do {
      orders.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
  } else {
    orders.push_back(id);
    std::vector<int> asc = id;
    std::sort(asc.begin(), asc.end(), [&](int a, int b) { return t(a, a) < t(b, b); });
    orders.push_back(asc);
    std::vector<int> desc(asc.rbegin(), asc.rend());
    orders.push_back(desc);
  }
  return orders;
}

}  // namespace detail

/// Complete positivity (A = B'B with B entrywise >= 0). Necessary: doubly
/// nonnegative. For n <= 4 doubly nonnegative is also sufficient, so the
/// verdict is Yes and a factorization is searched for as the witness; for
/// n >= 5 a successful search gives Yes and an unsuccessful one Undetermined.
inline ConeVerdict is_completely_positive(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd s = detail::require_symmetric_input(a);
  const int n = static_cast<int>(s.rows());
  const double scale = 1.0 + detail::max_abs(s);
  int bi = 0, bj = 0;
  const double mn = s.minCoeff(&bi, &bj);
  if (mn < -1e-12 * scale) {
    std::ostringstream os;
    os << "entry (" << bi << ", " << bj << ") = " << mn << " is negative";
    return {Verdict::No, std::nullopt, std::nullopt, os.str()};
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const double rad = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-9 * (1.0 + rad)) {
      Eigen::VectorXd v = es.eigenvectors().col(0);
      detail::canonical_sign(v);
      std::ostringstream os;
      os << "not positive semidefinite (eigenvalue " << es.eigenvalues()[0] << ")";
      return {Verdict::No, v, std::nullopt, os.str()};
    }
  }
  const Eigen::MatrixXd t = s.cwiseMax(0.0);
  Eigen::MatrixXd B;
  for (const auto& perm : detail::factorization_orders(t)) {
    if (detail::try_nonneg_cholesky(t, perm, B))
      return {Verdict::Yes, std::nullopt, B, "nonnegative Cholesky factorization"};
  }
  const int m = n * (n + 1) / 2;
  for (int restart = 0; restart < 8; ++restart) {
    Eigen::MatrixXd H;
    if (detail::symmetric_nnmf(t, m, 0x9e3779b97f4a7c15ull + restart, H)) {
      return {Verdict::Yes, std::nullopt, H.transpose(), "nonnegative factorization found"};
    }
  }
  if (n <= 4)
    return {Verdict::Yes, std::nullopt, std::nullopt,
            "doubly nonnegative with n <= 4 (factorization exists; search did not converge)"};
  return {Verdict::Undetermined, std::nullopt, std::nullopt,
          "doubly nonnegative but no factorization found"};
}

/// Strictly positive vector in the kernel of symmetric A, normalized to
/// minimum entry 1, or nullopt when the kernel contains none.
inline std::optional<Eigen::VectorXd> find_positive_kernel(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd s = detail::require_symmetric_input(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const double rad = es.eigenvalues().cwiseAbs().maxCoeff();
  const double tol = 1e-10 * (1.0 + rad);
  const int n = static_cast<int>(s.rows());
  std::vector<int> cols;
  for (int i = 0; i < n; ++i)
    if (std::abs(es.eigenvalues()[i]) <= tol) cols.push_back(i);
  if (cols.empty()) return std::nullopt;
  Eigen::MatrixXd V(n, static_cast<int>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) V.col(j) = es.eigenvectors().col(cols[j]);
  auto z = detail::positive_vector_in_span(V);
  if (!z) return std::nullopt;
  Eigen::VectorXd out = *z / z->minCoeff();
  return out;
}

}  // namespace ellord
