#pragma once

#include <cmath>
#include <vector>

#include "ellord/error.hpp"

namespace ellord {

enum class RadialFamily { Normal, StudentT, RadialDiscrete };

/// One atom of a discrete radial law: P(R = r) = w.
struct RadialAtom {
  double r;
  double w;
};

/// Radial generating law of an elliptical distribution.
///
/// The law of the nonnegative radius R in the stochastic representation
/// X = mu + R * A' * U, with A'A = Sigma and U uniform on the unit sphere.
/// Normal and StudentT scale with the dimension they are used in; a discrete
/// law fixes R outright.
class GeneratorSpec {
 public:
  static GeneratorSpec normal() { return GeneratorSpec(RadialFamily::Normal, 0.0, {}); }

  /// Degrees of freedom nu > 2 so that the second moment is finite.
  static GeneratorSpec student_t(double nu) {
    if (!(nu > 2.0) || !std::isfinite(nu))
      throw Error(Errc::BadGeneratorParameter, "student_t requires nu > 2, got " + std::to_string(nu));
    return GeneratorSpec(RadialFamily::StudentT, nu, {});
  }

  /// Atoms (r_i, w_i) with r_i >= 0, w_i > 0, sum of weights equal to 1.
  static GeneratorSpec radial_discrete(std::vector<RadialAtom> atoms) {
    if (atoms.empty())
      throw Error(Errc::BadGeneratorParameter, "radial_discrete requires at least one atom");
    double total = 0.0;
    for (const auto& a : atoms) {
      if (!(a.r >= 0.0) || !std::isfinite(a.r))
        throw Error(Errc::BadGeneratorParameter, "atom radius must be finite and >= 0");
      if (!(a.w > 0.0) || !std::isfinite(a.w))
        throw Error(Errc::BadGeneratorParameter, "atom weight must be finite and > 0");
      total += a.w;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw Error(Errc::BadGeneratorParameter,
                  "atom weights must sum to 1, got " + std::to_string(total));
    double m2 = 0.0;
    for (const auto& a : atoms) m2 += a.w * a.r * a.r;
    if (!(m2 > 0.0))
      throw Error(Errc::BadGeneratorParameter,
                  "radial law must have positive second moment; all atoms sit at 0");
    return GeneratorSpec(RadialFamily::RadialDiscrete, 0.0, std::move(atoms));
  }

  RadialFamily family() const { return family_; }
  double nu() const { return nu_; }
  const std::vector<RadialAtom>& atoms() const { return atoms_; }

  /// E(R^2) for the radial law used in dimension n.
  double second_moment(int n) const {
    require_dim(n);
    switch (family_) {
      case RadialFamily::Normal: return static_cast<double>(n);
      case RadialFamily::StudentT: return static_cast<double>(n) * nu_ / (nu_ - 2.0);
      case RadialFamily::RadialDiscrete: {
        double s = 0.0;
        for (const auto& a : atoms_) s += a.w * a.r * a.r;
        return s;
      }
    }
    return 0.0;
  }

  /// Derivative of the characteristic generator at 0; equals -E(R^2)/(2n).
  double phi_prime_zero(int n) const { return -second_moment(n) / (2.0 * n); }

  /// Whether the distribution charges all of R^n (needed by the usual and
  /// orthant-type orders).
  bool unbounded_support() const { return family_ != RadialFamily::RadialDiscrete; }

  friend bool operator==(const GeneratorSpec& a, const GeneratorSpec& b) {
    if (a.family_ != b.family_) return false;
    switch (a.family_) {
      case RadialFamily::Normal: return true;
      case RadialFamily::StudentT: return a.nu_ == b.nu_;
      case RadialFamily::RadialDiscrete: {
        if (a.atoms_.size() != b.atoms_.size()) return false;
        for (std::size_t i = 0; i < a.atoms_.size(); ++i)
          if (a.atoms_[i].r != b.atoms_[i].r || a.atoms_[i].w != b.atoms_[i].w) return false;
        return true;
      }
    }
    return false;
  }
  friend bool operator!=(const GeneratorSpec& a, const GeneratorSpec& b) { return !(a == b); }

 private:
  GeneratorSpec(RadialFamily f, double nu, std::vector<RadialAtom> atoms)
      : family_(f), nu_(nu), atoms_(std::move(atoms)) {}

  static void require_dim(int n) {
    if (n < 1) throw Error(Errc::NonPositiveParameter, "dimension must be >= 1");
  }

  RadialFamily family_;
  double nu_;
  std::vector<RadialAtom> atoms_;
};

inline const char* family_name(RadialFamily f) {
  switch (f) {
    case RadialFamily::Normal: return "normal";
    case RadialFamily::StudentT: return "student_t";
    case RadialFamily::RadialDiscrete: return "radial_discrete";
  }
  return "?";
}

}  // namespace ellord
