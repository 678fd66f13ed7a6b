#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "homsim/model.hpp"

namespace homsim {

/// Bessel function of the first kind J1, computed in-repo: ascending series
/// for |x| <= 12, Hankel asymptotic expansion beyond. Absolute accuracy is
/// about 1e-12 on the series branch and 1e-9 on the asymptotic branch.
double bessel_j1(double x);

enum class ApertureKind { Gaussian, HardCircle };

/// Detection pupil in front of one interferometer arm. The radius is the
/// Gaussian 1/e amplitude radius R_G or the hard-edge radius R.
struct Aperture {
  ApertureKind kind = ApertureKind::Gaussian;
  double radius = 1.0e-3; // [m]
  char label = 'A';

  static Aperture gaussian(double r_g, char label = 'A') { return {ApertureKind::Gaussian, r_g, label}; }
  static Aperture circular(double r, char label = 'A') { return {ApertureKind::HardCircle, r, label}; }

  void validate() const {
    if (!(radius > 0.0)) throw std::invalid_argument("Aperture: radius must be > 0");
  }
};

/// Momentum transform of the pupil intensity |p(x)|^2, normalized so that
/// p_tilde(0) = 1. Gaussian: exp(-R_G^2 |q|^2 / 4); hard circle:
/// J1(2R|q|)/(R|q|) with the removable q = 0 singularity handled analytically.
double p_tilde(const Aperture& a, double q_abs);
inline double p_tilde(const Aperture& a, const Vec2& q) {
  return p_tilde(a, std::hypot(q[0], q[1]));
}

/// Momentum transform of the pupil amplitude p(x) itself (not |p|^2),
/// normalized so q_tilde(0) = 1. Real for the symmetric pupils supported
/// here; returned as Complex to match the operation contract.
double q_tilde_real(const Aperture& a, double q_abs);
inline Complex q_tilde(const Aperture& a, const Vec2& q) {
  return {q_tilde_real(a, std::hypot(q[0], q[1])), 0.0};
}

/// Gaussian radius that mimics a hard circular aperture of radius R:
/// R_G = R / (2*sqrt(2)).
inline double gaussian_equivalent(double r_circ) {
  if (!(r_circ > 0.0)) throw std::invalid_argument("gaussian_equivalent: radius must be > 0");
  return r_circ / (2.0 * std::sqrt(2.0));
}

/// Radius in |q| beyond which |p_tilde| stays below ~1e-12 (Gaussian) or the
/// first 40 Bessel lobes have passed (hard circle). Used to truncate kernel
/// integrals.
double p_tilde_support(const Aperture& a);

} // namespace homsim
