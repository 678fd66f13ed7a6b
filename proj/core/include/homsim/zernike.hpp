#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "homsim/model.hpp"

namespace homsim {

/// One Zernike mode: radial order n >= 0, azimuthal order m with |m| <= n and
/// n - |m| even, coefficient in radians.
struct ZernikeTerm {
  int n = 0;
  int m = 0;
  double coeff = 0.0; // [rad]
};

/// Phase profile over a circular modulator aperture, synthesized as
/// sum phi_nm R_n^|m|(rho) cos(m theta) with rho = |x| / unit_radius.
/// Negative m uses cos(m theta) exactly as well (cos is even in m);
/// sin_for_negative_m switches the negative-m terms to the conventional
/// sin(|m| theta) branch. The parity split is unaffected by that choice.
struct ZernikeSpec {
  std::vector<ZernikeTerm> terms;
  double unit_radius = 1.0e-3; // physical modulator radius [m]
  bool sin_for_negative_m = false;

  ZernikeSpec& add(int n, int m, double coeff);
  void validate() const;
  bool empty() const { return terms.empty(); }
};

/// Standard (unit-amplitude) Zernike radial polynomial R_n^m(rho).
/// Throws on invalid (n, m).
double radial_poly(int n, int m, double rho);

/// Phase [rad] at modulator-plane point x. Points with |x| > unit_radius are
/// evaluated by polynomial continuation; callers apply the aperture mask.
double evaluate_phase(const ZernikeSpec& z, const Vec2& x);

/// Split into (even-m, odd-m) parts; the union reproduces the input.
std::pair<ZernikeSpec, ZernikeSpec> parity_split(const ZernikeSpec& z);

/// phi(q) - phi(-q); equals twice the odd-m synthesis.
double antisymmetric_part(const ZernikeSpec& z, const Vec2& q);

/// How pixels that straddle the aperture rim are treated when pixelizing.
enum class StraddlePolicy {
  Exclude,      // straddling pixels transmit nothing (default)
  AreaFraction, // average phase over the inside part, transmit the area fraction
};

/// Square-pixel phase mask: pixel (l, m) is centered at (l*d, m*d),
/// l, m in [-N, N]. transmission is 1 inside the aperture, 0 outside,
/// and the covered-area fraction for straddling pixels under
/// StraddlePolicy::AreaFraction.
struct PhaseMask {
  double pitch = 0.0; // d [m]
  int half_extent = 0; // N
  std::vector<double> phase;        // (2N+1)^2, row-major in (l, m)
  std::vector<double> transmission; // same layout, values in [0, 1]

  int side() const { return 2 * half_extent + 1; }
  std::size_t index(int l, int m) const {
    return static_cast<std::size_t>(l + half_extent) * static_cast<std::size_t>(side()) +
           static_cast<std::size_t>(m + half_extent);
  }
  double& phi(int l, int m) { return phase[index(l, m)]; }
  double phi(int l, int m) const { return phase[index(l, m)]; }
  double& transmit(int l, int m) { return transmission[index(l, m)]; }
  double transmit(int l, int m) const { return transmission[index(l, m)]; }

  static PhaseMask zeros(double pitch, int half_extent);
  void validate() const;
};

/// Average the spec's phase over every pixel of a (2N+1)^2 grid of pitch d by
/// tensor Gauss-Legendre quadrature of the given order per axis.
PhaseMask pixelize(const ZernikeSpec& z, double pitch, int half_extent,
                   int quadrature_order = 8,
                   StraddlePolicy policy = StraddlePolicy::Exclude);

/// Pixelize an arbitrary smooth phase function over a square grid with no
/// aperture masking (used for linear tilts on full-field mirrors).
PhaseMask pixelize_function(const std::function<double(double, double)>& phi,
                            double pitch, int half_extent, int quadrature_order = 8);

/// Plain-text grid round-trip: header (pitch, N), then (2N+1)^2 rows of
/// l, m, phi_lm, transmission at 17 significant digits.
void save_mask(const PhaseMask& mask, const std::string& path);
PhaseMask load_mask(const std::string& path);

} // namespace homsim
