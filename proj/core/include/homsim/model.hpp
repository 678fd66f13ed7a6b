#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace homsim {

using Complex = std::complex<double>;
using Vec2 = std::array<double, 2>;

inline constexpr double kSpeedOfLight = 2.99792458e8;  // [m/s]

/// Phase-matching constants of the type-II downconversion crystal.
/// The walk-off axis e2 is fixed to +y throughout the library; masks are
/// rotated in configuration space, never the axis.
struct CrystalParams {
  double length = 1.5e-3;        // L, crystal thickness [m]
  double gvd_mismatch = 2.5e-10; // D, ordinary/extraordinary inverse-group-velocity difference [s/m]
  double walkoff = 0.0723;       // M, transverse walk-off slope [dimensionless]
  double pump_wavenumber = 2.0 * M_PI / 405.0e-9;    // k_p [1/m]
  double central_frequency = 2.0 * M_PI * kSpeedOfLight / 810.0e-9; // Omega0 [rad/s]

  double central_wavenumber() const { return central_frequency / kSpeedOfLight; } // k0 = Omega0/c

  // The triangular dip spans [0, D*L] in delay with its minimum at D*L/2.
  double dip_width() const { return gvd_mismatch * length; }
  double dip_center() const { return 0.5 * dip_width(); }

  void validate() const {
    if (!(length > 0.0)) throw std::invalid_argument("CrystalParams: length must be > 0");
    if (!(gvd_mismatch > 0.0)) throw std::invalid_argument("CrystalParams: gvd_mismatch must be > 0");
    if (!(pump_wavenumber > 0.0)) throw std::invalid_argument("CrystalParams: pump_wavenumber must be > 0");
    if (!(central_frequency > 0.0)) throw std::invalid_argument("CrystalParams: central_frequency must be > 0");
  }
};

/// Geometry of the Fourier-transform/modulation stage and the detection arm.
/// lens_to_detector (d2) only contributes a global phase after the detector
/// integrations and never enters a computed rate; it is kept for completeness.
struct OpticalLayout {
  double fourier_focal_length = 0.2;   // f [m]
  double detection_focal_length = 0.05; // f0 [m]
  double modulator_to_aperture = 1.0;  // d1 [m]
  double lens_to_detector = 0.05;      // d2 [m]

  void validate() const {
    if (!(fourier_focal_length > 0.0)) throw std::invalid_argument("OpticalLayout: fourier_focal_length must be > 0");
    if (!(detection_focal_length > 0.0)) throw std::invalid_argument("OpticalLayout: detection_focal_length must be > 0");
    if (!(modulator_to_aperture > 0.0)) throw std::invalid_argument("OpticalLayout: modulator_to_aperture must be > 0");
  }
};

/// Ordered set of interferometer delays to evaluate.
struct DelayScan {
  std::vector<double> tau; // [s], strictly increasing

  static DelayScan uniform(double tau_min, double tau_max, int samples);
  /// Default span [-0.25*DL, 1.25*DL] around the dip.
  static DelayScan around_dip(const CrystalParams& c, int samples);

  void validate() const;
};

/// Rectangle of unit width: 1 on |x| < 1/2, 0 otherwise (including the boundary).
inline double rect(double x) { return std::abs(x) < 0.5 ? 1.0 : 0.0; }

/// Unit triangle: 1 - |x| on |x| <= 1, 0 outside.
inline double triangle(double x) {
  const double a = std::abs(x);
  return a <= 1.0 ? 1.0 - a : 0.0;
}

/// Unnormalized sinc, sin(x)/x with sinc(0) = 1.
inline double sinc(double x) {
  if (std::abs(x) < 1e-8) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
  }
  return std::sin(x) / x;
}

/// Type-II collinear degenerate phase mismatch
///   Delta(q, nu) = -nu*D + M*q_y + 2|q|^2/k_p   [1/m]
/// with the walk-off axis along +y.
inline double phase_mismatch(const CrystalParams& c, const Vec2& q, double nu) {
  const double q2 = q[0] * q[0] + q[1] * q[1];
  return -nu * c.gvd_mismatch + c.walkoff * q[1] + 2.0 * q2 / c.pump_wavenumber;
}

/// Biphoton emission amplitude sinc(L*Delta/2) * exp(i*L*Delta/2); |value| <= 1.
inline Complex biphoton_amplitude(const CrystalParams& c, const Vec2& q, double nu) {
  const double half = 0.5 * c.length * phase_mismatch(c, q, nu);
  return sinc(half) * std::polar(1.0, half);
}

} // namespace homsim
