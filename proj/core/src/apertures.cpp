#include "homsim/apertures.hpp"

namespace homsim {

namespace {

double j1_series(double x) {
  // sum_k (-1)^k / (k! (k+1)!) (x/2)^{2k+1}, converged well before 40 terms
  // for |x| <= 12.
  const double h = 0.5 * x;
  const double h2 = h * h;
  double term = h;
  double sum = h;
  for (int k = 1; k < 40; ++k) {
    term *= -h2 / (static_cast<double>(k) * (k + 1.0));
    sum += term;
  }
  return sum;
}

double j1_asymptotic(double x) {
  // Hankel expansion J1(x) ~ sqrt(2/(pi x)) [P cos(chi) - Q sin(chi)],
  // chi = x - 3pi/4, with the exact coefficients
  // a_k = (4-1)(4-9)...(4-(2k-1)^2) / (k! 8^k). Truncated after a_7; the
  // first dropped term at x = 12 is ~4e-9 absolute.
  static const double a1 = 3.0 / 8.0;
  static const double a2 = -15.0 / 128.0;
  static const double a3 = 315.0 / 3072.0;
  static const double a4 = -14175.0 / 98304.0;
  static const double a5 = 1091475.0 / 3932160.0;
  static const double a6 = -127702575.0 / 188743680.0;
  static const double a7 = 21070924875.0 / 10569646080.0;
  const double ax = std::abs(x);
  const double ix = 1.0 / ax;
  const double ix2 = ix * ix;
  const double p = 1.0 + ix2 * (-a2 + ix2 * (a4 + ix2 * (-a6)));
  const double q = ix * (a1 + ix2 * (-a3 + ix2 * (a5 + ix2 * (-a7))));
  const double chi = ax - 2.356194490192345;
  const double v = std::sqrt(2.0 / (M_PI * ax)) * (p * std::cos(chi) - q * std::sin(chi));
  return x < 0.0 ? -v : v;
}

} // namespace

double bessel_j1(double x) {
  return std::abs(x) <= 12.0 ? j1_series(x) : j1_asymptotic(x);
}

double p_tilde(const Aperture& a, double q_abs) {
  const double q = std::abs(q_abs);
  switch (a.kind) {
    case ApertureKind::Gaussian:
      return std::exp(-0.25 * a.radius * a.radius * q * q);
    case ApertureKind::HardCircle: {
      const double t = a.radius * q;
      if (t < 1e-6) {
        // J1(2t)/t = 1 - t^2/2 + t^4/12 - ...
        return 1.0 - 0.5 * t * t;
      }
      return bessel_j1(2.0 * t) / t;
    }
  }
  return 0.0;
}

double q_tilde_real(const Aperture& a, double q_abs) {
  const double q = std::abs(q_abs);
  switch (a.kind) {
    case ApertureKind::Gaussian:
      // p(x) = exp(-|x|^2 / 2 R_G^2)  ->  exp(-R_G^2 |q|^2 / 2), unit peak.
      return std::exp(-0.5 * a.radius * a.radius * q * q);
    case ApertureKind::HardCircle: {
      // Same functional form as p_tilde: |p|^2 = p for a hard pupil.
      return p_tilde(a, q);
    }
  }
  return 0.0;
}

double p_tilde_support(const Aperture& a) {
  switch (a.kind) {
    case ApertureKind::Gaussian:
      // exp(-R^2 q^2/4) = 1e-12  ->  q = 2 sqrt(ln 1e12) / R
      return 2.0 * std::sqrt(std::log(1e12)) / a.radius;
    case ApertureKind::HardCircle:
      // 40th positive zero of J1 is near (40 + 1/4) pi; argument is 2 R q.
      return (40.25 * M_PI) / (2.0 * a.radius);
  }
  return 0.0;
}

} // namespace homsim
