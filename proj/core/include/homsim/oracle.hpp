#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "homsim/apertures.hpp"
#include "homsim/dip_trace.hpp"
#include "homsim/model.hpp"
#include "homsim/zernike.hpp"

namespace homsim {

/// Brute-force evaluation of the exact double-momentum integrals, used to
/// validate the kernel method and the analytic limits. Deliberately simple:
/// fixed-order tensor quadrature, no adaptivity. The momentum pair (q, q') is
/// integrated in the rotated coordinates u = q + q', v = q - q' (Jacobian
/// 1/4), which keeps the aperture-spectrum window on a single coordinate.
struct OracleOptions {
  // Cartesian paths (pixel masks): orders per axis.
  int window_order = 32; // coordinate carrying the aperture-spectrum window
  int wide_order = 64;   // the other coordinate
  // Polar path (smooth masks over a disk).
  int window_radial = 16;
  int window_angular = 32;
  int wide_radial = 48;
  int wide_angular = 96;
  // Pixel-block path: Gauss order per sub-panel and the phase budget that
  // sets the sub-panel count.
  int block_order = 16;
  double max_panel_phase = 8.0; // [rad]
  // Effective-point budget; exceeding it is an error.
  double budget = 256.0 * 256.0 * 256.0 * 256.0;

  OracleOptions scaled(double factor) const; // scale all orders (convergence studies)
};

/// Per-axis Gauss-Legendre nodes/weights for the four momentum axes plus the
/// truncation radius of the wide coordinate. Built from OracleOptions by the
/// individual paths; exposed for tests that inspect the grids.
struct QuadratureGrid {
  std::vector<double> nodes_x, weights_x;   // window coordinate, per axis
  std::vector<double> nodes_y, weights_y;
  std::vector<double> nodes_px, weights_px; // wide coordinate, per axis
  std::vector<double> nodes_py, weights_py;
  double truncation_radius = 0.0;
};

/// Modulation of arm 1 (G2 is identically 1): either a pixel mask or a smooth
/// Zernike phase over a disk.
using Modulation = std::variant<PhaseMask, ZernikeSpec>;

/// W_M(tau): the modulation term of the coincidence rate, normalized so the
/// unmodulated background equals P~_A(0) P~_B(0) = 1.
Complex direct_W(const CrystalParams& c, const OpticalLayout& o,
                 const Aperture& a, const Aperture& b, const Modulation& mask,
                 double tau, const OracleOptions& opt = {});

/// R0: the background term, same normalization.
Complex direct_R0(const CrystalParams& c, const OpticalLayout& o,
                  const Aperture& a, const Aperture& b, const Modulation& mask,
                  const OracleOptions& opt = {});

/// Full normalized trace over a scan; equivalent to per-tau direct_W calls
/// but amortizes the modulation sampling across delays.
DipTrace oracle_trace(const CrystalParams& c, const OpticalLayout& o,
                      const Aperture& a, const Aperture& b, const Modulation& mask,
                      const DelayScan& scan, const OracleOptions& opt = {});

/// Product-form fast path for separable configurations: both apertures
/// Gaussian and G(x, y) = gx(x) * gy(y) over the square |x|,|y| <= half_size.
/// Returns the same normalized W_M(tau).
Complex direct_W_separable(const CrystalParams& c, const OpticalLayout& o,
                           const Aperture& a, const Aperture& b,
                           const std::function<Complex(double)>& gx,
                           const std::function<Complex(double)>& gy,
                           double half_size, double tau, const OracleOptions& opt = {});

/// Non-factored 4-D tensor evaluation over the same square domain, for
/// validating the separable path.
Complex direct_W_square(const CrystalParams& c, const OpticalLayout& o,
                        const Aperture& a, const Aperture& b,
                        const std::function<Complex(double, double)>& g,
                        double half_size, double tau, const OracleOptions& opt = {});

/// A disjoint collection of pixel index sets over a grid of the given pitch.
struct PixelPartition {
  double pitch = 1.0;
  std::vector<std::vector<std::pair<int, int>>> sets;
};

/// Evaluates both sides of the disjoint-characteristic-function identity
///   exp(i sum_k phi_k chi_k(x)) = sum_k exp(i phi_k) chi_k(x)
/// at each sample and returns the maximum absolute deviation. Overlapping
/// sets or uncovered samples violate the preconditions and throw.
double charfun_identity_check(const std::vector<double>& phases,
                              const PixelPartition& partition,
                              const std::vector<Vec2>& samples);

} // namespace homsim
