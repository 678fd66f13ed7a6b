#pragma once

#include <string>
#include <vector>

#include "homsim/apertures.hpp"
#include "homsim/dip_trace.hpp"
#include "homsim/model.hpp"
#include "homsim/zernike.hpp"

namespace homsim {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One optical configuration for which kernels are tabulated. The table can
/// then be reused for any phase mask on the same pixel grid.
struct KernelConfig {
  CrystalParams crystal;
  OpticalLayout layout;
  Aperture aperture_a = Aperture::gaussian(1.0e-3, 'A');
  Aperture aperture_b = Aperture::gaussian(1.0e-3, 'B');
  double pitch = 0.5e-3; // pixel pitch d in the modulation plane [m]
  int half_extent = 3;   // N; pixel indices run in [-N, N]
  DelayScan scan;

  void validate() const;
  /// Canonical text form; any field change changes the hash.
  std::string canonical_string() const;
  std::string hash_hex() const;

  // Derived per-axis constants of the reduced kernel integrals.
  double pixel_momentum_width() const { // W = k0 d / f
    return crystal.central_wavenumber() * pitch / layout.fourier_focal_length;
  }
  double phase_coefficient() const { // g = (k0 d / f)(2 d1 / k_p)
    return pixel_momentum_width() * 2.0 * layout.modulator_to_aperture / crystal.pump_wavenumber;
  }
  double axis_normalization() const { // (k0 d / f) / (pi k_p / (2 d1))
    return pixel_momentum_width() * 2.0 * layout.modulator_to_aperture /
           (M_PI * crystal.pump_wavenumber);
  }
  double delay_phase(double tau) const { // h_tau = (k0 d M / (f D)) tau
    return pixel_momentum_width() * crystal.walkoff * tau / crystal.gvd_mismatch;
  }
};

/// Tabulated kernels: alpha and I assemble the modulation term W_M(tau),
/// r0x/r0y assemble the background R0. All are normalized so the zero-mask
/// background approaches 1 for grids that cover the aperture spectrum.
struct KernelTable {
  KernelConfig config;
  std::string hash; // hex SHA-256 of the canonical config string
  std::vector<Complex> alpha; // (2N+1)^2, row-major (l, lambda)
  std::vector<Complex> i_tensor; // (2N+1)^2 * n_tau, row-major (m, mu, tau)
  std::vector<Complex> r0x, r0y; // (2N+1)^2

  int side() const { return 2 * config.half_extent + 1; }
  std::size_t n_tau() const { return config.scan.tau.size(); }
  Complex alpha_at(int l, int lam) const;
  Complex i_at(int m, int mu, std::size_t tau_index) const;
  Complex r0x_at(int l, int lam) const;
  Complex r0y_at(int m, int mu) const;
};

/// alpha_{l,lambda}: x-axis kernel of the modulation term.
std::vector<Complex> tabulate_alpha(const CrystalParams& c, const OpticalLayout& o,
                                    const Aperture& a, const Aperture& b,
                                    double pitch, int half_extent);

/// I_{m,mu}(tau_k): y-axis kernel of the modulation term.
std::vector<Complex> tabulate_I(const CrystalParams& c, const OpticalLayout& o,
                                const Aperture& a, const Aperture& b,
                                double pitch, int half_extent, const DelayScan& scan);

/// (R^(x), R^(y)): background kernels. The index roles flip relative to
/// alpha: the triangular window depends on l - lambda and the phase on
/// l + lambda.
std::pair<std::vector<Complex>, std::vector<Complex>> tabulate_R0(
    const CrystalParams& c, const OpticalLayout& o, const Aperture& a, const Aperture& b,
    double pitch, int half_extent);

/// Build all four kernels for one configuration.
KernelTable tabulate(const KernelConfig& config);

/// Weighted double sums over the mask phases: returns the normalized trace
/// R(tau)/R0. The mask grid must match the table's pitch and extent.
DipTrace assemble(const KernelTable& table, const PhaseMask& mask);

/// Large-aperture closed form (delta-limit kernels): only the differences
/// phi_{l,m} - phi_{-l,-m} enter. O(N^2) per delay.
DipTrace assemble_big(const CrystalParams& c, const OpticalLayout& o,
                      const PhaseMask& mask, const DelayScan& scan);

/// Diagnostic ratio |alpha_01|^2 / |alpha_00|^2 for apertures A = B = a.
double rho0(const CrystalParams& c, const OpticalLayout& o, const Aperture& a, double pitch);

/// Binary kernel cache ("HOMK"): magic, version, config hash, config fields,
/// dimensions, then little-endian complex doubles.
void save_table(const KernelTable& table, const std::string& path);
KernelTable load_table(const std::string& path);
/// Loads and verifies the stored hash against `expected`; throws on mismatch.
KernelTable load_table(const std::string& path, const KernelConfig& expected);

} // namespace homsim
