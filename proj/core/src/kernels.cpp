#include "homsim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "homsim/parallel.hpp"
#include "homsim/quadrature.hpp"

namespace homsim {

std::string sha256_hex(const std::string& data); // config_hash.cpp

void KernelConfig::validate() const {
  crystal.validate();
  layout.validate();
  aperture_a.validate();
  aperture_b.validate();
  if (!(pitch > 0.0)) throw std::invalid_argument("KernelConfig: pitch must be > 0");
  if (half_extent < 0) throw std::invalid_argument("KernelConfig: half_extent must be >= 0");
  scan.validate();
}

std::string KernelConfig::canonical_string() const {
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  auto ap = [&num](const Aperture& a) {
    return std::string(a.kind == ApertureKind::Gaussian ? "g" : "c") + ":" + num(a.radius);
  };
  std::ostringstream s;
  s << "homsim-kernel-config-v1"
    << "|L=" << num(crystal.length) << "|D=" << num(crystal.gvd_mismatch)
    << "|M=" << num(crystal.walkoff) << "|kp=" << num(crystal.pump_wavenumber)
    << "|Om=" << num(crystal.central_frequency)
    << "|f=" << num(layout.fourier_focal_length) << "|f0=" << num(layout.detection_focal_length)
    << "|d1=" << num(layout.modulator_to_aperture) << "|d2=" << num(layout.lens_to_detector)
    << "|apA=" << ap(aperture_a) << "|apB=" << ap(aperture_b)
    << "|d=" << num(pitch) << "|N=" << half_extent << "|scan=";
  for (std::size_t i = 0; i < scan.tau.size(); ++i) {
    if (i) s << ",";
    s << num(scan.tau[i]);
  }
  return s.str();
}

std::string KernelConfig::hash_hex() const { return sha256_hex(canonical_string()); }

Complex KernelTable::alpha_at(int l, int lam) const {
  const int n = config.half_extent;
  return alpha[static_cast<std::size_t>(l + n) * side() + static_cast<std::size_t>(lam + n)];
}
Complex KernelTable::i_at(int m, int mu, std::size_t tau_index) const {
  const int n = config.half_extent;
  const std::size_t pair =
      static_cast<std::size_t>(m + n) * side() + static_cast<std::size_t>(mu + n);
  return i_tensor[pair * n_tau() + tau_index];
}
Complex KernelTable::r0x_at(int l, int lam) const {
  const int n = config.half_extent;
  return r0x[static_cast<std::size_t>(l + n) * side() + static_cast<std::size_t>(lam + n)];
}
Complex KernelTable::r0y_at(int m, int mu) const {
  const int n = config.half_extent;
  return r0y[static_cast<std::size_t>(m + n) * side() + static_cast<std::size_t>(mu + n)];
}

namespace {

// Shared constants of the per-axis reduced kernel integrals
//   F(s, j)      = norm Int du P~A(u)P~B(u) T_s(u) sinc(g u T_s(u)) e^{i g j u}
//   I(s, j, tau) = norm Int du P~A P~B T_s sinc(M L u Lam_tau)
//                       sinc((g u + h_tau) T_s) e^{i (g u + h_tau) j}
//   Y(s, j)      = norm Int du P~A P~B T_s sinc(M L u) sinc(g u T_s)
//                       e^{i (g j - M L / 2) u}
// with T_s(u) = triangle(u / W - s). alpha uses F with (s, j) = (l+lam, l-lam);
// R^(x) uses the same F with the roles flipped; R^(y) is Y with
// (s, j) = (m-mu, m+mu).
struct AxisContext {
  const Aperture* ap_a;
  const Aperture* ap_b;
  double w;     // pixel momentum width W
  double g;     // phase/sinc coefficient
  double norm;  // per-axis normalization
  double u_max; // aperture-spectrum truncation
  double ml;    // M * L
  double abs_floor;
  double rel_tol = 1e-6;
};

AxisContext make_axis_context(const CrystalParams& c, const OpticalLayout& o,
                              const Aperture& a, const Aperture& b, double pitch) {
  KernelConfig tmp;
  tmp.crystal = c;
  tmp.layout = o;
  tmp.pitch = pitch;
  AxisContext ctx;
  ctx.ap_a = &a;
  ctx.ap_b = &b;
  ctx.w = tmp.pixel_momentum_width();
  ctx.g = tmp.phase_coefficient();
  ctx.norm = tmp.axis_normalization();
  ctx.u_max = std::min(p_tilde_support(a), p_tilde_support(b));
  ctx.ml = c.walkoff * c.length;
  // Scale of the largest kernel entry, for the absolute convergence floor.
  const double lim = std::min(ctx.u_max, ctx.w);
  const double scale = gauss_integrate(
      [&](double u) { return p_tilde(a, u) * p_tilde(b, u); }, -lim, lim, 64);
  ctx.abs_floor = 1e-13 * std::max(scale, 1e-300);
  return ctx;
}

enum class Family { Mod, BgY };

Complex axis_kernel(const AxisContext& ctx, Family fam, int s, int j,
                    double lambda_tau, double h_tau) {
  const double lo = std::max(ctx.w * (s - 1), -ctx.u_max);
  const double hi = std::min(ctx.w * (s + 1), ctx.u_max);
  if (!(hi > lo)) return {0.0, 0.0};
  std::vector<double> edges{lo};
  const double kink = ctx.w * s;
  if (kink > lo && kink < hi) edges.push_back(kink);
  edges.push_back(hi);

  const auto integrand = [&](double u) -> Complex {
    const double win = triangle(u / ctx.w - s);
    if (win <= 0.0) return {0.0, 0.0};
    const double pab = p_tilde(*ctx.ap_a, u) * p_tilde(*ctx.ap_b, u);
    double mag = pab * win;
    double phase;
    if (fam == Family::Mod) {
      const double beta = ctx.g * u + h_tau;
      mag *= sinc(ctx.ml * u * lambda_tau) * sinc(beta * win);
      phase = beta * j;
    } else {
      mag *= sinc(ctx.ml * u) * sinc(ctx.g * u * win);
      phase = ctx.g * u * j - 0.5 * ctx.ml * u;
    }
    return std::polar(mag, phase);
  };

  std::ostringstream label;
  label << "axis kernel s=" << s << " j=" << j;
  const Complex v =
      escalated_integral(integrand, edges, ctx.rel_tol, ctx.abs_floor, label.str());
  return ctx.norm * v;
}

// F(s, j): modulation family with Lambda_tau = 0 (the tau sinc collapses to 1
// only through lambda_tau = 0 paired with h_tau = 0).
Complex f_kernel(const AxisContext& ctx, int s, int j) {
  return axis_kernel(ctx, Family::Mod, s, j, 0.0, 0.0);
}

struct Key {
  int s;
  int j;
  bool operator<(const Key& o) const { return s != o.s ? s < o.s : j < o.j; }
};

int max_window(const AxisContext& ctx) {
  return static_cast<int>(std::floor(ctx.u_max / ctx.w)) + 1;
}

void rethrow_with_indices(const std::exception& e, int s, int j) {
  const int l = (s + j) / 2;
  const int lam = (s - j) / 2;
  std::ostringstream msg;
  msg << e.what() << " [indices s=" << s << " j=" << j << ", e.g. (l,lambda)=(" << l << ","
      << lam << ")]";
  throw NumericalError(msg.str());
}

// Dense (l, lambda) matrix of the F family with the given index roles.
// window(l, lam) and phase(l, lam) select s and j.
std::vector<Complex> f_matrix(const AxisContext& ctx, int half_extent, bool window_is_sum) {
  const int side = 2 * half_extent + 1;
  const int wmax = max_window(ctx);
  // Unique canonical keys (|s|, |j|); sign flips conjugate the value.
  std::map<Key, std::size_t> slot;
  std::vector<Key> keys;
  for (int s = 0; s <= std::min(2 * half_extent, wmax); ++s)
    for (int j = (s % 2); j <= 2 * half_extent; j += 2) {
      Key k{s, j};
      if (!slot.count(k)) {
        slot[k] = keys.size();
        keys.push_back(k);
      }
    }
  std::vector<Complex> values(keys.size());
  parallel_for(keys.size(), [&](std::size_t i) {
    try {
      values[i] = f_kernel(ctx, keys[i].s, keys[i].j);
    } catch (const QuadratureError& e) {
      rethrow_with_indices(e, keys[i].s, keys[i].j);
    }
  });
  std::vector<Complex> out(static_cast<std::size_t>(side) * side, Complex{0.0, 0.0});
  for (int l = -half_extent; l <= half_extent; ++l)
    for (int lam = -half_extent; lam <= half_extent; ++lam) {
      const int s = window_is_sum ? l + lam : l - lam;
      const int j = window_is_sum ? l - lam : l + lam;
      if (std::abs(s) > wmax) continue; // identically zero: empty support
      Complex v{0.0, 0.0};
      const auto it = slot.find(Key{std::abs(s), std::abs(j)});
      if (it != slot.end()) v = values[it->second];
      const bool conj = (s < 0) != (j < 0);
      out[static_cast<std::size_t>(l + half_extent) * side +
          static_cast<std::size_t>(lam + half_extent)] = conj ? std::conj(v) : v;
    }
  return out;
}

} // namespace

std::vector<Complex> tabulate_alpha(const CrystalParams& c, const OpticalLayout& o,
                                    const Aperture& a, const Aperture& b,
                                    double pitch, int half_extent) {
  const AxisContext ctx = make_axis_context(c, o, a, b, pitch);
  return f_matrix(ctx, half_extent, /*window_is_sum=*/true);
}

std::pair<std::vector<Complex>, std::vector<Complex>> tabulate_R0(
    const CrystalParams& c, const OpticalLayout& o, const Aperture& a, const Aperture& b,
    double pitch, int half_extent) {
  const AxisContext ctx = make_axis_context(c, o, a, b, pitch);
  std::vector<Complex> r0x = f_matrix(ctx, half_extent, /*window_is_sum=*/false);

  const int side = 2 * half_extent + 1;
  const int wmax = max_window(ctx);
  // R^(y): canonical keys (|s|, j); an s flip conjugates.
  std::map<Key, std::size_t> slot;
  std::vector<Key> keys;
  for (int s = 0; s <= std::min(2 * half_extent, wmax); ++s)
    for (int j = -2 * half_extent + ((2 * half_extent + s) % 2); j <= 2 * half_extent; j += 2) {
      Key k{s, j};
      if (!slot.count(k)) {
        slot[k] = keys.size();
        keys.push_back(k);
      }
    }
  std::vector<Complex> values(keys.size());
  parallel_for(keys.size(), [&](std::size_t i) {
    try {
      values[i] = axis_kernel(ctx, Family::BgY, keys[i].s, keys[i].j, 0.0, 0.0);
    } catch (const QuadratureError& e) {
      rethrow_with_indices(e, keys[i].s, keys[i].j);
    }
  });
  std::vector<Complex> r0y(static_cast<std::size_t>(side) * side, Complex{0.0, 0.0});
  for (int m = -half_extent; m <= half_extent; ++m)
    for (int mu = -half_extent; mu <= half_extent; ++mu) {
      const int s = m - mu;
      const int j = m + mu;
      if (std::abs(s) > wmax) continue;
      const auto it = slot.find(Key{std::abs(s), j});
      if (it == slot.end()) continue;
      const Complex v = values[it->second];
      r0y[static_cast<std::size_t>(m + half_extent) * side +
          static_cast<std::size_t>(mu + half_extent)] = (s < 0) ? std::conj(v) : v;
    }
  return {std::move(r0x), std::move(r0y)};
}

std::vector<Complex> tabulate_I(const CrystalParams& c, const OpticalLayout& o,
                                const Aperture& a, const Aperture& b,
                                double pitch, int half_extent, const DelayScan& scan) {
  scan.validate();
  const AxisContext ctx = make_axis_context(c, o, a, b, pitch);
  const int side = 2 * half_extent + 1;
  const std::size_t ntau = scan.tau.size();
  const int wmax = max_window(ctx);
  const double dl = c.dip_width();

  KernelConfig tmp;
  tmp.crystal = c;
  tmp.layout = o;
  tmp.pitch = pitch;

  // Canonical keys (s, |j|); a j flip conjugates. No symmetry in s: the
  // delay offset h_tau breaks u -> -u.
  std::map<Key, std::size_t> slot;
  std::vector<Key> keys;
  for (int s = -std::min(2 * half_extent, wmax); s <= std::min(2 * half_extent, wmax); ++s)
    for (int j = std::abs(s) % 2; j <= 2 * half_extent; j += 2) {
      Key k{s, j};
      if (!slot.count(k)) {
        slot[k] = keys.size();
        keys.push_back(k);
      }
    }
  std::vector<Complex> values(keys.size() * ntau);
  parallel_for(keys.size(), [&](std::size_t i) {
    for (std::size_t k = 0; k < ntau; ++k) {
      const double tau = scan.tau[k];
      const double lt = triangle(1.0 - 2.0 * tau / dl);
      const double h = tmp.delay_phase(tau);
      try {
        values[i * ntau + k] = axis_kernel(ctx, Family::Mod, keys[i].s, keys[i].j, lt, h);
      } catch (const QuadratureError& e) {
        rethrow_with_indices(e, keys[i].s, keys[i].j);
      }
    }
  });

  std::vector<Complex> out(static_cast<std::size_t>(side) * side * ntau, Complex{0.0, 0.0});
  for (int m = -half_extent; m <= half_extent; ++m)
    for (int mu = -half_extent; mu <= half_extent; ++mu) {
      const int s = m + mu;
      const int j = m - mu;
      if (std::abs(s) > wmax) continue;
      const auto it = slot.find(Key{s, std::abs(j)});
      if (it == slot.end()) continue;
      const std::size_t src = it->second * ntau;
      const std::size_t dst =
          (static_cast<std::size_t>(m + half_extent) * side +
           static_cast<std::size_t>(mu + half_extent)) * ntau;
      for (std::size_t k = 0; k < ntau; ++k)
        out[dst + k] = (j < 0) ? std::conj(values[src + k]) : values[src + k];
    }
  return out;
}

KernelTable tabulate(const KernelConfig& config) {
  config.validate();
  KernelTable t;
  t.config = config;
  t.hash = config.hash_hex();
  t.alpha = tabulate_alpha(config.crystal, config.layout, config.aperture_a, config.aperture_b,
                           config.pitch, config.half_extent);
  t.i_tensor = tabulate_I(config.crystal, config.layout, config.aperture_a, config.aperture_b,
                          config.pitch, config.half_extent, config.scan);
  auto bg = tabulate_R0(config.crystal, config.layout, config.aperture_a, config.aperture_b,
                        config.pitch, config.half_extent);
  t.r0x = std::move(bg.first);
  t.r0y = std::move(bg.second);
  return t;
}

namespace {

// sum_{l,lam} X_{l,lam} (A Y A^H)_{l,lam} with A_{l,m} = t_{l,m} e^{-i phi_{l,m}}.
Complex bilinear_sum(const std::vector<Complex>& x, const Complex* y, int side,
                     const std::vector<Complex>& a) {
  const std::size_t n = static_cast<std::size_t>(side);
  std::vector<Complex> t(n * n, Complex{0.0, 0.0});
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t m = 0; m < n; ++m) {
      const Complex alm = a[l * n + m];
      if (alm == Complex{0.0, 0.0}) continue;
      const Complex* row = y + m * n;
      Complex* out = t.data() + l * n;
      for (std::size_t mu = 0; mu < n; ++mu) out[mu] += alm * row[mu];
    }
  Complex acc{0.0, 0.0};
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t lam = 0; lam < n; ++lam) {
      Complex u{0.0, 0.0};
      const Complex* trow = t.data() + l * n;
      const Complex* arow = a.data() + lam * n;
      for (std::size_t mu = 0; mu < n; ++mu) u += trow[mu] * std::conj(arow[mu]);
      acc += x[l * n + lam] * u;
    }
  return acc;
}

std::vector<Complex> mask_matrix(const PhaseMask& mask) {
  const int side = mask.side();
  std::vector<Complex> a(static_cast<std::size_t>(side) * side);
  for (int l = -mask.half_extent; l <= mask.half_extent; ++l)
    for (int m = -mask.half_extent; m <= mask.half_extent; ++m)
      a[mask.index(l, m)] = mask.transmit(l, m) * std::polar(1.0, -mask.phi(l, m));
  return a;
}

// I tensor slice (m, mu) contiguous per tau requires a transposed view; build
// per-tau dense matrices once here.
std::vector<Complex> i_slice(const KernelTable& table, std::size_t k) {
  const int side = table.side();
  const std::size_t ntau = table.n_tau();
  std::vector<Complex> y(static_cast<std::size_t>(side) * side);
  for (std::size_t p = 0; p < y.size(); ++p) y[p] = table.i_tensor[p * ntau + k];
  return y;
}

} // namespace

DipTrace assemble(const KernelTable& table, const PhaseMask& mask) {
  mask.validate();
  if (mask.half_extent != table.config.half_extent ||
      std::abs(mask.pitch - table.config.pitch) >
          1e-12 * std::max(mask.pitch, table.config.pitch))
    throw std::invalid_argument("assemble: mask grid does not match the kernel table");
  const int side = table.side();
  const std::size_t ntau = table.n_tau();
  const std::vector<Complex> a = mask_matrix(mask);

  const Complex r0c = bilinear_sum(table.r0x, table.r0y.data(), side, a);
  const double r0 = r0c.real();
  if (!(std::abs(r0) > 0.0)) throw NumericalError("assemble: vanishing background R0");

  DipTrace trace;
  trace.tau = table.config.scan.tau;
  trace.r_norm.resize(ntau);
  trace.r_raw.resize(ntau);
  trace.envelope.resize(ntau);
  trace.tri.resize(ntau);
  trace.r0 = r0;
  trace.config_hash = table.hash;
  const double dl = table.config.crystal.dip_width();
  parallel_for(ntau, [&](std::size_t k) {
    const std::vector<Complex> y = i_slice(table, k);
    const Complex w = bilinear_sum(table.alpha, y.data(), side, a);
    const double lt = triangle(1.0 - 2.0 * trace.tau[k] / dl);
    trace.r_raw[k] = r0 - lt * w.real();
    trace.r_norm[k] = trace.r_raw[k] / r0;
    trace.envelope[k] = std::abs(w) / r0;
    trace.tri[k] = lt;
  });
  return trace;
}

DipTrace assemble_big(const CrystalParams& c, const OpticalLayout& o,
                      const PhaseMask& mask, const DelayScan& scan) {
  mask.validate();
  scan.validate();
  KernelConfig tmp;
  tmp.crystal = c;
  tmp.layout = o;
  tmp.pitch = mask.pitch;

  double den = 0.0;
  for (double t : mask.transmission) den += t * t;
  if (!(den > 0.0)) throw NumericalError("assemble_big: empty aperture");

  DipTrace trace;
  trace.tau = scan.tau;
  const std::size_t ntau = scan.tau.size();
  trace.r_norm.resize(ntau);
  trace.r_raw.resize(ntau);
  trace.envelope.resize(ntau);
  trace.tri.resize(ntau);
  trace.r0 = den;
  const double dl = c.dip_width();
  const int n = mask.half_extent;
  parallel_for(ntau, [&](std::size_t k) {
    const double h = tmp.delay_phase(scan.tau[k]); // (k0 d M / f D) tau
    Complex sum{0.0, 0.0};
    for (int l = -n; l <= n; ++l)
      for (int m = -n; m <= n; ++m) {
        const double tt = mask.transmit(l, m) * mask.transmit(-l, -m);
        if (tt == 0.0) continue;
        const double dphi = mask.phi(l, m) - mask.phi(-l, -m);
        sum += tt * std::polar(1.0, -dphi + 2.0 * m * h);
      }
    const Complex w = sinc(h) * sum;
    const double lt = triangle(1.0 - 2.0 * scan.tau[k] / dl);
    trace.r_raw[k] = den - lt * w.real();
    trace.r_norm[k] = trace.r_raw[k] / den;
    trace.envelope[k] = std::abs(w) / den;
    trace.tri[k] = lt;
  });
  return trace;
}

double rho0(const CrystalParams& c, const OpticalLayout& o, const Aperture& a, double pitch) {
  const AxisContext ctx = make_axis_context(c, o, a, a, pitch);
  const Complex a00 = f_kernel(ctx, 0, 0);
  const Complex a01 = f_kernel(ctx, 1, -1); // l = 0, lambda = 1
  const double d = std::norm(a00);
  if (!(d > 0.0)) throw NumericalError("rho0: alpha_00 vanished (degenerate configuration)");
  return std::norm(a01) / d;
}

} // namespace homsim
