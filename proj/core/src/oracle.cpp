#include "homsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "homsim/kernels.hpp"
#include "homsim/parallel.hpp"
#include "homsim/quadrature.hpp"

namespace homsim {

OracleOptions OracleOptions::scaled(double factor) const {
  OracleOptions o = *this;
  auto s = [factor](int v) { return std::max(4, static_cast<int>(std::lround(v * factor))); };
  o.window_order = s(window_order);
  o.wide_order = s(wide_order);
  o.window_radial = s(window_radial);
  o.window_angular = s(window_angular);
  o.wide_radial = s(wide_radial);
  o.wide_angular = s(wide_angular);
  o.block_order = s(block_order);
  return o;
}

namespace {

struct Physics {
  double a2;   // 2 d1 / k_p
  double ml;   // M L
  double md;   // M / D
  double dl;   // D L
  double map;  // f / k0: momentum -> modulator plane
  double norm; // (pi k_p / (2 d1))^2, the unmodulated open-modulator background
};

Physics make_physics(const CrystalParams& c, const OpticalLayout& o) {
  Physics p;
  p.a2 = 2.0 * o.modulator_to_aperture / c.pump_wavenumber;
  p.ml = c.walkoff * c.length;
  p.md = c.walkoff / c.gvd_mismatch;
  p.dl = c.dip_width();
  p.map = o.fourier_focal_length / c.central_wavenumber();
  const double ax = M_PI * c.pump_wavenumber / (2.0 * o.modulator_to_aperture);
  p.norm = ax * ax;
  return p;
}

double pab(const Aperture& a, const Aperture& b, double u) {
  return p_tilde(a, u) * p_tilde(b, u);
}

// ---------------------------------------------------------------------------
// Pixel-block path (Gaussian apertures): the Eq.-(49)-style pre-integrated
// 2-D blocks over momentum pixel pairs, one x-block per (l, lambda) and one
// y-block per (m, mu, tau).
// ---------------------------------------------------------------------------

std::vector<double> panel_edges(double a, double b, double quad_rate, double lin_rate,
                                double max_phase) {
  const double span = std::abs(b * b - a * a) * quad_rate + (b - a) * lin_rate;
  const int n = std::max(1, static_cast<int>(std::ceil(span / max_phase)));
  std::vector<double> e(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) e[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
  return e;
}

// 2-D integral over pixel l x pixel lambda of
//   f(q, Q) = e^{i a2 (q^2 - Q^2)} extra(q, Q)
template <typename Extra>
Complex pixel_block(const Physics& ph, double wq, int l, int lam, double lin_rate,
                    const OracleOptions& opt, Extra&& extra) {
  const GaussRule& rule = gauss_legendre(opt.block_order);
  const auto edges_q = panel_edges((l - 0.5) * wq, (l + 0.5) * wq, ph.a2, lin_rate,
                                   opt.max_panel_phase);
  const auto edges_qq = panel_edges((lam - 0.5) * wq, (lam + 0.5) * wq, ph.a2, lin_rate,
                                    opt.max_panel_phase);
  Complex sum{0.0, 0.0};
  for (std::size_t pa = 0; pa + 1 < edges_q.size(); ++pa) {
    const double qm = 0.5 * (edges_q[pa] + edges_q[pa + 1]);
    const double qh = 0.5 * (edges_q[pa + 1] - edges_q[pa]);
    for (std::size_t pb = 0; pb + 1 < edges_qq.size(); ++pb) {
      const double sm = 0.5 * (edges_qq[pb] + edges_qq[pb + 1]);
      const double sh = 0.5 * (edges_qq[pb + 1] - edges_qq[pb]);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double q = qm + qh * rule.nodes[i];
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
          const double qq = sm + sh * rule.nodes[j];
          const double w = rule.weights[i] * rule.weights[j] * qh * sh;
          sum += w * std::polar(1.0, ph.a2 * (q * q - qq * qq)) * extra(q, qq);
        }
      }
    }
  }
  return sum;
}

struct BlockTables {
  int side = 0;
  std::vector<Complex> xw;  // (l, lambda) blocks of the W integrand x-part
  std::vector<Complex> x0;  // background x-part
  std::vector<Complex> y0;  // background y-part
  // y-part of W is per tau: yw[k] is a side x side matrix.
  std::vector<std::vector<Complex>> yw;
};

BlockTables block_tables(const CrystalParams& c, const OpticalLayout& o, const Aperture& a,
                         const Aperture& b, double pitch, int n, const std::vector<double>& taus,
                         const OracleOptions& opt) {
  const Physics ph = make_physics(c, o);
  const double wq = c.central_wavenumber() * pitch / o.fourier_focal_length;
  const int side = 2 * n + 1;
  // Smooth-variation pseudo-rate so narrow Gaussian spectra are resolved
  // even where the quadratic phase is slow.
  const double sigma_u = std::sqrt(2.0 / (a.radius * a.radius + b.radius * b.radius));
  const double gauss_rate = 1.5 / sigma_u;

  BlockTables t;
  t.side = side;
  const std::size_t nn = static_cast<std::size_t>(side) * side;
  t.xw.assign(nn, {});
  t.x0.assign(nn, {});
  t.y0.assign(nn, {});
  t.yw.assign(taus.size(), std::vector<Complex>(nn));

  auto idx = [side, n](int i, int j) {
    return static_cast<std::size_t>(i + n) * side + static_cast<std::size_t>(j + n);
  };

  // Upper-triangle list; the swapped block is the conjugate.
  std::vector<std::pair<int, int>> pairs;
  for (int i = -n; i <= n; ++i)
    for (int j = i; j <= n; ++j) pairs.emplace_back(i, j);

  parallel_for(pairs.size(), [&](std::size_t p) {
    const int l = pairs[p].first;
    const int lam = pairs[p].second;
    const Complex xw = pixel_block(ph, wq, l, lam, gauss_rate, opt,
                                   [&](double q, double qq) { return pab(a, b, q + qq); });
    const Complex x0 = pixel_block(ph, wq, l, lam, gauss_rate, opt,
                                   [&](double q, double qq) { return pab(a, b, q - qq); });
    const Complex y0 = pixel_block(
        ph, wq, l, lam, gauss_rate + 1.5 * ph.ml, opt, [&](double q, double qq) {
          const double v = q - qq;
          return pab(a, b, v) * sinc(ph.ml * v) * std::polar(1.0, -0.5 * ph.ml * v);
        });
    t.xw[idx(l, lam)] = xw;
    t.xw[idx(lam, l)] = std::conj(xw);
    t.x0[idx(l, lam)] = x0;
    t.x0[idx(lam, l)] = std::conj(x0);
    t.y0[idx(l, lam)] = y0;
    t.y0[idx(lam, l)] = std::conj(y0);
    for (std::size_t k = 0; k < taus.size(); ++k) {
      const double tau = taus[k];
      const double lt = triangle(1.0 - 2.0 * tau / ph.dl);
      const Complex yw = pixel_block(
          ph, wq, l, lam, gauss_rate + 1.5 * (ph.ml * lt + ph.md * std::abs(tau)), opt,
          [&](double q, double qq) {
            const double u = q + qq;
            return pab(a, b, u) * sinc(ph.ml * u * lt) *
                   std::polar(1.0, ph.md * tau * (q - qq));
          });
      t.yw[k][idx(l, lam)] = yw;
      t.yw[k][idx(lam, l)] = std::conj(yw);
    }
  });
  return t;
}

Complex combine_blocks(const PhaseMask& mask, const std::vector<Complex>& xblocks,
                       const std::vector<Complex>& yblocks) {
  const int n = mask.half_extent;
  const int side = mask.side();
  auto idx = [side, n](int i, int j) {
    return static_cast<std::size_t>(i + n) * side + static_cast<std::size_t>(j + n);
  };
  Complex total{0.0, 0.0};
  for (int l = -n; l <= n; ++l)
    for (int m = -n; m <= n; ++m) {
      const double tlm = mask.transmit(l, m);
      if (tlm == 0.0) continue;
      const Complex wl = tlm * std::polar(1.0, -mask.phi(l, m));
      for (int lam = -n; lam <= n; ++lam) {
        const Complex xf = wl * xblocks[idx(l, lam)];
        if (xf == Complex{0.0, 0.0}) continue;
        for (int mu = -n; mu <= n; ++mu) {
          const double tlmu = mask.transmit(lam, mu);
          if (tlmu == 0.0) continue;
          total += xf * tlmu * std::polar(1.0, mask.phi(lam, mu)) * yblocks[idx(m, mu)];
        }
      }
    }
  return total;
}

// ---------------------------------------------------------------------------
// Rotated-coordinate engines. W window on u = q + q', R0 window on v = q - q'.
// The modulator masks the half-sum and half-difference points
// x1 = (f/k0)(u + v)/2 and x2 = (f/k0)(u - v)/2.
// ---------------------------------------------------------------------------

// Accumulate W(tau_k) = sum_u sinc(ML u_y Lam_tau) sum_{v in u} base e^{i (M/D) tau v_y}
// for every tau in one pass per (u, v) pair.
class WAccumulator {
 public:
  WAccumulator(const Physics& ph, const std::vector<double>& taus, std::size_t n_u)
      : ph_(ph), taus_(taus), acc_(taus.size() * n_u, Complex{0.0, 0.0}), n_u_(n_u) {
    uniform_ = taus.size() >= 2;
    if (uniform_) {
      step_ = taus[1] - taus[0];
      for (std::size_t k = 1; k + 1 < taus.size(); ++k)
        if (std::abs((taus[k + 1] - taus[k]) - step_) > 1e-9 * std::abs(step_)) {
          uniform_ = false;
          break;
        }
    }
  }

  void add(std::size_t u_index, double vy, Complex base) {
    if (uniform_) {
      const Complex inc = std::polar(1.0, ph_.md * step_ * vy);
      Complex phase = std::polar(1.0, ph_.md * taus_[0] * vy);
      for (std::size_t k = 0; k < taus_.size(); ++k) {
        acc_[k * n_u_ + u_index] += base * phase;
        phase *= inc;
      }
    } else {
      for (std::size_t k = 0; k < taus_.size(); ++k)
        acc_[k * n_u_ + u_index] += base * std::polar(1.0, ph_.md * taus_[k] * vy);
    }
  }

  // u_factor includes the P~ window, Jacobians and weights for node i.
  std::vector<Complex> finish(const std::vector<double>& u_y,
                              const std::vector<double>& u_factor) const {
    std::vector<Complex> w(taus_.size(), Complex{0.0, 0.0});
    for (std::size_t k = 0; k < taus_.size(); ++k) {
      const double lt = triangle(1.0 - 2.0 * taus_[k] / ph_.dl);
      Complex sum{0.0, 0.0};
      for (std::size_t i = 0; i < n_u_; ++i)
        sum += u_factor[i] * sinc(ph_.ml * u_y[i] * lt) * acc_[k * n_u_ + i];
      w[k] = sum / ph_.norm;
    }
    return w;
  }

 private:
  const Physics& ph_;
  const std::vector<double>& taus_;
  std::vector<Complex> acc_;
  std::size_t n_u_;
  bool uniform_ = false;
  double step_ = 0.0;
};

// --- polar path over a disk modulator (smooth Zernike masks) ---------------

struct PolarNodes {
  std::vector<double> rho, wrho; // radial Gauss nodes on [0, 1], scaled later
  std::vector<double> theta, wtheta;
};

PolarNodes polar_nodes(int radial, int angular) {
  PolarNodes p;
  const GaussRule& r = gauss_legendre(radial);
  p.rho.resize(r.nodes.size());
  p.wrho.resize(r.nodes.size());
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    p.rho[i] = 0.5 * (r.nodes[i] + 1.0); // [0, 1]
    p.wrho[i] = 0.5 * r.weights[i];
  }
  p.theta.resize(static_cast<std::size_t>(angular));
  p.wtheta.assign(static_cast<std::size_t>(angular), 2.0 * M_PI / angular);
  for (int i = 0; i < angular; ++i)
    p.theta[static_cast<std::size_t>(i)] = 2.0 * M_PI * (i + 0.5) / angular;
  return p;
}

double lens_rho_max(double along, double center2, double r2big) {
  // Largest rho with |rho e + c| <= 2R and |rho e - c| <= 2R, where
  // along = |e . c|, center2 = |c|^2, r2big = (2R)^2.
  const double disc = along * along + r2big - center2;
  if (disc <= 0.0) return 0.0;
  return std::max(0.0, -along + std::sqrt(disc));
}

struct DiskEngineResult {
  Complex r0;
  std::vector<Complex> w;
};

DiskEngineResult disk_engine(const CrystalParams& c, const OpticalLayout& o, const Aperture& a,
                             const Aperture& b, const ZernikeSpec& spec,
                             const std::vector<double>& taus, const OracleOptions& opt,
                             bool want_w, bool want_r0) {
  spec.validate();
  const Physics ph = make_physics(c, o);
  const double qr = spec.unit_radius / ph.map; // disk radius in momentum
  if (!(qr > 0.0)) throw std::invalid_argument("oracle: empty modulator aperture");
  const double r2big = 4.0 * qr * qr;

  const double u_trunc = std::min(std::min(p_tilde_support(a), p_tilde_support(b)), 2.0 * qr);
  const PolarNodes un = polar_nodes(opt.window_radial, opt.window_angular);
  const PolarNodes vn = polar_nodes(opt.wide_radial, opt.wide_angular);
  const double effective = static_cast<double>(un.rho.size()) * un.theta.size() *
                           vn.rho.size() * vn.theta.size();
  if (effective > opt.budget) throw NumericalError("oracle: quadrature budget exceeded");

  const std::size_t n_u = un.rho.size() * un.theta.size();
  std::vector<double> u_y(n_u), u_fac(n_u);
  std::vector<Vec2> u_pt(n_u);
  {
    std::size_t i = 0;
    for (std::size_t ir = 0; ir < un.rho.size(); ++ir)
      for (std::size_t it = 0; it < un.theta.size(); ++it, ++i) {
        const double rho = un.rho[ir] * u_trunc;
        const double th = un.theta[it];
        u_pt[i] = {rho * std::cos(th), rho * std::sin(th)};
        u_y[i] = u_pt[i][1];
        u_fac[i] = 0.25 * pab(a, b, rho) * un.wrho[ir] * u_trunc * rho * un.wtheta[it];
      }
  }

  WAccumulator acc(ph, taus, n_u);
  Complex r0{0.0, 0.0};

  for (std::size_t i = 0; want_w && i < n_u; ++i) {
    const Vec2 u = u_pt[i];
    const double u2 = u[0] * u[0] + u[1] * u[1];
    for (std::size_t it = 0; it < vn.theta.size(); ++it) {
      const double th = vn.theta[it];
      const double ex = std::cos(th), ey = std::sin(th);
      const double along = std::abs(ex * u[0] + ey * u[1]);
      const double rmax = lens_rho_max(along, u2, r2big);
      if (rmax <= 0.0) continue;
      for (std::size_t ir = 0; ir < vn.rho.size(); ++ir) {
        const double rho = vn.rho[ir] * rmax;
        const Vec2 v{rho * ex, rho * ey};
        const double w = vn.wrho[ir] * rmax * rho * vn.wtheta[it];
        const double x1x = 0.5 * ph.map * (u[0] + v[0]);
        const double x1y = 0.5 * ph.map * (u[1] + v[1]);
        const double x2x = 0.5 * ph.map * (u[0] - v[0]);
        const double x2y = 0.5 * ph.map * (u[1] - v[1]);
        const double dphi = evaluate_phase(spec, {x1x, x1y}) - evaluate_phase(spec, {x2x, x2y});
        const Complex base =
            w * std::polar(1.0, ph.a2 * (u[0] * v[0] + u[1] * v[1]) - dphi);
        acc.add(i, v[1], base);
      }
    }
  }

  // Background: window on v instead; the u integral runs over the lens.
  if (want_r0) {
    const double v_trunc = std::min(std::min(p_tilde_support(a), p_tilde_support(b)), 2.0 * qr);
    const PolarNodes vwin = polar_nodes(opt.window_radial, opt.window_angular);
    const PolarNodes uwide = polar_nodes(opt.wide_radial, opt.wide_angular);
    Complex sum{0.0, 0.0};
    for (std::size_t ir = 0; ir < vwin.rho.size(); ++ir)
      for (std::size_t it = 0; it < vwin.theta.size(); ++it) {
        const double rho_v = vwin.rho[ir] * v_trunc;
        const double thv = vwin.theta[it];
        const Vec2 v{rho_v * std::cos(thv), rho_v * std::sin(thv)};
        const double wv = vwin.wrho[ir] * v_trunc * rho_v * vwin.wtheta[it];
        const double v2 = rho_v * rho_v;
        const Complex vfac = wv * pab(a, b, rho_v) * sinc(ph.ml * v[1]) *
                             std::polar(1.0, -0.5 * ph.ml * v[1]);
        Complex usum{0.0, 0.0};
        for (std::size_t jt = 0; jt < uwide.theta.size(); ++jt) {
          const double th = uwide.theta[jt];
          const double ex = std::cos(th), ey = std::sin(th);
          const double along = std::abs(ex * v[0] + ey * v[1]);
          const double rmax = lens_rho_max(along, v2, r2big);
          if (rmax <= 0.0) continue;
          for (std::size_t jr = 0; jr < uwide.rho.size(); ++jr) {
            const double rho = uwide.rho[jr] * rmax;
            const Vec2 u{rho * ex, rho * ey};
            const double wu = uwide.wrho[jr] * rmax * rho * uwide.wtheta[jt];
            const double x1x = 0.5 * ph.map * (u[0] + v[0]);
            const double x1y = 0.5 * ph.map * (u[1] + v[1]);
            const double x2x = 0.5 * ph.map * (u[0] - v[0]);
            const double x2y = 0.5 * ph.map * (u[1] - v[1]);
            const double dphi =
                evaluate_phase(spec, {x1x, x1y}) - evaluate_phase(spec, {x2x, x2y});
            usum += wu * std::polar(1.0, ph.a2 * (u[0] * v[0] + u[1] * v[1]) - dphi);
          }
        }
        sum += vfac * usum;
      }
    r0 = 0.25 * sum / ph.norm;
  }

  DiskEngineResult res;
  res.r0 = r0;
  res.w = acc.finish(u_y, u_fac);
  return res;
}

// --- Cartesian (u, v) path over a square modulator --------------------------

struct SquareEngineResult {
  Complex r0;
  std::vector<Complex> w;
};

SquareEngineResult square_engine(const CrystalParams& c, const OpticalLayout& o,
                                 const Aperture& a, const Aperture& b,
                                 const std::function<Complex(double, double)>& g,
                                 double half_size, const std::vector<double>& taus,
                                 const OracleOptions& opt, bool want_w, bool want_r0) {
  const Physics ph = make_physics(c, o);
  const double qh = half_size / ph.map; // momentum half-extent of the modulator square
  const double u_trunc = std::min(std::min(p_tilde_support(a), p_tilde_support(b)), 2.0 * qh);

  const GaussRule& uw = gauss_legendre(opt.window_order);
  const GaussRule& vw = gauss_legendre(opt.wide_order);
  const double effective = std::pow(static_cast<double>(uw.nodes.size()), 2.0) *
                           std::pow(static_cast<double>(vw.nodes.size()), 2.0);
  if (effective > opt.budget) throw NumericalError("oracle: quadrature budget exceeded");

  SquareEngineResult out;
  out.w.assign(taus.size(), Complex{0.0, 0.0});
  out.r0 = {0.0, 0.0};

  // Window(u) x wide(v) for W; window(v) x wide(u) for R0. One generic pass
  // parameterized by which coordinate carries the window.
  for (int mode = 0; mode < 2; ++mode) {
    if (mode == 0 && !want_w) continue;
    if (mode == 1 && !want_r0) continue;
    const std::size_t n_u = uw.nodes.size() * uw.nodes.size();
    std::vector<double> win_y(n_u), win_fac_base(n_u);
    std::vector<Vec2> win_pt(n_u);
    {
      std::size_t i = 0;
      for (std::size_t ix = 0; ix < uw.nodes.size(); ++ix)
        for (std::size_t iy = 0; iy < uw.nodes.size(); ++iy, ++i) {
          const Vec2 w{u_trunc * uw.nodes[ix], u_trunc * uw.nodes[iy]};
          win_pt[i] = w;
          win_y[i] = w[1];
          win_fac_base[i] =
              0.25 * pab(a, b, std::hypot(w[0], w[1])) * uw.weights[ix] * uw.weights[iy] *
              u_trunc * u_trunc;
        }
    }
    WAccumulator acc(ph, taus, n_u);
    Complex r0sum{0.0, 0.0};
    for (std::size_t i = 0; i < n_u; ++i) {
      const Vec2 wn = win_pt[i];
      // wide coordinate bounds depend on the window coordinate per axis:
      // |win_x +- wide_x| <= 2 qh.
      const double bx = 2.0 * qh - std::abs(wn[0]);
      const double by = 2.0 * qh - std::abs(wn[1]);
      if (bx <= 0.0 || by <= 0.0) continue;
      for (std::size_t jx = 0; jx < vw.nodes.size(); ++jx) {
        const double wx = bx * vw.nodes[jx];
        for (std::size_t jy = 0; jy < vw.nodes.size(); ++jy) {
          const double wy = by * vw.nodes[jy];
          const double wgt = vw.weights[jx] * vw.weights[jy] * bx * by;
          // mode 0: u = window, v = wide; mode 1: v = window, u = wide.
          const double ux = (mode == 0) ? wn[0] : wx;
          const double uy = (mode == 0) ? wn[1] : wy;
          const double vx = (mode == 0) ? wx : wn[0];
          const double vy = (mode == 0) ? wy : wn[1];
          const Complex g1 = g(0.5 * ph.map * (ux + vx), 0.5 * ph.map * (uy + vy));
          const Complex g2 = g(0.5 * ph.map * (ux - vx), 0.5 * ph.map * (uy - vy));
          if (g1 == Complex{0.0, 0.0} || g2 == Complex{0.0, 0.0}) continue;
          const Complex gprod = std::conj(g1) * g2;
          const Complex ph0 = std::polar(1.0, ph.a2 * (ux * vx + uy * vy));
          if (mode == 0) {
            acc.add(i, vy, wgt * ph0 * gprod);
          } else {
            r0sum += win_fac_base[i] * wgt * ph0 * gprod * sinc(ph.ml * vy) *
                     std::polar(1.0, -0.5 * ph.ml * vy);
          }
        }
      }
    }
    if (mode == 0) {
      out.w = acc.finish(win_y, win_fac_base);
    } else {
      out.r0 = r0sum / ph.norm;
    }
  }
  return out;
}

Complex sample_mask(const PhaseMask& mask, double x, double y) {
  const double d = mask.pitch;
  const int l = static_cast<int>(std::lround(x / d));
  const int m = static_cast<int>(std::lround(y / d));
  if (std::abs(l) > mask.half_extent || std::abs(m) > mask.half_extent) return {0.0, 0.0};
  const double t = mask.transmit(l, m);
  if (t == 0.0) return {0.0, 0.0};
  return t * std::polar(1.0, mask.phi(l, m));
}

struct TraceParts {
  Complex r0;
  std::vector<Complex> w;
};

TraceParts evaluate_parts(const CrystalParams& c, const OpticalLayout& o, const Aperture& a,
                          const Aperture& b, const Modulation& mask,
                          const std::vector<double>& taus, const OracleOptions& opt,
                          bool want_w, bool want_r0) {
  c.validate();
  o.validate();
  a.validate();
  b.validate();
  const Physics ph = make_physics(c, o);
  TraceParts parts;
  if (std::holds_alternative<PhaseMask>(mask)) {
    const PhaseMask& m = std::get<PhaseMask>(mask);
    m.validate();
    if (a.kind == ApertureKind::Gaussian && b.kind == ApertureKind::Gaussian) {
      const BlockTables t = block_tables(c, o, a, b, m.pitch, m.half_extent,
                                         want_w ? taus : std::vector<double>{}, opt);
      if (want_r0) parts.r0 = combine_blocks(m, t.x0, t.y0) / ph.norm;
      if (want_w) {
        parts.w.resize(taus.size());
        for (std::size_t k = 0; k < taus.size(); ++k)
          parts.w[k] = combine_blocks(m, t.xw, t.yw[k]) / ph.norm;
      }
    } else {
      // Non-separable aperture spectra force the capped 4-D path.
      const double half = (m.half_extent + 0.5) * m.pitch;
      const auto g = [&m](double x, double y) { return sample_mask(m, x, y); };
      const SquareEngineResult r =
          square_engine(c, o, a, b, g, half, taus, opt, want_w, want_r0);
      parts.r0 = r.r0;
      parts.w = r.w;
    }
  } else {
    const ZernikeSpec& z = std::get<ZernikeSpec>(mask);
    const DiskEngineResult r = disk_engine(c, o, a, b, z, taus, opt, want_w, want_r0);
    parts.r0 = r.r0;
    parts.w = r.w;
  }
  return parts;
}

} // namespace

Complex direct_W(const CrystalParams& c, const OpticalLayout& o, const Aperture& a,
                 const Aperture& b, const Modulation& mask, double tau,
                 const OracleOptions& opt) {
  return evaluate_parts(c, o, a, b, mask, {tau}, opt, true, false).w.front();
}

Complex direct_R0(const CrystalParams& c, const OpticalLayout& o, const Aperture& a,
                  const Aperture& b, const Modulation& mask, const OracleOptions& opt) {
  return evaluate_parts(c, o, a, b, mask, {}, opt, false, true).r0;
}

DipTrace oracle_trace(const CrystalParams& c, const OpticalLayout& o, const Aperture& a,
                      const Aperture& b, const Modulation& mask, const DelayScan& scan,
                      const OracleOptions& opt) {
  scan.validate();
  const TraceParts parts = evaluate_parts(c, o, a, b, mask, scan.tau, opt, true, true);
  const double r0 = parts.r0.real();
  if (!(std::abs(r0) > 0.0)) throw NumericalError("oracle_trace: vanishing background");
  DipTrace trace;
  trace.tau = scan.tau;
  const std::size_t n = scan.tau.size();
  trace.r_norm.resize(n);
  trace.r_raw.resize(n);
  trace.envelope.resize(n);
  trace.tri.resize(n);
  trace.r0 = r0;
  const double dl = c.dip_width();
  for (std::size_t k = 0; k < n; ++k) {
    const double lt = triangle(1.0 - 2.0 * scan.tau[k] / dl);
    trace.r_raw[k] = r0 - lt * parts.w[k].real();
    trace.r_norm[k] = trace.r_raw[k] / r0;
    trace.envelope[k] = std::abs(parts.w[k]) / r0;
    trace.tri[k] = lt;
  }
  return trace;
}

Complex direct_W_square(const CrystalParams& c, const OpticalLayout& o, const Aperture& a,
                        const Aperture& b, const std::function<Complex(double, double)>& g,
                        double half_size, double tau, const OracleOptions& opt) {
  return square_engine(c, o, a, b, g, half_size, {tau}, opt, true, false).w.front();
}

Complex direct_W_separable(const CrystalParams& c, const OpticalLayout& o, const Aperture& a,
                           const Aperture& b, const std::function<Complex(double)>& gx,
                           const std::function<Complex(double)>& gy, double half_size,
                           double tau, const OracleOptions& opt) {
  if (a.kind != ApertureKind::Gaussian || b.kind != ApertureKind::Gaussian)
    throw std::invalid_argument("direct_W_separable: requires Gaussian apertures");
  const Physics ph = make_physics(c, o);
  const double qh = half_size / ph.map;
  const double u_trunc = std::min(std::min(p_tilde_support(a), p_tilde_support(b)), 2.0 * qh);
  const GaussRule& uw = gauss_legendre(opt.window_order);
  const GaussRule& vw = gauss_legendre(opt.wide_order);

  const double lt = triangle(1.0 - 2.0 * tau / ph.dl);
  // Per-axis 2-D integrals; the pair Jacobian 1/4 splits as 1/2 per axis.
  auto axis = [&](bool is_y, const std::function<Complex(double)>& gax) {
    Complex sum{0.0, 0.0};
    for (std::size_t i = 0; i < uw.nodes.size(); ++i) {
      const double u = u_trunc * uw.nodes[i];
      const double bu = 2.0 * qh - std::abs(u);
      if (bu <= 0.0) continue;
      const double pa = p_tilde(a, u) * p_tilde(b, u);
      const double ufac =
          0.5 * uw.weights[i] * u_trunc * pa * (is_y ? sinc(ph.ml * u * lt) : 1.0);
      Complex vsum{0.0, 0.0};
      for (std::size_t j = 0; j < vw.nodes.size(); ++j) {
        const double v = bu * vw.nodes[j];
        const Complex gp =
            std::conj(gax(0.5 * ph.map * (u + v))) * gax(0.5 * ph.map * (u - v));
        const double phase = ph.a2 * u * v + (is_y ? ph.md * tau * v : 0.0);
        vsum += vw.weights[j] * bu * gp * std::polar(1.0, phase);
      }
      sum += ufac * vsum;
    }
    return sum;
  };
  const Complex wx = axis(false, gx);
  const Complex wy = axis(true, gy);
  return wx * wy / ph.norm;
}

double charfun_identity_check(const std::vector<double>& phases, const PixelPartition& partition,
                              const std::vector<Vec2>& samples) {
  if (phases.size() != partition.sets.size())
    throw std::invalid_argument("charfun_identity_check: one phase per set required");
  if (!(partition.pitch > 0.0))
    throw std::invalid_argument("charfun_identity_check: pitch must be > 0");
  std::set<std::pair<int, int>> seen;
  for (const auto& s : partition.sets)
    for (const auto& px : s)
      if (!seen.insert(px).second)
        throw std::invalid_argument("charfun_identity_check: sets overlap");

  auto pixel_of = [&partition](const Vec2& x) {
    return std::pair<int, int>{static_cast<int>(std::lround(x[0] / partition.pitch)),
                               static_cast<int>(std::lround(x[1] / partition.pitch))};
  };
  double max_dev = 0.0;
  for (const Vec2& x : samples) {
    const auto px = pixel_of(x);
    double exponent = 0.0;
    Complex rhs{0.0, 0.0};
    bool covered = false;
    for (std::size_t k = 0; k < partition.sets.size(); ++k) {
      const auto& s = partition.sets[k];
      const bool member = std::find(s.begin(), s.end(), px) != s.end();
      if (member) {
        covered = true;
        exponent += phases[k];
        rhs += std::polar(1.0, phases[k]);
      }
    }
    if (!covered)
      throw std::invalid_argument("charfun_identity_check: sample not covered by any set");
    max_dev = std::max(max_dev, std::abs(std::polar(1.0, exponent) - rhs));
  }
  return max_dev;
}

} // namespace homsim
