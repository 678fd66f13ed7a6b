#include "homsim/zernike.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "homsim/quadrature.hpp"

namespace homsim {

namespace {

void check_indices(int n, int m) {
  if (n < 0 || std::abs(m) > n || (n - std::abs(m)) % 2 != 0)
    throw std::invalid_argument("zernike: invalid (n, m) = (" + std::to_string(n) + ", " +
                                std::to_string(m) + ")");
}

} // namespace

ZernikeSpec& ZernikeSpec::add(int n, int m, double coeff) {
  check_indices(n, m);
  for (const auto& t : terms)
    if (t.n == n && t.m == m)
      throw std::invalid_argument("zernike: duplicate term (" + std::to_string(n) + ", " +
                                  std::to_string(m) + ")");
  terms.push_back({n, m, coeff});
  return *this;
}

void ZernikeSpec::validate() const {
  if (!(unit_radius > 0.0)) throw std::invalid_argument("zernike: unit_radius must be > 0");
  std::set<std::pair<int, int>> seen;
  for (const auto& t : terms) {
    check_indices(t.n, t.m);
    if (!std::isfinite(t.coeff)) throw std::invalid_argument("zernike: non-finite coefficient");
    if (!seen.insert({t.n, t.m}).second)
      throw std::invalid_argument("zernike: duplicate term (" + std::to_string(t.n) + ", " +
                                  std::to_string(t.m) + ")");
  }
}

double radial_poly(int n, int m, double rho) {
  check_indices(n, m);
  const int am = std::abs(m);
  const int kmax = (n - am) / 2;
  auto fact = [](int v) {
    double r = 1.0;
    for (int i = 2; i <= v; ++i) r *= i;
    return r;
  };
  // sum_k (-1)^k (n-k)! / (k! ((n+|m|)/2 - k)! ((n-|m|)/2 - k)!) rho^{n-2k}
  double sum = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    const double c = ((k % 2 == 0) ? 1.0 : -1.0) * fact(n - k) /
                     (fact(k) * fact((n + am) / 2 - k) * fact((n - am) / 2 - k));
    sum += c * std::pow(rho, n - 2 * k);
  }
  return sum;
}

double evaluate_phase(const ZernikeSpec& z, const Vec2& x) {
  if (z.terms.empty()) return 0.0;
  const double rho = std::hypot(x[0], x[1]) / z.unit_radius;
  const double theta = std::atan2(x[1], x[0]);
  double sum = 0.0;
  for (const auto& t : z.terms) {
    const double radial = radial_poly(t.n, t.m, rho);
    double angular;
    if (t.m < 0 && z.sin_for_negative_m)
      angular = std::sin(-t.m * theta);
    else
      angular = std::cos(t.m * theta);
    sum += t.coeff * radial * angular;
  }
  return sum;
}

std::pair<ZernikeSpec, ZernikeSpec> parity_split(const ZernikeSpec& z) {
  ZernikeSpec even = z, odd = z;
  even.terms.clear();
  odd.terms.clear();
  for (const auto& t : z.terms)
    (std::abs(t.m) % 2 == 0 ? even : odd).terms.push_back(t);
  return {even, odd};
}

double antisymmetric_part(const ZernikeSpec& z, const Vec2& q) {
  return evaluate_phase(z, q) - evaluate_phase(z, {-q[0], -q[1]});
}

PhaseMask PhaseMask::zeros(double pitch, int half_extent) {
  if (!(pitch > 0.0)) throw std::invalid_argument("PhaseMask: pitch must be > 0");
  if (half_extent < 0) throw std::invalid_argument("PhaseMask: half_extent must be >= 0");
  PhaseMask m;
  m.pitch = pitch;
  m.half_extent = half_extent;
  const std::size_t n = static_cast<std::size_t>(m.side()) * static_cast<std::size_t>(m.side());
  m.phase.assign(n, 0.0);
  m.transmission.assign(n, 1.0);
  return m;
}

void PhaseMask::validate() const {
  if (!(pitch > 0.0)) throw std::invalid_argument("PhaseMask: pitch must be > 0");
  const std::size_t n = static_cast<std::size_t>(side()) * static_cast<std::size_t>(side());
  if (phase.size() != n || transmission.size() != n)
    throw std::invalid_argument("PhaseMask: grid size mismatch");
  for (double p : phase)
    if (!std::isfinite(p)) throw std::invalid_argument("PhaseMask: non-finite phase");
  for (double t : transmission)
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("PhaseMask: transmission outside [0,1]");
}

namespace {

// Corner-based classification of a pixel against the aperture circle.
enum class PixelPlace { Inside, Outside, Straddle };

PixelPlace classify(double cx, double cy, double half, double r) {
  const double rr = r * r;
  int inside = 0;
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2) {
      const double x = cx + sx * half;
      const double y = cy + sy * half;
      if (x * x + y * y <= rr) ++inside;
    }
  if (inside == 4) return PixelPlace::Inside;
  if (inside == 0) {
    // The circle can still poke into an edge if the pixel spans the axis;
    // nearest point of the pixel to the origin decides.
    const double nx = std::max(0.0, std::abs(cx) - half);
    const double ny = std::max(0.0, std::abs(cy) - half);
    return (nx * nx + ny * ny <= rr) ? PixelPlace::Straddle : PixelPlace::Outside;
  }
  return PixelPlace::Straddle;
}

} // namespace

PhaseMask pixelize(const ZernikeSpec& z, double pitch, int half_extent,
                   int quadrature_order, StraddlePolicy policy) {
  z.validate();
  if (!(pitch > 0.0)) throw std::invalid_argument("pixelize: pitch must be > 0");
  if (quadrature_order < 1) throw std::invalid_argument("pixelize: quadrature order must be >= 1");
  PhaseMask mask = PhaseMask::zeros(pitch, half_extent);
  const GaussRule& rule = gauss_legendre(quadrature_order);
  const double half = 0.5 * pitch;
  const double r = z.unit_radius;
  for (int l = -half_extent; l <= half_extent; ++l) {
    for (int m = -half_extent; m <= half_extent; ++m) {
      const double cx = l * pitch;
      const double cy = m * pitch;
      const PixelPlace place = classify(cx, cy, half, r);
      if (place == PixelPlace::Outside) {
        mask.phi(l, m) = 0.0;
        mask.transmit(l, m) = 0.0;
        continue;
      }
      if (place == PixelPlace::Straddle && policy == StraddlePolicy::Exclude) {
        mask.phi(l, m) = 0.0;
        mask.transmit(l, m) = 0.0;
        continue;
      }
      double sum = 0.0;
      double area = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = cx + half * rule.nodes[i];
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
          const double y = cy + half * rule.nodes[j];
          const double w = rule.weights[i] * rule.weights[j];
          if (place == PixelPlace::Straddle && (x * x + y * y) > r * r) continue;
          sum += w * evaluate_phase(z, {x, y});
          area += w;
        }
      }
      if (area <= 0.0) {
        mask.phi(l, m) = 0.0;
        mask.transmit(l, m) = 0.0;
        continue;
      }
      mask.phi(l, m) = sum / area;
      mask.transmit(l, m) = (place == PixelPlace::Inside) ? 1.0 : area / 4.0;
    }
  }
  return mask;
}

PhaseMask pixelize_function(const std::function<double(double, double)>& phi,
                            double pitch, int half_extent, int quadrature_order) {
  if (!(pitch > 0.0)) throw std::invalid_argument("pixelize_function: pitch must be > 0");
  PhaseMask mask = PhaseMask::zeros(pitch, half_extent);
  const GaussRule& rule = gauss_legendre(quadrature_order);
  const double half = 0.5 * pitch;
  for (int l = -half_extent; l <= half_extent; ++l) {
    for (int m = -half_extent; m <= half_extent; ++m) {
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        for (std::size_t j = 0; j < rule.nodes.size(); ++j)
          sum += rule.weights[i] * rule.weights[j] *
                 phi(l * pitch + half * rule.nodes[i], m * pitch + half * rule.nodes[j]);
      mask.phi(l, m) = sum / 4.0;
    }
  }
  return mask;
}

void save_mask(const PhaseMask& mask, const std::string& path) {
  mask.validate();
  std::ostringstream out;
  char buf[64];
  out << "# homsim phase mask v1\n";
  std::snprintf(buf, sizeof(buf), "%.17g", mask.pitch);
  out << "pitch " << buf << "\n";
  out << "half_extent " << mask.half_extent << "\n";
  out << "# l m phase_rad transmission\n";
  for (int l = -mask.half_extent; l <= mask.half_extent; ++l)
    for (int m = -mask.half_extent; m <= mask.half_extent; ++m) {
      out << l << " " << m << " ";
      std::snprintf(buf, sizeof(buf), "%.17g", mask.phi(l, m));
      out << buf << " ";
      std::snprintf(buf, sizeof(buf), "%.17g", mask.transmit(l, m));
      out << buf << "\n";
    }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_mask: cannot open " + tmp);
    f << out.str();
  }
  std::filesystem::rename(tmp, path);
}

PhaseMask load_mask(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_mask: cannot open " + path);
  double pitch = 0.0;
  int half_extent = -1;
  std::string line;
  PhaseMask mask;
  bool grid_ready = false;
  std::size_t rows = 0;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    if (!grid_ready) {
      ss >> key;
      if (key == "pitch") {
        ss >> pitch;
      } else if (key == "half_extent") {
        ss >> half_extent;
        if (pitch <= 0.0 || half_extent < 0)
          throw std::runtime_error("load_mask: bad header in " + path);
        mask = PhaseMask::zeros(pitch, half_extent);
        grid_ready = true;
      } else {
        throw std::runtime_error("load_mask: unexpected header line '" + line + "'");
      }
      continue;
    }
    int l = 0, m = 0;
    double phi = 0.0, t = 0.0;
    std::istringstream row(line);
    if (!(row >> l >> m >> phi >> t))
      throw std::runtime_error("load_mask: malformed row '" + line + "'");
    if (std::abs(l) > half_extent || std::abs(m) > half_extent)
      throw std::runtime_error("load_mask: index out of range in '" + line + "'");
    mask.phi(l, m) = phi;
    mask.transmit(l, m) = t;
    ++rows;
  }
  if (!grid_ready) throw std::runtime_error("load_mask: missing header in " + path);
  const std::size_t expect = static_cast<std::size_t>(mask.side()) * static_cast<std::size_t>(mask.side());
  if (rows != expect)
    throw std::runtime_error("load_mask: expected " + std::to_string(expect) + " rows, got " +
                             std::to_string(rows));
  mask.validate();
  return mask;
}

} // namespace homsim
