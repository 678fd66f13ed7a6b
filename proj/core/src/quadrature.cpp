#include "homsim/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace homsim {

namespace {

GaussRule compute_rule(int n) {
  // Newton iteration on Legendre P_n, standard Golub-free construction.
  GaussRule rule;
  rule.nodes.resize(static_cast<size_t>(n));
  rule.weights.resize(static_cast<size_t>(n));
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<size_t>(i)] = -x;
    rule.nodes[static_cast<size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<size_t>(i)] = w;
    rule.weights[static_cast<size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<size_t>(n / 2)] = 0.0;
  return rule;
}

} // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

std::complex<double> escalated_integral(
    const std::function<std::complex<double>(double)>& f,
    const std::vector<double>& panel_edges,
    double rel_tol, double abs_tol, const std::string& label) {
  static const int orders[] = {16, 24, 32, 48, 64, 96, 128};
  std::complex<double> total{0.0, 0.0};
  for (size_t p = 0; p + 1 < panel_edges.size(); ++p) {
    const double a = panel_edges[p];
    const double b = panel_edges[p + 1];
    if (!(b > a)) continue;
    std::complex<double> prev = gauss_integrate(f, a, b, orders[0]);
    bool ok = false;
    for (size_t oi = 1; oi < sizeof(orders) / sizeof(orders[0]); ++oi) {
      const std::complex<double> cur = gauss_integrate(f, a, b, orders[oi]);
      if (std::abs(cur - prev) <= rel_tol * std::abs(cur) + abs_tol) {
        prev = cur;
        ok = true;
        break;
      }
      prev = cur;
    }
    if (!ok)
      throw QuadratureError("quadrature did not converge: " + label);
    total += prev;
  }
  return total;
}

} // namespace homsim
