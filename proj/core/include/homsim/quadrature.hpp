#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace homsim {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes/weights for an n-point rule; cached internally, thread-safe.
const GaussRule& gauss_legendre(int n);

/// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
template <typename F>
auto gauss_integrate(F&& f, double a, double b, int n) {
  const GaussRule& r = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  using R = decltype(f(0.0));
  R acc{};
  for (size_t i = 0; i < r.nodes.size(); ++i)
    acc += r.weights[i] * f(mid + half * r.nodes[i]);
  return acc * half;
}

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Panel-based order escalation: each panel is integrated with increasing
/// Gauss-Legendre orders until two consecutive orders agree to
/// rel_tol * |value| + abs_tol. Panels must be supplied so the integrand is
/// smooth inside each (split at kinks).
std::complex<double> escalated_integral(
    const std::function<std::complex<double>(double)>& f,
    const std::vector<double>& panel_edges,
    double rel_tol, double abs_tol, const std::string& label);

} // namespace homsim
