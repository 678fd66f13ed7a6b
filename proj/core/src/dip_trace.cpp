#include "homsim/dip_trace.hpp"

#include <algorithm>

namespace homsim {

double DipTrace::min_r_norm() const {
  if (r_norm.empty()) return 1.0;
  return *std::min_element(r_norm.begin(), r_norm.end());
}

double DipTrace::envelope_center() const {
  if (envelope.empty() || tau.size() != envelope.size()) return 0.0;
  const auto it = std::max_element(envelope.begin(), envelope.end());
  return tau[static_cast<std::size_t>(it - envelope.begin())];
}

} // namespace homsim
