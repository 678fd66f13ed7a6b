#include "homsim/model.hpp"

namespace homsim {

DelayScan DelayScan::uniform(double tau_min, double tau_max, int samples) {
  if (samples < 2) throw std::invalid_argument("DelayScan: need at least 2 samples");
  if (!(tau_max > tau_min)) throw std::invalid_argument("DelayScan: tau_max must exceed tau_min");
  DelayScan s;
  s.tau.resize(static_cast<size_t>(samples));
  const double step = (tau_max - tau_min) / (samples - 1);
  for (int i = 0; i < samples; ++i) s.tau[static_cast<size_t>(i)] = tau_min + step * i;
  return s;
}

DelayScan DelayScan::around_dip(const CrystalParams& c, int samples) {
  const double dl = c.dip_width();
  return uniform(-0.25 * dl, 1.25 * dl, samples);
}

void DelayScan::validate() const {
  if (tau.size() < 2) throw std::invalid_argument("DelayScan: need at least 2 samples");
  for (size_t i = 1; i < tau.size(); ++i)
    if (!(tau[i] > tau[i - 1])) throw std::invalid_argument("DelayScan: delays must be strictly increasing");
}

} // namespace homsim
