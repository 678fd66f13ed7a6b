#pragma once

#include <string>
#include <vector>

#include "homsim/model.hpp"

namespace homsim {

/// Sampled coincidence trace over a delay scan. r_norm is R(tau)/R0 with the
/// far-from-dip background at 1; r_raw keeps the method's internal scale;
/// envelope is the modulation-envelope diagnostic |W(tau)/R0|; tri is
/// triangle(1 - 2 tau / DL).
struct DipTrace {
  std::vector<double> tau;      // [s]
  std::vector<double> r_norm;
  std::vector<double> r_raw;
  std::vector<double> envelope;
  std::vector<double> tri;
  double r0 = 1.0;              // background in the method's internal scale
  std::string config_hash;      // set by configured front ends; may be empty

  double min_r_norm() const;
  double visibility() const { return 1.0 - min_r_norm(); }
  /// Delay at the envelope maximum (grid-resolution estimate).
  double envelope_center() const;
};

} // namespace homsim
