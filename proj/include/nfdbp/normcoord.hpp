#pragma once

// Mapping between physical baseband envelopes and the normalized NSE
//
//   i E_x + E_tt + 2 kappa |E|^2 E = 0,   t in [-1, 0].
//
// With T0 the processing window, L_D = T0^2 / |beta2|:
//   t = (T - T_origin) / T0 - 1,  x = z / (2 L_D),  E = sqrt(gamma T0^2 / |beta2|) A,
// and the field is conjugated when the fiber has normal dispersion.

#include "nfdbp/common.hpp"
#include "nfdbp/link.hpp"

namespace nfdbp {

/// Sampled baseband envelope in sqrt(W). Sample k sits at t_start + k * sample_interval.
struct PhysicalSignal {
  CVector samples;
  double sample_interval = 1.0;  // s
  double t_start = 0.0;          // s

  double duration() const { return sample_interval * static_cast<double>(samples.size()); }
  void validate() const;
};

struct NormalizationParams {
  double t_window = 1.0;        // s, mapped onto the unit interval
  double power_scale = 1.0;     // 1/W
  double distance_scale = 1.0;  // 1/m
  Kappa kappa = Kappa::anomalous;
  bool conjugate_field = false;
};

/// Samples E(x, t_n) on the midpoint grid t_n = -1 + n eps - eps/2, n = 1..D.
struct NormalizedSignal {
  CVector samples;
  Kappa kappa = Kappa::anomalous;
  double x = 0.0;

  Eigen::Index size() const { return samples.size(); }
  double eps() const { return 1.0 / static_cast<double>(samples.size()); }
};

NormalizationParams derive_normalization(const LinkConfig& link, double t_window);

NormalizedSignal to_normalized(const PhysicalSignal& sig, const NormalizationParams& p);

PhysicalSignal from_normalized(const NormalizedSignal& sig, const NormalizationParams& p, double t_start = 0.0);

double normalized_distance(const LinkConfig& link, const NormalizationParams& p);

/// Normalized time of sample index k (0-based) on a D-point grid.
inline double normalized_time(Eigen::Index k, Eigen::Index d) {
  const double eps = 1.0 / static_cast<double>(d);
  return -1.0 + (static_cast<double>(k) + 0.5) * eps;
}

}  // namespace nfdbp
