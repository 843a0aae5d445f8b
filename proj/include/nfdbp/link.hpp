#pragma once

#include "nfdbp/common.hpp"

namespace nfdbp {

inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s

/// Physical parameters of a multi-span link. SI units throughout.
struct LinkConfig {
  double span_length = 80e3;          // m
  int num_spans = 1;
  double loss_coeff = 4.60517e-5;     // 1/m, power attenuation (0.2 dB/km)
  double beta2 = -2.0407e-26;         // s^2/m, negative = anomalous
  double gamma_nl = 1.22e-3;          // 1/(W m)
  double pump_freq = 206e12;          // Hz, Raman pump
  double photon_occupancy = 4.0;      // K_T
  double carrier_wavelength = 1550e-9;  // m, anchors the ps/nm/km conversion
  bool noise = true;

  double length() const { return span_length * num_spans; }

  void validate() const;
};

/// beta2 [s^2/m] from a dispersion parameter D [ps/(nm km)] at the given wavelength.
double beta2_from_dispersion(double dispersion_ps_nm_km, double wavelength_m);

/// Power attenuation coefficient [1/m] from dB/km.
double loss_from_db_per_km(double db_per_km);

/// Link preset with the fiber figures used in the reference experiments:
/// 80 km spans, 0.2 dB/km, gamma = 1.22 /W/km, |D| = 16 ps/nm/km.
LinkConfig standard_link(int num_spans, bool normal_dispersion);

}  // namespace nfdbp
