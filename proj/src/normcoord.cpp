#include "nfdbp/normcoord.hpp"

#include <sstream>

namespace nfdbp {

void LinkConfig::validate() const {
  std::ostringstream why;
  if (!(span_length > 0)) why << "span_length must be positive; ";
  if (num_spans < 0) why << "num_spans must be non-negative; ";
  if (loss_coeff < 0) why << "loss_coeff must be non-negative; ";
  if (!(gamma_nl > 0)) why << "gamma_nl must be positive; ";
  if (beta2 == 0 || !std::isfinite(beta2)) why << "beta2 must be nonzero; ";
  if (pump_freq < 0) why << "pump_freq must be non-negative; ";
  if (photon_occupancy < 0) why << "photon_occupancy must be non-negative; ";
  if (!why.str().empty()) throw Error(ErrorCode::invalid_config, why.str());
}

double beta2_from_dispersion(double dispersion_ps_nm_km, double wavelength_m) {
  const double d_si = dispersion_ps_nm_km * 1e-12 / (1e-9 * 1e3);  // s/m^2
  return -d_si * wavelength_m * wavelength_m / (2.0 * kPi * kSpeedOfLight);
}

double loss_from_db_per_km(double db_per_km) { return db_per_km * std::log(10.0) / 10.0 / 1e3; }

LinkConfig standard_link(int num_spans, bool normal_dispersion) {
  LinkConfig link;
  link.num_spans = num_spans;
  link.span_length = 80e3;
  link.loss_coeff = loss_from_db_per_km(0.2);
  link.gamma_nl = 1.22e-3;
  link.beta2 = beta2_from_dispersion(normal_dispersion ? -16.0 : 16.0, link.carrier_wavelength);
  return link;
}

void PhysicalSignal::validate() const {
  if (!(sample_interval > 0)) throw Error(ErrorCode::invalid_config, "sample_interval must be positive");
  if (samples.size() == 0) throw Error(ErrorCode::invalid_config, "signal has no samples");
}

NormalizationParams derive_normalization(const LinkConfig& link, double t_window) {
  if (!(t_window > 0)) throw Error(ErrorCode::invalid_config, "t_window must be positive");
  if (link.beta2 == 0) throw Error(ErrorCode::invalid_config, "beta2 must be nonzero");
  if (!(link.gamma_nl > 0)) throw Error(ErrorCode::invalid_config, "gamma must be positive");
  const double abs_beta2 = std::abs(link.beta2);
  NormalizationParams p;
  p.t_window = t_window;
  p.distance_scale = abs_beta2 / (2.0 * t_window * t_window);
  p.power_scale = link.gamma_nl * t_window * t_window / abs_beta2;
  p.kappa = link.beta2 < 0 ? Kappa::anomalous : Kappa::normal;
  p.conjugate_field = link.beta2 > 0;
  return p;
}

NormalizedSignal to_normalized(const PhysicalSignal& sig, const NormalizationParams& p) {
  sig.validate();
  if (std::abs(sig.duration() - p.t_window) > sig.sample_interval * (1.0 + 1e-9)) {
    std::ostringstream why;
    why << "signal spans " << sig.duration() << " s but the window is " << p.t_window << " s";
    throw Error(ErrorCode::window_mismatch, why.str());
  }
  NormalizedSignal out;
  out.kappa = p.kappa;
  out.x = 0.0;
  const double scale = std::sqrt(p.power_scale);
  out.samples = p.conjugate_field ? CVector(sig.samples.conjugate() * scale) : CVector(sig.samples * scale);
  return out;
}

PhysicalSignal from_normalized(const NormalizedSignal& sig, const NormalizationParams& p, double t_start) {
  if (sig.size() == 0) throw Error(ErrorCode::invalid_config, "signal has no samples");
  PhysicalSignal out;
  out.sample_interval = p.t_window / static_cast<double>(sig.size());
  out.t_start = t_start;
  const double scale = 1.0 / std::sqrt(p.power_scale);
  out.samples = p.conjugate_field ? CVector(sig.samples.conjugate() * scale) : CVector(sig.samples * scale);
  return out;
}

double normalized_distance(const LinkConfig& link, const NormalizationParams& p) {
  return link.length() * p.distance_scale;
}

}  // namespace nfdbp
