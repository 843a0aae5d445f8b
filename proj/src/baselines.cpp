#include "nfdbp/baselines.hpp"

#include "nfdbp/fft.hpp"

namespace nfdbp {

PhysicalSignal dbp_ssfm(const PhysicalSignal& received, const LinkConfig& link, int steps_per_span,
                        SplitScheme scheme) {
  received.validate();
  link.validate();
  if (steps_per_span < 1) throw Error(ErrorCode::invalid_config, "steps_per_span must be >= 1");
  if (link.num_spans == 0) return received;
  const NormalizationParams p = derive_normalization(link, received.duration());
  const double x_span = link.span_length * p.distance_scale;
  NormalizedSignal field = to_normalized(received, p);
  for (int span = 0; span < link.num_spans; ++span) field = ssfm_propagate(field, -x_span, steps_per_span, scheme);
  return from_normalized(field, p, received.t_start);
}

PhysicalSignal cdc(const PhysicalSignal& received, const LinkConfig& link) {
  received.validate();
  PhysicalSignal out = received;
  const double length = link.length();
  if (length == 0.0) return out;
  const Eigen::Index n = received.samples.size();
  CVector spec = fft::forward<double>(received.samples);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double w = fft::angular_frequency(k, n, received.sample_interval);
    spec[k] *= std::polar(1.0, -0.5 * link.beta2 * w * w * length);
  }
  out.samples = fft::inverse<double>(spec);
  return out;
}

}  // namespace nfdbp
