#include "nfdbp/channel.hpp"

#include "nfdbp/fft.hpp"

#include <random>

namespace nfdbp {

namespace {

CVector dispersion_phase(Eigen::Index n, double h) {
  CVector phase(n);
  const double eps = 1.0 / static_cast<double>(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double w = fft::angular_frequency(k, n, eps);
    phase[k] = std::polar(1.0, -w * w * h);
  }
  return phase;
}

void apply_linear(CVector& field, const CVector& phase) {
  CVector spec = fft::forward<double>(field);
  spec.array() *= phase.array();
  field = fft::inverse<double>(spec);
}

void apply_nonlinear(CVector& field, double coeff) {
  for (auto& e : field) e *= std::polar(1.0, coeff * std::norm(e));
}

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(splitmix(master) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

NormalizedSignal ssfm_propagate(const NormalizedSignal& sig, double x_total, int steps, SplitScheme scheme) {
  if (steps < 1) throw Error(ErrorCode::invalid_config, "split-step needs at least one step");
  if (!is_power_of_two(static_cast<std::size_t>(sig.size())))
    throw Error(ErrorCode::invalid_config, "split-step grid length must be a power of two");

  NormalizedSignal out = sig;
  out.x = sig.x + x_total;
  if (x_total == 0.0) return out;

  const double h = x_total / steps;
  const double nl = 2.0 * sign(sig.kappa) * h;
  CVector& field = out.samples;

  if (scheme == SplitScheme::asymmetric) {
    const CVector full = dispersion_phase(field.size(), h);
    for (int s = 0; s < steps; ++s) {
      apply_linear(field, full);
      apply_nonlinear(field, nl);
    }
    return out;
  }

  // Strang splitting with adjacent half steps fused: L/2 N L N ... N L/2.
  const CVector half = dispersion_phase(field.size(), 0.5 * h);
  const CVector full = dispersion_phase(field.size(), h);
  apply_linear(field, half);
  for (int s = 0; s < steps; ++s) {
    apply_nonlinear(field, nl);
    apply_linear(field, s + 1 < steps ? full : half);
  }
  return out;
}

double ase_psd_per_span(const LinkConfig& link) {
  return link.loss_coeff * link.span_length * kPlanck * link.pump_freq * link.photon_occupancy;
}

PhysicalSignal add_ase(const PhysicalSignal& sig, double psd, std::uint64_t seed) {
  if (psd < 0) throw Error(ErrorCode::invalid_config, "noise density must be non-negative");
  PhysicalSignal out = sig;
  if (psd == 0.0) return out;
  const double sigma_quadrature = std::sqrt(0.5 * psd / sig.sample_interval);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma_quadrature);
  for (auto& e : out.samples) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    e += Complex(re, im);
  }
  return out;
}

PhysicalSignal propagate_link(const PhysicalSignal& sig, const LinkConfig& link, const StepConfig& steps,
                              std::uint64_t seed) {
  sig.validate();
  link.validate();
  if (steps.steps_per_span < 1) throw Error(ErrorCode::invalid_config, "steps_per_span must be >= 1");
  if (link.num_spans == 0) return sig;

  const NormalizationParams p = derive_normalization(link, sig.duration());
  const double x_span = link.span_length * p.distance_scale;
  const double psd = link.noise ? ase_psd_per_span(link) : 0.0;

  PhysicalSignal current = sig;
  for (int span = 0; span < link.num_spans; ++span) {
    NormalizedSignal norm = to_normalized(current, p);
    norm = ssfm_propagate(norm, x_span, steps.steps_per_span, steps.scheme);
    current = from_normalized(norm, p, sig.t_start);
    current = add_ase(current, psd, derive_seed(seed, static_cast<std::uint64_t>(span), 0xA5E));
  }
  return current;
}

}  // namespace nfdbp
