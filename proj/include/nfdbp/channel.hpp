#pragma once

#include "nfdbp/common.hpp"
#include "nfdbp/link.hpp"
#include "nfdbp/normcoord.hpp"

#include <cstdint>

namespace nfdbp {

enum class SplitScheme { symmetric, asymmetric };

struct StepConfig {
  int steps_per_span = 80;
  SplitScheme scheme = SplitScheme::symmetric;
};

/// Split-step Fourier solution of the normalized NSE over x_total (may be negative).
/// Linear step: spectrum * exp(-i w^2 h), w = 2 pi k on the unit window.
/// Nonlinear step: field * exp(2 i kappa |E|^2 h).
NormalizedSignal ssfm_propagate(const NormalizedSignal& sig, double x_total, int steps,
                                SplitScheme scheme = SplitScheme::symmetric);

/// One-sided ASE density per span, N = loss * span_length * h * f_pump * K_T  [W/Hz].
double ase_psd_per_span(const LinkConfig& link);

/// Adds circular complex Gaussian noise of per-sample variance psd / sample_interval.
PhysicalSignal add_ase(const PhysicalSignal& sig, double psd, std::uint64_t seed);

/// Span-by-span propagation: lossless normalized split-step, then ASE (when link.noise).
PhysicalSignal propagate_link(const PhysicalSignal& sig, const LinkConfig& link, const StepConfig& steps,
                              std::uint64_t seed);

/// Deterministic 64-bit seed mixer (splitmix64 finalizer over the combined words).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

}  // namespace nfdbp
