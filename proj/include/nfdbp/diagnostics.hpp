#pragma once

// Discrete-spectrum instrumentation for anomalous dispersion.
//
// Bound states of the Zakharov-Shabat problem are the roots of a(z) outside the
// unit circle (Im lambda > 0 <=> |z| > 1). Their presence breaks the phase-only
// backpropagation, which acts on the real axis alone.

#include "nfdbp/common.hpp"
#include "nfdbp/normcoord.hpp"
#include "nfdbp/zscatter.hpp"

#include <vector>

namespace nfdbp {

struct SpectrumDiag {
  double l1_norm = 0.0;
  Eigen::Index bound_states = 0;
  std::vector<Complex> eigenvalues;  // Im > 0; empty if the roots could not be isolated
  bool eigenvalues_resolved = true;
  double soliton_energy = 0.0;
  double total_energy = 0.0;
  double ratio = 0.0;  // clamped to [0, 1]
};

struct EigenvalueOptions {
  Eigen::Index degree_cap = 4096;
  double radius_tol = 1e-6;  // accept roots with |z| > 1 + radius_tol
  double residual_tol = 1e-8;  // |a(z)| relative to sum |a_i| |z|^{-i}
  /// Above this many enclosed roots the moment system is skipped in favour of
  /// the full companion matrix.
  Eigen::Index max_moment_roots = 24;
  /// Largest degree for which the full companion matrix is attempted.
  Eigen::Index companion_cap = 1024;
  /// soliton_power_ratio: also try to locate the individual eigenvalues.
  bool isolate_eigenvalues = true;
};

/// epsilon * sum |E_n|, a Riemann sum of the L1 norm on the unit window.
double l1_norm(const NormalizedSignal& sig);

/// Number of roots of a(z) with |z| > 1 + tol, from the argument principle on
/// the unit circle evaluated by FFT. Throws root_count_unresolved if the
/// winding number does not settle to an integer.
Eigen::Index count_bound_states(const ScatteringPair<double>& pair, const EigenvalueOptions& opts = {});

/// Roots of a(z) with |z| > 1 + tol mapped to lambda = log(z) / (-2 i eps).
/// Empty for normal dispersion.
std::vector<Complex> find_discrete_eigenvalues(const ScatteringPair<double>& pair, const EigenvalueOptions& opts = {});

/// 4 sum Im lambda over the bound states, from Jensen's formula on |w| = 1 / (1 + tol).
/// Needs no root isolation, so it stays reliable for many eigenvalues.
double bound_state_energy(const ScatteringPair<double>& pair, const EigenvalueOptions& opts = {});

/// Full companion-matrix root finder for sum_i c_i w^i (all roots).
std::vector<Complex> companion_roots(const CVector& coeffs);

/// Energy split between the discrete spectrum (4 Im lambda per eigenvalue) and
/// the whole signal (eps sum |E_n|^2). The eigenvalue list is best effort; the
/// ratio comes from bound_state_energy.
SpectrumDiag soliton_power_ratio(const NormalizedSignal& sig, const EigenvalueOptions& opts = {});

}  // namespace nfdbp
