#pragma once

// Backpropagation in the nonlinear Fourier domain: forward scattering of the
// received window, analytic undoing of the spatial evolution of b, and layer
// peeling back to the fiber input.

#include "nfdbp/common.hpp"
#include "nfdbp/normcoord.hpp"
#include "nfdbp/polynomial.hpp"
#include "nfdbp/zscatter.hpp"

#include <vector>

namespace nfdbp {

/// Phase that maps b(x1, lambda_n) to b(0, lambda_n) for the normalized NSE,
/// lambda_n on the principal branch of node n (1-based).
inline Complex backrotation_factor(Eigen::Index n, Eigen::Index d, double x1) {
  const double lambda = shifted_root_lambda(n, d);
  return std::polar(1.0, -4.0 * lambda * lambda * x1);
}

/// Moves the pair from position pair.x to pair.x - distance. a is invariant; b is
/// rotated node by node and re-interpolated.
template <typename Real>
ScatteringPair<Real> backrotate(const ScatteringPair<Real>& pair, double distance) {
  ScatteringPair<Real> out = pair;
  out.x = pair.x - distance;
  if (distance == 0.0) return out;
  const Eigen::Index d = pair.size();
  ComplexVector<Real> values = eval_shifted_roots(pair.b);
  for (Eigen::Index n = 1; n <= d; ++n) {
    const Complex f = backrotation_factor(n, d, distance);
    values[n - 1] *= std::complex<Real>(static_cast<Real>(f.real()), static_cast<Real>(f.imag()));
  }
  out.b = coeffs_from_shifted_values(values);
  return out;
}

template <typename Real>
struct LayerPeel {
  std::complex<Real> sample;  // rescaled sample q of the outermost layer
  ComplexVector<Real> a;
  ComplexVector<Real> b;
};

namespace detail {

template <typename Real>
std::complex<Real> peel_sample(const std::complex<Real>& a0, const std::complex<Real>& b0, Kappa kappa) {
  if (a0 == std::complex<Real>(0)) throw Error(ErrorCode::degenerate_pair, "leading coefficient of a is zero");
  const std::complex<Real> ratio = b0 / a0;
  if (kappa == Kappa::normal && !(std::abs(ratio) < Real(1)))
    throw Error(ErrorCode::non_contractive_pair, "|b0 / a0| >= 1 with normal dispersion");
  return std::conj(-static_cast<Real>(sign(kappa)) * ratio);
}

/// In-place peel of the outermost layer on the leading `len` coefficients.
/// Afterwards the leading len - 1 coefficients hold the reduced pair.
template <typename Real>
std::complex<Real> peel_in_place(ComplexVector<Real>& a, ComplexVector<Real>& b, Eigen::Index len, Kappa kappa) {
  const std::complex<Real> q = peel_sample(a[0], b[0], kappa);
  const Real k = static_cast<Real>(sign(kappa));
  const Real inv_g = Real(1) / std::sqrt(Real(1) + k * std::norm(q));
  const std::complex<Real> kq = k * std::conj(q);
  for (Eigen::Index i = 0; i + 1 < len; ++i) {
    const std::complex<Real> a_new = (a[i] - q * b[i]) * inv_g;
    b[i] = (kq * a[i + 1] + b[i + 1]) * inv_g;
    a[i] = a_new;
  }
  return q;
}

template <typename Real>
struct PeelBlock {
  std::vector<std::complex<Real>> samples;  // in peeling order
  poly::PolyMatrix2<Real> inverse;          // w^m times the inverse transfer matrix
};

inline constexpr Eigen::Index kPeelLeafSize = 64;

template <typename Real>
PeelBlock<Real> peel_leaf(const ComplexVector<Real>& a_in, const ComplexVector<Real>& b_in, Eigen::Index m,
                          Kappa kappa, bool need_matrix) {
  using CV = ComplexVector<Real>;
  PeelBlock<Real> out;
  out.samples.reserve(static_cast<std::size_t>(m));
  CV a = a_in.head(m);
  CV b = b_in.head(m);
  const Real k = static_cast<Real>(sign(kappa));
  if (need_matrix) {
    for (auto& e : out.inverse.entries) e = CV::Zero(m + 1);
    out.inverse(0, 0)[0] = 1;
    out.inverse(1, 1)[0] = 1;
  }
  for (Eigen::Index step = 0; step < m; ++step) {
    const std::complex<Real> q = peel_in_place(a, b, m - step, kappa);
    out.samples.push_back(q);
    if (!need_matrix) continue;
    // F = [[w, -q w], [kappa conj(q), 1]] / gamma applied from the left.
    const Real inv_g = Real(1) / std::sqrt(Real(1) + k * std::norm(q));
    const std::complex<Real> kq = k * std::conj(q);
    for (int c = 0; c < 2; ++c) {
      CV& top = out.inverse(0, c);
      CV& bot = out.inverse(1, c);
      for (Eigen::Index i = step + 1; i >= 0; --i) {
        const std::complex<Real> top_prev = i > 0 ? top[i - 1] : std::complex<Real>(0);
        const std::complex<Real> bot_prev = i > 0 ? bot[i - 1] : std::complex<Real>(0);
        const std::complex<Real> top_i = top[i];
        top[i] = (top_prev - q * bot_prev) * inv_g;
        bot[i] = (kq * top_i + bot[i]) * inv_g;
      }
    }
  }
  return out;
}

/// Coefficients [shift, shift + len) of n(0,0) a + n(0,1) b and n(1,0) a + n(1,1) b.
template <typename Real>
std::array<ComplexVector<Real>, 2> apply_shifted(const poly::PolyMatrix2<Real>& n, const ComplexVector<Real>& a,
                                                 const ComplexVector<Real>& b, Eigen::Index shift, Eigen::Index len) {
  poly::PolyMatrix2<Real> col;
  col(0, 0) = a;
  col(1, 0) = b;
  col(0, 1) = ComplexVector<Real>::Zero(a.size());
  col(1, 1) = ComplexVector<Real>::Zero(a.size());
  auto prod = poly::multiply_first_column(n, col);
  return {ComplexVector<Real>(prod[0].segment(shift, len)), ComplexVector<Real>(prod[1].segment(shift, len))};
}

template <typename Real>
PeelBlock<Real> peel_recursive(const ComplexVector<Real>& a, const ComplexVector<Real>& b, Eigen::Index m,
                               Kappa kappa, bool need_matrix) {
  if (m <= kPeelLeafSize) return peel_leaf(a, b, m, kappa, need_matrix);
  const Eigen::Index h = m / 2;
  PeelBlock<Real> first = peel_recursive<Real>(a.head(h), b.head(h), h, kappa, true);
  auto reduced = apply_shifted<Real>(first.inverse, a.head(m), b.head(m), h, m - h);
  PeelBlock<Real> second = peel_recursive<Real>(reduced[0], reduced[1], m - h, kappa, need_matrix);
  PeelBlock<Real> out;
  out.samples = std::move(first.samples);
  out.samples.insert(out.samples.end(), second.samples.begin(), second.samples.end());
  if (need_matrix) out.inverse = poly::multiply(second.inverse, first.inverse);
  return out;
}

}  // namespace detail

/// Removes the outermost layer M_D from (a, b).
template <typename Real>
LayerPeel<Real> invert_layer(const ComplexVector<Real>& a, const ComplexVector<Real>& b, Kappa kappa) {
  if (a.size() != b.size() || a.size() == 0)
    throw Error(ErrorCode::length_mismatch, "a and b must be non-empty and equally long");
  LayerPeel<Real> out;
  out.a = a;
  out.b = b;
  out.sample = detail::peel_in_place(out.a, out.b, a.size(), kappa);
  out.a.conservativeResize(a.size() - 1);
  out.b.conservativeResize(a.size() - 1);
  return out;
}

enum class InverseMode { reference, fast };

/// Layer peeling back to samples of E on the unit window. The reference mode
/// peels one layer at a time (O(D^2)); the fast mode splits the pair, peels the
/// first half recursively and carries its inverse transfer matrix across with
/// FFT products (O(D log^2 D)).
template <typename Real>
ComplexVector<Real> inverse_scatter_samples(const ScatteringPair<Real>& pair, InverseMode mode = InverseMode::reference) {
  const Eigen::Index d = pair.size();
  if (pair.b.size() != d || d == 0) throw Error(ErrorCode::length_mismatch, "a and b must be non-empty and equally long");
  ComplexVector<Real> q(d);
  if (mode == InverseMode::reference) {
    ComplexVector<Real> a = pair.a;
    ComplexVector<Real> b = pair.b;
    for (Eigen::Index len = d; len >= 1; --len) q[len - 1] = detail::peel_in_place(a, b, len, pair.kappa);
  } else {
    auto block = detail::peel_recursive<Real>(pair.a, pair.b, d, pair.kappa, false);
    for (Eigen::Index j = 0; j < d; ++j) q[d - 1 - j] = block.samples[static_cast<std::size_t>(j)];
  }
  return q / pair.eps();
}

inline NormalizedSignal inverse_scatter(const ScatteringPair<double>& pair, InverseMode mode = InverseMode::reference) {
  NormalizedSignal out;
  out.samples = inverse_scatter_samples(pair, mode);
  out.kappa = pair.kappa;
  out.x = pair.x;
  return out;
}

struct DbpNfdConfig {
  double x1 = 0.0;                // normalized distance to undo
  Eigen::Index window_pad = 0;    // zero samples added on each side
  InverseMode inverse_mode = InverseMode::reference;
};

struct DbpNfdReport {
  double unit_circle_residual = 0.0;  // after back-rotation, before peeling
  double l1_norm = 0.0;               // of the reconstructed input
  bool soliton_risk = false;          // anomalous dispersion and l1_norm >= pi/2
};

/// Forward scattering, back-rotation of b by x1, layer peeling.
NormalizedSignal dbp_nfd(const NormalizedSignal& received, const DbpNfdConfig& cfg, DbpNfdReport* report = nullptr);

}  // namespace nfdbp
