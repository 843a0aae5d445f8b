#pragma once

// Discrete Zakharov-Shabat forward scattering.
//
// Each rescaled sample q_n = eps * E_n contributes the one-step transfer matrix
//
//   M_n(w) = [[1, q_n w], [-kappa conj(q_n), w]] / sqrt(1 + kappa |q_n|^2),   w = z^{-1},
//
// and (a, b)^T = M_D ... M_1 (1, 0)^T. The half-integer powers of z that appear
// in the continuous-to-discrete mapping cancel against the initial condition and
// are never formed.

#include "nfdbp/common.hpp"
#include "nfdbp/fft.hpp"
#include "nfdbp/normcoord.hpp"
#include "nfdbp/polynomial.hpp"

#include <sstream>

namespace nfdbp {

template <typename Real>
struct ScatteringPair {
  ComplexVector<Real> a;  // a[i] multiplies z^{-i}
  ComplexVector<Real> b;
  Kappa kappa = Kappa::anomalous;
  double x = 0.0;

  Eigen::Index size() const { return a.size(); }
  Real eps() const { return Real(1) / static_cast<Real>(a.size()); }
};

/// eps * E_n. For kappa = -1 every |eps E_n| must stay below one.
inline CVector rescale_samples(const NormalizedSignal& sig) {
  if (sig.size() == 0) throw Error(ErrorCode::invalid_config, "signal has no samples");
  CVector q = sig.samples * sig.eps();
  if (sig.kappa == Kappa::normal) {
    for (Eigen::Index n = 0; n < q.size(); ++n) {
      if (std::abs(q[n]) >= 1.0) {
        std::ostringstream why;
        why << "rescaled sample " << n << " has magnitude " << std::abs(q[n]) << " >= 1";
        throw Error(ErrorCode::normalizer_singularity, why.str());
      }
    }
  }
  return q;
}

namespace detail {

template <typename Real>
Real layer_normalizer(const std::complex<Real>& q, Kappa kappa, Eigen::Index n) {
  const Real g2 = Real(1) + static_cast<Real>(sign(kappa)) * std::norm(q);
  if (!(g2 > Real(0))) {
    std::ostringstream why;
    why << "sample " << n << " has |q| = " << std::abs(q) << " >= 1 with normal dispersion";
    throw Error(ErrorCode::normalizer_singularity, why.str());
  }
  return std::sqrt(g2);
}

/// Transfer matrix of samples[first, last): M_{last-1} ... M_first, schoolbook accumulation.
template <typename Real>
poly::PolyMatrix2<Real> leaf_transfer(const ComplexVector<Real>& q, Eigen::Index first, Eigen::Index last, Kappa kappa) {
  using CV = ComplexVector<Real>;
  const Eigen::Index m = last - first;
  const Real k = static_cast<Real>(sign(kappa));
  poly::PolyMatrix2<Real> t;
  for (auto& e : t.entries) e = CV::Zero(m + 1);
  t(0, 0)[0] = 1;
  t(1, 1)[0] = 1;
  // Entries of the running product never exceed degree (step count).
  for (Eigen::Index n = first, len = 1; n < last; ++n, ++len) {
    const std::complex<Real> qn = q[n];
    const Real inv_g = Real(1) / layer_normalizer(qn, kappa, n);
    for (int c = 0; c < 2; ++c) {
      CV& top = t(0, c);
      CV& bot = t(1, c);
      // Descending index so the shifted read sees pre-update values.
      for (Eigen::Index i = len; i >= 0; --i) {
        const std::complex<Real> top_i = top[i];
        const std::complex<Real> bot_prev = i > 0 ? bot[i - 1] : std::complex<Real>(0);
        top[i] = (top_i + qn * bot_prev) * inv_g;
        bot[i] = (-k * std::conj(qn) * top_i + bot_prev) * inv_g;
      }
    }
  }
  return t;
}

template <typename Real>
poly::PolyMatrix2<Real> subtree_transfer(const ComplexVector<Real>& q, Eigen::Index first, Eigen::Index last,
                                         Kappa kappa, Eigen::Index leaf) {
  if (last - first <= leaf) return leaf_transfer(q, first, last, kappa);
  const Eigen::Index mid = first + (last - first) / 2;
  // Later samples multiply from the left.
  return poly::multiply(subtree_transfer(q, mid, last, kappa, leaf), subtree_transfer(q, first, mid, kappa, leaf));
}

}  // namespace detail

/// O(D^2) reference: iterate the recursion directly on coefficient arrays.
template <typename Real>
ScatteringPair<Real> scatter_sequential(const ComplexVector<Real>& samples, Kappa kappa) {
  const Eigen::Index d = samples.size();
  if (d < 1) throw Error(ErrorCode::invalid_config, "scattering needs at least one sample");
  const Real k = static_cast<Real>(sign(kappa));
  ComplexVector<Real> a = ComplexVector<Real>::Zero(d);
  ComplexVector<Real> b = ComplexVector<Real>::Zero(d);
  a[0] = 1;
  for (Eigen::Index n = 0; n < d; ++n) {
    const std::complex<Real> q = samples[n];
    const Real inv_g = Real(1) / detail::layer_normalizer(q, kappa, n);
    // After n+1 steps both polynomials have degree <= n.
    for (Eigen::Index i = n; i >= 0; --i) {
      const std::complex<Real> a_i = a[i];
      const std::complex<Real> b_prev = i > 0 ? b[i - 1] : std::complex<Real>(0);
      a[i] = (a_i + q * b_prev) * inv_g;
      b[i] = (-k * std::conj(q) * a_i + b_prev) * inv_g;
    }
  }
  ScatteringPair<Real> out;
  out.a = std::move(a);
  out.b = std::move(b);
  out.kappa = kappa;
  return out;
}

inline constexpr Eigen::Index kScatterLeafSize = 32;

/// Balanced product tree of transfer matrices with FFT-based polynomial products:
/// O(D log^2 D). Same result as scatter_sequential up to rounding.
template <typename Real>
ScatteringPair<Real> scatter_fast(const ComplexVector<Real>& samples, Kappa kappa,
                                  Eigen::Index leaf = kScatterLeafSize) {
  const Eigen::Index d = samples.size();
  if (!is_power_of_two(static_cast<std::size_t>(d)))
    throw Error(ErrorCode::invalid_config, "fast scattering needs a power-of-two sample count");
  ScatteringPair<Real> out;
  out.kappa = kappa;
  if (d <= leaf) {
    auto t = detail::leaf_transfer(samples, 0, d, kappa);
    out.a = t(0, 0).head(d);
    out.b = t(1, 0).head(d);
    return out;
  }
  const Eigen::Index mid = d / 2;
  auto col = poly::multiply_first_column(detail::subtree_transfer(samples, mid, d, kappa, leaf),
                                         detail::subtree_transfer(samples, Eigen::Index(0), mid, kappa, leaf));
  out.a = col[0].head(d);
  out.b = col[1].head(d);
  return out;
}

/// Values p(w^{n - 1/2}), n = 1..D, w = exp(-2 pi i / D), of p(z) = sum_i c_i z^{-i}.
/// With half_shift = false the nodes are the plain roots of unity w^n.
template <typename Real>
ComplexVector<Real> eval_shifted_roots(const ComplexVector<Real>& coeffs, bool half_shift = true) {
  const Eigen::Index d = coeffs.size();
  ComplexVector<Real> v = coeffs;
  if (half_shift) {
    for (Eigen::Index i = 0; i < d; ++i)
      v[i] *= std::polar(Real(1), -static_cast<Real>(kPi) * static_cast<Real>(i) / static_cast<Real>(d));
  }
  // sum_i v_i exp(+2 pi i i n / D) is D times the inverse DFT at bin n mod D.
  const ComplexVector<Real> t = fft::inverse<Real>(v) * static_cast<Real>(d);
  ComplexVector<Real> out(d);
  for (Eigen::Index n = 1; n <= d; ++n) out[n - 1] = t[n % d];
  return out;
}

/// Exact inverse of eval_shifted_roots.
template <typename Real>
ComplexVector<Real> coeffs_from_shifted_values(const ComplexVector<Real>& values, bool half_shift = true) {
  const Eigen::Index d = values.size();
  ComplexVector<Real> t(d);
  for (Eigen::Index n = 1; n <= d; ++n) t[n % d] = values[n - 1];
  ComplexVector<Real> c = fft::forward<Real>(t) / static_cast<Real>(d);
  if (half_shift) {
    for (Eigen::Index i = 0; i < d; ++i)
      c[i] *= std::polar(Real(1), static_cast<Real>(kPi) * static_cast<Real>(i) / static_cast<Real>(d));
  }
  return c;
}

/// Principal-branch spectral parameter of node n (1-based): lambda = log(z_n) / (-2 i eps)
/// with z_n = w^{n - 1/2}, giving lambda in (-pi D / 2, pi D / 2].
inline double shifted_root_lambda(Eigen::Index n, Eigen::Index d) {
  double m = static_cast<double>(n) - 0.5;
  if (m > 0.5 * static_cast<double>(d)) m -= static_cast<double>(d);
  return kPi * m;
}

/// max over the shifted-root nodes of | |a|^2 + kappa |b|^2 - 1 |.
template <typename Real>
double unit_circle_residual(const ScatteringPair<Real>& pair) {
  const ComplexVector<Real> av = eval_shifted_roots(pair.a);
  const ComplexVector<Real> bv = eval_shifted_roots(pair.b);
  double worst = 0;
  for (Eigen::Index i = 0; i < av.size(); ++i) {
    const double r = static_cast<double>(std::norm(av[i]) + static_cast<Real>(sign(pair.kappa)) * std::norm(bv[i]) - Real(1));
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace nfdbp
