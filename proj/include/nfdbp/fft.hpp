#pragma once

#include "nfdbp/common.hpp"

#include <unsupported/Eigen/FFT>

namespace nfdbp::fft {

// One plan cache per thread and scalar type; Eigen::FFT keeps twiddles keyed by size.
template <typename Real>
Eigen::FFT<Real>& engine() {
  thread_local Eigen::FFT<Real> instance;
  return instance;
}

/// X_k = sum_n x_n exp(-2 pi i k n / N), unscaled.
template <typename Real>
ComplexVector<Real> forward(const ComplexVector<Real>& x) {
  ComplexVector<Real> out(x.size());
  if (x.size() == 0) return out;
  engine<Real>().fwd(out, x);
  return out;
}

/// x_n = (1/N) sum_k X_k exp(+2 pi i k n / N).
template <typename Real>
ComplexVector<Real> inverse(const ComplexVector<Real>& x) {
  ComplexVector<Real> out(x.size());
  if (x.size() == 0) return out;
  engine<Real>().inv(out, x);
  return out;
}

/// Angular frequency of DFT bin k for a grid of n samples spaced dt apart,
/// with bins at or above n/2 folded to negative frequencies.
inline double angular_frequency(Eigen::Index k, Eigen::Index n, double dt) {
  const Eigen::Index signed_k = (2 * k >= n) ? k - n : k;
  return 2.0 * kPi * static_cast<double>(signed_k) / (static_cast<double>(n) * dt);
}

}  // namespace nfdbp::fft
