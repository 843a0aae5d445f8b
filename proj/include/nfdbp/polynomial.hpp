#pragma once

// Dense polynomial arithmetic in the delay variable w = z^{-1}.
// Coefficients are stored lowest degree first.

#include "nfdbp/common.hpp"
#include "nfdbp/fft.hpp"

#include <array>

namespace nfdbp::poly {

/// Below this many coefficients in the shorter operand, products are formed directly.
inline constexpr Eigen::Index kSchoolbookCutoff = 48;

template <typename Real>
ComplexVector<Real> multiply_schoolbook(const ComplexVector<Real>& p, const ComplexVector<Real>& q) {
  if (p.size() == 0 || q.size() == 0) return ComplexVector<Real>();
  ComplexVector<Real> out = ComplexVector<Real>::Zero(p.size() + q.size() - 1);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    out.segment(i, q.size()) += p[i] * q;
  }
  return out;
}

template <typename Real>
ComplexVector<Real> zero_padded(const ComplexVector<Real>& p, Eigen::Index n) {
  ComplexVector<Real> out = ComplexVector<Real>::Zero(n);
  out.head(p.size()) = p;
  return out;
}

template <typename Real>
ComplexVector<Real> multiply(const ComplexVector<Real>& p, const ComplexVector<Real>& q) {
  if (p.size() == 0 || q.size() == 0) return ComplexVector<Real>();
  if (std::min(p.size(), q.size()) <= kSchoolbookCutoff) return multiply_schoolbook(p, q);
  const Eigen::Index out_len = p.size() + q.size() - 1;
  const auto n = static_cast<Eigen::Index>(next_power_of_two(static_cast<std::size_t>(out_len)));
  ComplexVector<Real> prod = fft::forward<Real>(zero_padded(p, n)).cwiseProduct(fft::forward<Real>(zero_padded(q, n)));
  return fft::inverse<Real>(prod).head(out_len);
}

/// 2x2 matrix whose entries are polynomials in w.
template <typename Real>
struct PolyMatrix2 {
  std::array<ComplexVector<Real>, 4> entries;

  ComplexVector<Real>& operator()(int row, int col) { return entries[2 * row + col]; }
  const ComplexVector<Real>& operator()(int row, int col) const { return entries[2 * row + col]; }

  /// Number of stored coefficients per entry (all entries share one length).
  Eigen::Index length() const { return entries[0].size(); }

  static PolyMatrix2 identity() {
    PolyMatrix2 m;
    for (auto& e : m.entries) e = ComplexVector<Real>::Zero(1);
    m(0, 0)[0] = 1;
    m(1, 1)[0] = 1;
    return m;
  }
};

/// left * right, entries padded to a common length.
template <typename Real>
PolyMatrix2<Real> multiply(const PolyMatrix2<Real>& left, const PolyMatrix2<Real>& right) {
  const Eigen::Index out_len = left.length() + right.length() - 1;
  PolyMatrix2<Real> out;
  if (std::min(left.length(), right.length()) <= kSchoolbookCutoff) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        out(r, c) = multiply_schoolbook(left(r, 0), right(0, c)) + multiply_schoolbook(left(r, 1), right(1, c));
      }
    }
    return out;
  }
  const auto n = static_cast<Eigen::Index>(next_power_of_two(static_cast<std::size_t>(out_len)));
  std::array<ComplexVector<Real>, 4> lf, rf;
  for (int k = 0; k < 4; ++k) {
    lf[k] = fft::forward<Real>(zero_padded(left.entries[k], n));
    rf[k] = fft::forward<Real>(zero_padded(right.entries[k], n));
  }
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      ComplexVector<Real> spec = lf[2 * r].cwiseProduct(rf[c]) + lf[2 * r + 1].cwiseProduct(rf[2 + c]);
      out(r, c) = fft::inverse<Real>(spec).head(out_len);
    }
  }
  return out;
}

/// First column of left * right; enough to apply a transfer matrix to (1, 0)^T.
template <typename Real>
std::array<ComplexVector<Real>, 2> multiply_first_column(const PolyMatrix2<Real>& left, const PolyMatrix2<Real>& right) {
  const Eigen::Index out_len = left.length() + right.length() - 1;
  if (std::min(left.length(), right.length()) <= kSchoolbookCutoff) {
    return {multiply_schoolbook(left(0, 0), right(0, 0)) + multiply_schoolbook(left(0, 1), right(1, 0)),
            multiply_schoolbook(left(1, 0), right(0, 0)) + multiply_schoolbook(left(1, 1), right(1, 0))};
  }
  const auto n = static_cast<Eigen::Index>(next_power_of_two(static_cast<std::size_t>(out_len)));
  std::array<ComplexVector<Real>, 4> lf;
  for (int k = 0; k < 4; ++k) lf[k] = fft::forward<Real>(zero_padded(left.entries[k], n));
  const ComplexVector<Real> r00 = fft::forward<Real>(zero_padded(right(0, 0), n));
  const ComplexVector<Real> r10 = fft::forward<Real>(zero_padded(right(1, 0), n));
  return {fft::inverse<Real>(ComplexVector<Real>(lf[0].cwiseProduct(r00) + lf[1].cwiseProduct(r10))).head(out_len),
          fft::inverse<Real>(ComplexVector<Real>(lf[2].cwiseProduct(r00) + lf[3].cwiseProduct(r10))).head(out_len)};
}

/// Horner evaluation of sum_i c_i w^i.
template <typename Real>
std::complex<Real> evaluate(const ComplexVector<Real>& c, std::complex<Real> w) {
  std::complex<Real> acc = 0;
  for (Eigen::Index i = c.size(); i-- > 0;) acc = acc * w + c[i];
  return acc;
}

}  // namespace nfdbp::poly
