#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nfdbp {

template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using CVector = ComplexVector<double>;

/// Sign of the Kerr term in the normalized NSE: normal dispersion maps to -1,
/// anomalous dispersion to +1.
enum class Kappa : int { normal = -1, anomalous = 1 };

constexpr int sign(Kappa k) { return static_cast<int>(k); }

enum class ErrorCode {
  invalid_config,
  window_mismatch,
  normalizer_singularity,
  degenerate_pair,
  non_contractive_pair,
  degree_too_large,
  root_count_unresolved,
  undefined_q,
  length_mismatch,
  zero_reference,
  io,
  parse,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config: return "invalid config";
    case ErrorCode::window_mismatch: return "window mismatch";
    case ErrorCode::normalizer_singularity: return "normalizer singularity";
    case ErrorCode::degenerate_pair: return "degenerate pair";
    case ErrorCode::non_contractive_pair: return "non-contractive pair";
    case ErrorCode::degree_too_large: return "degree too large";
    case ErrorCode::root_count_unresolved: return "root count unresolved";
    case ErrorCode::undefined_q: return "undefined Q";
    case ErrorCode::length_mismatch: return "length mismatch";
    case ErrorCode::zero_reference: return "zero reference";
    case ErrorCode::io: return "I/O error";
    case ErrorCode::parse: return "parse error";
  }
  return "error";
}

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline constexpr double kPi = std::numbers::pi;

/// ||x - ref||_2 / ||ref||_2, or the absolute norm when ref is zero.
template <typename DerivedA, typename DerivedB>
double relative_l2(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& ref) {
  const double denom = static_cast<double>(ref.norm());
  const double num = static_cast<double>((x - ref).norm());
  return denom > 0 ? num / denom : num;
}

}  // namespace nfdbp
