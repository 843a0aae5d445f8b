#include "nfdbp/diagnostics.hpp"

#include "nfdbp/fft.hpp"
#include "nfdbp/polynomial.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <optional>

namespace nfdbp {

namespace {

constexpr Eigen::Index kMinContourPoints = Eigen::Index(1) << 15;
constexpr Eigen::Index kMaxContourPoints = Eigen::Index(1) << 22;

struct ContourMoments {
  std::vector<Complex> s;  // s_k = sum over enclosed roots of w^k
  Eigen::Index points = 0;
};

// Trapezoidal rule for (1 / 2 pi i) \oint u^k p'(w) / p(w) dw on |w| = r, u = (w - center) / scale.
ContourMoments contour_moments(const CVector& coeffs, double r, Eigen::Index points, int max_power,
                               Complex center = 0.0, double scale = 1.0) {
  const Eigen::Index n = coeffs.size();
  CVector p = CVector::Zero(points);
  CVector dp = CVector::Zero(points);
  double rp = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    p[i % points] += coeffs[i] * rp;
    dp[i % points] += coeffs[i] * rp * static_cast<double>(i);
    rp *= r;
  }
  // Values at w_j = r exp(2 pi i j / M) are M times the inverse DFT.
  const double m = static_cast<double>(points);
  const CVector pv = fft::inverse<double>(p) * m;
  const CVector dpv = fft::inverse<double>(dp) * m;
  ContourMoments out;
  out.points = points;
  out.s.assign(static_cast<std::size_t>(max_power + 1), Complex(0));
  for (Eigen::Index j = 0; j < points; ++j) {
    const Complex ratio = dpv[j] / pv[j];
    const Complex wj = std::polar(r, 2.0 * kPi * static_cast<double>(j) / m);
    const Complex uj = (wj - center) / scale;
    Complex uk(1.0);
    for (int k = 0; k <= max_power; ++k) {
      out.s[static_cast<std::size_t>(k)] += uk * ratio;
      uk *= uj;
    }
  }
  for (auto& v : out.s) v /= m;
  return out;
}

bool near_integer(const Complex& v, double tol) {
  return std::abs(v.imag()) < tol && std::abs(v.real() - std::round(v.real())) < tol;
}

// Winding number settles once two successive refinements agree on an integer.
ContourMoments settled_moments(const CVector& coeffs, double r, int max_power) {
  Eigen::Index points = std::max(kMinContourPoints,
                                 static_cast<Eigen::Index>(next_power_of_two(static_cast<std::size_t>(8 * coeffs.size()))));
  ContourMoments prev = contour_moments(coeffs, r, points, 0);
  while (points < kMaxContourPoints) {
    points *= 2;
    ContourMoments next = contour_moments(coeffs, r, points, 0);
    if (near_integer(prev.s[0], 1e-6) && near_integer(next.s[0], 1e-6) &&
        std::round(prev.s[0].real()) == std::round(next.s[0].real())) {
      return max_power == 0 ? next : contour_moments(coeffs, r, points, max_power);
    }
    prev = std::move(next);
  }
  throw Error(ErrorCode::root_count_unresolved, "winding number of a(z) did not settle");
}

// Newton on p(w) / prod (w - found), which keeps iterates off roots already found.
Complex polish_root(const CVector& c, Complex w, const std::vector<Complex>& found, bool* converged) {
  *converged = false;
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    Complex p = 0, dp = 0;
    for (Eigen::Index i = c.size(); i-- > 0;) {
      dp = dp * w + p;
      p = p * w + c[i];
    }
    if (p == Complex(0)) {
      *converged = true;
      return w;
    }
    Complex logd = dp / p;
    for (const Complex& f : found) logd -= 1.0 / (w - f);
    if (logd == Complex(0)) return w;
    const Complex step = 1.0 / logd;
    const double size = std::abs(step);
    // Near the root the step settles at rounding level and stops shrinking.
    if (size <= 1e-14 * std::max(1.0, std::abs(w)) || (size <= 1e-10 && size >= 0.5 * last_step)) {
      *converged = true;
      return w - step;
    }
    w -= step;
    last_step = size;
  }
  return w;
}

double relative_residual(const CVector& c, Complex w) {
  Complex p = 0;
  double scale = 0;
  const double aw = std::abs(w);
  for (Eigen::Index i = c.size(); i-- > 0;) {
    p = p * w + c[i];
    scale = scale * aw + std::abs(c[i]);
  }
  return scale > 0 ? std::abs(p) / scale : std::abs(p);
}

// Roots w with |w| < r that survive Newton polishing and the residual check.
std::vector<Complex> accept_roots(const CVector& c, const std::vector<Complex>& guesses, double r, double residual_tol) {
  std::vector<Complex> out;
  for (const Complex& g : guesses) {
    bool converged = false;
    const Complex w = polish_root(c, g, out, &converged);
    if (!converged || !(std::abs(w) < r)) continue;
    if (relative_residual(c, w) > residual_tol) continue;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Complex& o) { return std::abs(o - w) < 1e-9; });
    if (!duplicate) out.push_back(w);
  }
  return out;
}

std::vector<Complex> moment_roots(const ContourMoments& mom, Eigen::Index count, Complex center, double scale) {
  Eigen::MatrixXcd h0(count, count), h1(count, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < count; ++j) {
      h0(i, j) = mom.s[static_cast<std::size_t>(i + j)];
      h1(i, j) = mom.s[static_cast<std::size_t>(i + j + 1)];
    }
  }
  const Eigen::MatrixXcd pencil = h0.fullPivLu().solve(h1);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(pencil, false);
  std::vector<Complex> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(center + scale * es.eigenvalues()[i]);
  return out;
}

// Mean of log |p| over M points of |w| = r.
double mean_log_modulus(const CVector& coeffs, double r, Eigen::Index points) {
  CVector p = CVector::Zero(points);
  double rp = 1.0;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    p[i % points] += coeffs[i] * rp;
    rp *= r;
  }
  const CVector pv = fft::inverse<double>(p) * static_cast<double>(points);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < points; ++j) sum += std::log(std::abs(pv[j]));
  return sum / static_cast<double>(points);
}

}  // namespace

double l1_norm(const NormalizedSignal& sig) {
  if (sig.size() == 0) return 0.0;
  return sig.eps() * sig.samples.cwiseAbs().sum();
}

std::vector<Complex> companion_roots(const CVector& coeffs) {
  Eigen::Index n = coeffs.size();
  const double largest = n > 0 ? coeffs.cwiseAbs().maxCoeff() : 0.0;
  while (n > 0 && std::abs(coeffs[n - 1]) <= 1e-14 * largest) --n;
  const Eigen::Index degree = n - 1;
  if (degree < 1) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
  companion.diagonal(-1).setOnes();
  companion.col(degree - 1) = -coeffs.head(degree) / coeffs[degree];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
  std::vector<Complex> roots(static_cast<std::size_t>(degree));
  for (Eigen::Index i = 0; i < degree; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
  return roots;
}

namespace {

double jensen_energy(const ScatteringPair<double>& pair, double r, const ContourMoments& settled) {
  const CVector& c = pair.a;
  const double n = std::round(settled.s[0].real());
  if (n == 0) return 0.0;
  if (std::abs(c[0]) == 0.0) throw Error(ErrorCode::root_count_unresolved, "a(w) vanishes at w = 0");
  // Jensen: sum log(r / |w_k|) = mean log |a| on the circle - log |a(0)|.
  const double jensen = mean_log_modulus(c, r, settled.points) - std::log(std::abs(c[0]));
  return 2.0 * (jensen - n * std::log(r)) / pair.eps();
}

// Roots inside |w| < r. `settled` is null when the winding number did not settle.
std::vector<Complex> isolate_roots(const ScatteringPair<double>& pair, const EigenvalueOptions& opts, double r,
                                   const ContourMoments* settled) {
  const CVector& c = pair.a;
  const Eigen::Index degree = pair.size() - 1;
  if (settled) {
    const auto n = static_cast<Eigen::Index>(std::llround(settled->s[0].real()));
    if (n == 0) return {};
    if (n <= opts.max_moment_roots) {
      // Roots bunch up near w = 1, so the Hankel pencil is built about their centroid.
      const ContourMoments raw = contour_moments(c, r, settled->points, 2);
      const Complex center = raw.s[1] / static_cast<double>(n);
      const Complex spread2 = raw.s[2] / static_cast<double>(n) - center * center;
      const double scale = std::max(std::sqrt(std::abs(spread2)), 1e-6);
      const ContourMoments mom = contour_moments(c, r, settled->points, static_cast<int>(2 * n), center, scale);
      std::vector<Complex> inside = accept_roots(c, moment_roots(mom, n, center, scale), r, opts.residual_tol);
      if (static_cast<Eigen::Index>(inside.size()) == n) return inside;
    }
  }
  if (degree > opts.companion_cap) {
    throw Error(ErrorCode::root_count_unresolved,
                "moment system failed and degree " + std::to_string(degree) + " exceeds the companion cap");
  }
  return accept_roots(c, companion_roots(c), r, opts.residual_tol);
}

std::vector<Complex> to_lambdas(const std::vector<Complex>& inside, double eps) {
  std::vector<Complex> lambdas;
  for (const Complex& w : inside) {
    const Complex lambda = Complex(0, -1) * std::log(w) / (2.0 * eps);
    if (lambda.imag() > 0) lambdas.push_back(lambda);
  }
  std::sort(lambdas.begin(), lambdas.end(), [](const Complex& x, const Complex& y) { return x.imag() > y.imag(); });
  return lambdas;
}

void check_degree(const ScatteringPair<double>& pair, const EigenvalueOptions& opts) {
  const Eigen::Index degree = pair.size() - 1;
  if (degree > opts.degree_cap) {
    throw Error(ErrorCode::degree_too_large,
                "a(z) has degree " + std::to_string(degree) + " > cap " + std::to_string(opts.degree_cap));
  }
}

double inner_radius(const EigenvalueOptions& opts) { return 1.0 / (1.0 + opts.radius_tol); }

}  // namespace

Eigen::Index count_bound_states(const ScatteringPair<double>& pair, const EigenvalueOptions& opts) {
  if (pair.kappa == Kappa::normal) return 0;
  const ContourMoments mom = settled_moments(pair.a, inner_radius(opts), 0);
  return static_cast<Eigen::Index>(std::llround(mom.s[0].real()));
}

double bound_state_energy(const ScatteringPair<double>& pair, const EigenvalueOptions& opts) {
  if (pair.kappa == Kappa::normal) return 0.0;
  const double r = inner_radius(opts);
  return jensen_energy(pair, r, settled_moments(pair.a, r, 0));
}

// Work in w = 1/z, where a is an ordinary polynomial and bound states lie inside |w| < r.
std::vector<Complex> find_discrete_eigenvalues(const ScatteringPair<double>& pair, const EigenvalueOptions& opts) {
  if (pair.kappa == Kappa::normal) return {};
  check_degree(pair, opts);
  const double r = inner_radius(opts);
  std::optional<ContourMoments> settled;
  try {
    settled = settled_moments(pair.a, r, 0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::root_count_unresolved) throw;
  }
  return to_lambdas(isolate_roots(pair, opts, r, settled ? &*settled : nullptr), pair.eps());
}

SpectrumDiag soliton_power_ratio(const NormalizedSignal& sig, const EigenvalueOptions& opts) {
  SpectrumDiag diag;
  diag.l1_norm = l1_norm(sig);
  diag.total_energy = sig.eps() * sig.samples.squaredNorm();
  if (sig.kappa == Kappa::normal || sig.size() == 0) return diag;

  const CVector q = rescale_samples(sig);
  const ScatteringPair<double> pair = is_power_of_two(static_cast<std::size_t>(q.size()))
                                          ? scatter_fast(q, sig.kappa)
                                          : scatter_sequential(q, sig.kappa);
  check_degree(pair, opts);
  const double r = inner_radius(opts);
  const ContourMoments settled = settled_moments(pair.a, r, 0);
  diag.bound_states = static_cast<Eigen::Index>(std::llround(settled.s[0].real()));
  if (diag.bound_states == 0) return diag;
  diag.soliton_energy = std::max(0.0, jensen_energy(pair, r, settled));
  if (diag.total_energy > 0) diag.ratio = std::clamp(diag.soliton_energy / diag.total_energy, 0.0, 1.0);
  if (!opts.isolate_eigenvalues) {
    diag.eigenvalues_resolved = false;
    return diag;
  }
  try {
    diag.eigenvalues = to_lambdas(isolate_roots(pair, opts, r, &settled), pair.eps());
    diag.eigenvalues_resolved = static_cast<Eigen::Index>(diag.eigenvalues.size()) == diag.bound_states;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::root_count_unresolved) throw;
    diag.eigenvalues.clear();
    diag.eigenvalues_resolved = false;
  }
  return diag;
}

}  // namespace nfdbp
