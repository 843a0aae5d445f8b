#include "doctest.h"

#include "nfdbp/zscatter.hpp"

#include <random>

using namespace nfdbp;

namespace {

CVector random_samples(Eigen::Index d, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVector q(d);
  for (auto& v : q) v = Complex(g(rng), g(rng)) * scale;
  return q;
}

double coefficient_error(const ScatteringPair<double>& x, const ScatteringPair<double>& ref) {
  const double scale = std::max(ref.a.cwiseAbs().maxCoeff(), ref.b.cwiseAbs().maxCoeff());
  return std::max((x.a - ref.a).cwiseAbs().maxCoeff(), (x.b - ref.b).cwiseAbs().maxCoeff()) / scale;
}

}  // namespace

TEST_CASE("rescaling by eps") {
  NormalizedSignal s;
  s.kappa = Kappa::anomalous;
  s.samples = CVector::Constant(4, 2.0);
  const CVector q = rescale_samples(s);
  for (auto v : q) CHECK(v == Complex(0.5));
  s.samples.setZero();
  CHECK(rescale_samples(s).norm() == 0.0);
  s.kappa = Kappa::normal;
  s.samples = CVector::Constant(4, 4.0);
  CHECK_THROWS_AS(rescale_samples(s), Error);
}

TEST_CASE("zero samples give the identity pair") {
  for (Eigen::Index d : {1, 7, 64}) {
    const auto pair = scatter_sequential(CVector(CVector::Zero(d)), Kappa::anomalous);
    CHECK(pair.a[0] == Complex(1));
    CHECK(pair.a.tail(d - 1).norm() == 0.0);
    CHECK(pair.b.norm() == 0.0);
  }
  const auto fast = scatter_fast(CVector(CVector::Zero(128)), Kappa::normal);
  CHECK(fast.a[0] == Complex(1));
  CHECK(fast.b.norm() == 0.0);
}

TEST_CASE("one sample, normal dispersion") {
  const Complex q(0.3, -0.2);
  CVector s(1);
  s[0] = q;
  const auto pair = scatter_sequential(s, Kappa::normal);
  const double g = std::sqrt(1 - std::norm(q));
  CHECK(std::abs(pair.a[0] - 1.0 / g) < 1e-15);
  CHECK(std::abs(pair.b[0] - std::conj(q) / g) < 1e-15);
}

TEST_CASE("two samples, both signs of kappa") {
  const Complex q1(0.2, 0.1), q2(-0.15, 0.25);
  CVector s(2);
  s << q1, q2;
  for (Kappa kappa : {Kappa::normal, Kappa::anomalous}) {
    const double k = sign(kappa);
    const double g = std::sqrt(1 + k * std::norm(q1)) * std::sqrt(1 + k * std::norm(q2));
    const auto pair = scatter_sequential(s, kappa);
    CHECK(std::abs(pair.a[0] - 1.0 / g) < 1e-15);
    CHECK(std::abs(pair.a[1] + k * q2 * std::conj(q1) / g) < 1e-15);
    CHECK(std::abs(pair.b[0] + k * std::conj(q2) / g) < 1e-15);
    CHECK(std::abs(pair.b[1] + k * std::conj(q1) / g) < 1e-15);
  }
}

TEST_CASE("normal dispersion rejects a sample on the unit circle") {
  CVector s = CVector::Zero(4);
  s[2] = 1.0;
  CHECK_THROWS_AS(scatter_sequential(s, Kappa::normal), Error);
}

TEST_CASE("fast scattering agrees with the sequential recursion") {
  for (Kappa kappa : {Kappa::normal, Kappa::anomalous}) {
    for (int trial = 0; trial < 100; ++trial) {
      const CVector q = random_samples(256, 0.02, static_cast<std::uint64_t>(trial));
      CHECK(coefficient_error(scatter_fast(q, kappa), scatter_sequential(q, kappa)) < 1e-8);
    }
  }
  CHECK_THROWS_AS(scatter_fast(random_samples(100, 0.01, 1), Kappa::normal), Error);
}

TEST_CASE("unit-circle identity |a|^2 + kappa |b|^2 = 1") {
  for (Kappa kappa : {Kappa::normal, Kappa::anomalous}) {
    const auto pair = scatter_fast(random_samples(512, 0.03, 5), kappa);
    CHECK(unit_circle_residual(pair) < 1e-12);
  }
}

TEST_CASE("evaluation at half-shifted roots of unity") {
  const Eigen::Index d = 64;
  CVector c = CVector::Zero(d);
  c[0] = Complex(2, -1);
  const CVector v0 = eval_shifted_roots(c);
  for (auto v : v0) CHECK(std::abs(v - Complex(2, -1)) < 1e-14);

  c.setZero();
  c[1] = 1.0;  // z^{-1}
  const CVector v1 = eval_shifted_roots(c);
  for (Eigen::Index n = 1; n <= d; ++n) {
    const Complex expected = std::polar(1.0, 2 * kPi * (static_cast<double>(n) - 0.5) / static_cast<double>(d));
    CHECK(std::abs(v1[n - 1] - expected) < 1e-14);
  }

  const CVector r = random_samples(d, 1.0, 11);
  const CVector v = eval_shifted_roots(r);
  double worst = 0;
  for (Eigen::Index n = 1; n <= d; ++n) {
    const Complex w = std::polar(1.0, 2 * kPi * (static_cast<double>(n) - 0.5) / static_cast<double>(d));
    worst = std::max(worst, std::abs(v[n - 1] - poly::evaluate(r, w)) / r.cwiseAbs().sum());
  }
  CHECK(worst < 1e-12);
  CHECK(relative_l2(coeffs_from_shifted_values(v), r) < 1e-13);
}

TEST_CASE("node frequencies use the principal branch") {
  CHECK(shifted_root_lambda(1, 8) == doctest::Approx(kPi * 0.5));
  CHECK(shifted_root_lambda(4, 8) == doctest::Approx(kPi * 3.5));
  CHECK(shifted_root_lambda(5, 8) == doctest::Approx(kPi * -3.5));
  CHECK(shifted_root_lambda(8, 8) == doctest::Approx(kPi * -0.5));
}

TEST_CASE("polynomial products") {
  const CVector p = random_samples(100, 1, 1), q = random_samples(70, 1, 2);
  CHECK(relative_l2(poly::multiply(p, q), poly::multiply_schoolbook(p, q)) < 1e-13);
}
