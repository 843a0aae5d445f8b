// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.

#include "nfdbp/baselines.hpp"
#include "nfdbp/channel.hpp"
#include "nfdbp/diagnostics.hpp"
#include "nfdbp/experiment.hpp"
#include "nfdbp/nfddbp.hpp"
#include "nfdbp/txrx.hpp"
#include "nfdbp/zscatter.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>

using namespace nfdbp;

namespace {

// Tolerances.
constexpr double kRoundTripTol = 1e-9;
constexpr double kRoundTripSeconds = 30.0;
constexpr double kFastVsSequentialTol = 1e-8;
constexpr double kEvolutionLawTol = 1e-2;
constexpr double kNfdEvmMax = 0.01;
constexpr double kCdcPenaltyFactor = 10.0;
constexpr double kQGapDb = 1.0;
constexpr double kLowPowerEvmGap = 1e-3;      // NFD vs dbp_ssfm EVM where L1 < pi/2
constexpr double kLowPowerWaveTol = 1e-4;     // NFD waveform error where L1 < pi/2
constexpr double kConvergenceFactor = 3.0;    // error drop when the sample step halves
constexpr double kFlatEvmFactor = 1.5;        // no degradation before the soliton threshold
constexpr double kDegradedEvmFactor = 10.0;   // degradation beyond it
constexpr double kEigenTol = 1e-2;
constexpr double kQSpotTol = 0.05;
constexpr double kScatterRatioLo = 2.0, kScatterRatioHi = 2.9;
constexpr double kFlatRuntimeTol = 0.10;
constexpr double kLinearRuntimeTol = 0.10;
constexpr double kSsfmInverseTol = 1e-6;
constexpr double kCdcInverseTol = 1e-8;

std::string g_source_dir = NFDBP_SOURCE_DIR;
int g_failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("CRITERION %d %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void info(const std::string& line) {
  std::printf("  INFO %s\n", line.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[240];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CVector random_burst_samples(Eigen::Index d, double amp, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.05, 0.25);
  const double width = u(rng);
  CVector q(d);
  for (Eigen::Index n = 0; n < d; ++n) {
    const double t = (normalized_time(n, d) + 0.5) / width;
    q[n] = Complex(g(rng), g(rng)) * amp * std::exp(-t * t);
  }
  return q;
}

double coefficient_error(const ScatteringPair<double>& x, const ScatteringPair<double>& ref) {
  const double scale = std::max(ref.a.cwiseAbs().maxCoeff(), ref.b.cwiseAbs().maxCoeff());
  return std::max((x.a - ref.a).cwiseAbs().maxCoeff(), (x.b - ref.b).cwiseAbs().maxCoeff()) / scale;
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0;
  for (Kappa kappa : {Kappa::normal, Kappa::anomalous}) {
    for (int i = 0; i < 100; ++i) {
      const CVector q = random_burst_samples(1024, 0.02, rng);
      const auto pair = scatter_fast(q, kappa);
      const CVector back = inverse_scatter_samples(pair) * pair.eps();
      worst = std::max(worst, relative_l2(back, q));
    }
  }
  const double secs = seconds_since(t0);
  report(1, worst <= kRoundTripTol && secs < kRoundTripSeconds,
         fmt("scattering round trip, 200 bursts at D = 1024: worst relative L2 %.2e (tol %.0e), %.1f s", worst,
             kRoundTripTol, secs));
}

void criterion2() {
  std::mt19937_64 rng(202);
  double worst = 0;
  for (Eigen::Index d : {256, 1024, 4096}) {
    for (Kappa kappa : {Kappa::normal, Kappa::anomalous}) {
      const CVector q = random_burst_samples(d, 0.02, rng);
      worst = std::max(worst, coefficient_error(scatter_fast(q, kappa), scatter_sequential(q, kappa)));
    }
  }
  report(2, worst <= kFastVsSequentialTol,
         fmt("fast vs sequential scattering at D = 256, 1024, 4096: worst coefficient error %.2e (tol %.0e)", worst,
             kFastVsSequentialTol));
}

void criterion3() {
  const Eigen::Index d = 2048;
  const double x1 = 1e-3;
  const int steps = 2000;
  NormalizedSignal s;
  s.kappa = Kappa::anomalous;
  s.samples.resize(d);
  for (Eigen::Index n = 0; n < d; ++n) {
    const double t = (normalized_time(n, d) + 0.5) / 0.03;
    s.samples[n] = Complex(1.0, 0.3 * t) * 12.0 * std::exp(-t * t);
  }
  const NormalizedSignal out = ssfm_propagate(s, x1, steps);
  const auto p0 = scatter_fast(rescale_samples(s), s.kappa);
  const auto p1 = scatter_fast(rescale_samples(out), out.kappa);
  const CVector a0 = eval_shifted_roots(p0.a), a1 = eval_shifted_roots(p1.a);
  const CVector b0 = eval_shifted_roots(p0.b), b1 = eval_shifted_roots(p1.b);
  CVector pred_minus(d), pred_plus(d);
  for (Eigen::Index n = 1; n <= d; ++n) {
    const double lam = shifted_root_lambda(n, d);
    pred_minus[n - 1] = std::polar(1.0, -4 * lam * lam * x1) * b1[n - 1];
    pred_plus[n - 1] = std::polar(1.0, 4 * lam * lam * x1) * b1[n - 1];
  }
  const double a_err = (a1 - a0).cwiseAbs().maxCoeff() / a0.cwiseAbs().maxCoeff();
  const double b_err = (pred_minus - b0).cwiseAbs().maxCoeff() / b0.cwiseAbs().maxCoeff();
  const double b_err_plus = (pred_plus - b0).cwiseAbs().maxCoeff() / b0.cwiseAbs().maxCoeff();
  report(3, a_err <= kEvolutionLawTol && b_err <= kEvolutionLawTol,
         fmt("evolution law at D = 2048 after x1 = %.0e (2000 steps): a drift %.2e, b(0) vs exp(-4i lambda^2 x1) "
             "b(x1) %.2e",
             x1, a_err, b_err) +
             fmt(" (tol %.0e)", kEvolutionLawTol) +
             fmt(", energy %.1f", s.eps() * s.samples.squaredNorm()));
  info(fmt("the opposite phase sign exp(+4i lambda^2 x1) gives %.2e", b_err_plus));
  info(fmt("L1 norm of the burst %.3f", l1_norm(s)));
}

const MetricsRow* find_row(const MetricsReport& r, double power, const std::string& eq) {
  for (const auto& row : r.rows)
    if (row.power_dbm == power && row.equalizer == eq) return &row;
  return nullptr;
}

void criterion4() {
  ExperimentConfig base = load_config(g_source_dir + "/configs/desk_normal_nyquist.json");
  base.threads = 0;

  ExperimentConfig clean = base;
  clean.link.noise = false;
  clean.trials = 1;
  const MetricsReport r0 = run_experiment(clean);
  const double top = clean.power_sweep_dbm.back();
  const MetricsRow* nfd_top = find_row(r0, top, "nfd");
  const MetricsRow* cdc_top = find_row(r0, top, "cdc");
  bool ok = nfd_top && cdc_top && r0.errors.empty();
  ok = ok && nfd_top->evm <= kNfdEvmMax && cdc_top->evm >= kCdcPenaltyFactor * nfd_top->evm;

  // Degradation point: first power at which the NFD Q falls below its value at
  // the previous power. Comparison runs over the powers before it.
  ExperimentConfig noisy = base;
  const MetricsReport r1 = run_experiment(noisy);
  double degradation = std::numeric_limits<double>::infinity();
  double prev_q = -std::numeric_limits<double>::infinity();
  for (double p : noisy.power_sweep_dbm) {
    const MetricsRow* a = find_row(r1, p, "nfd");
    if (!a) continue;
    if (a->q_db < prev_q) {
      degradation = p;
      break;
    }
    prev_q = a->q_db;
  }
  double worst_gap = 0;
  int compared = 0;
  for (double p : noisy.power_sweep_dbm) {
    const MetricsRow* a = find_row(r1, p, "nfd");
    const MetricsRow* b = find_row(r1, p, "dbp_ssfm_40");
    if (!a || !b) {
      ok = false;
      continue;
    }
    const bool below = p < degradation;
    info(fmt("ASE on, %+.0f dBm: Q nfd %.2f dB, dbp_ssfm_40 %.2f dB", p, a->q_db, b->q_db) +
         (below ? "" : "  (at or beyond the NFD degradation point)"));
    if (!below) continue;
    worst_gap = std::max(worst_gap, std::abs(a->q_db - b->q_db));
    ++compared;
  }
  ok = ok && r1.errors.empty() && compared > 0 && worst_gap <= kQGapDb;
  report(4, ok,
         fmt("normal-dispersion Nyquist, 4 spans, noiseless at %+.0f dBm: NFD EVM %.4f, CDC EVM %.4f", top,
             nfd_top ? nfd_top->evm : NAN, cdc_top ? cdc_top->evm : NAN) +
             fmt("; with ASE, worst |Q_nfd - Q_dbp| %.2f dB over %.0f powers (tol %.1f dB)", worst_gap, compared,
                 kQGapDb));
}

double nfd_waveform_error(const ExperimentConfig& cfg, std::size_t power_index) {
  const LaunchedBurst b = launch_burst(cfg, power_index, 0);
  const PhysicalSignal rx = propagate_link(b.frame.wave, cfg.link, {cfg.forward_steps_per_span, SplitScheme::symmetric}, 1);
  const PhysicalSignal y = apply_equalizer(cfg, EqualizerSpec{}, rx);
  return relative_l2(y.samples, b.frame.wave.samples);
}

void criterion5() {
  ExperimentConfig cfg = load_config(g_source_dir + "/configs/desk_anomalous_ofdm.json");
  cfg.trials = 1;
  cfg.threads = 0;
  const MetricsReport r = run_experiment(cfg);
  bool ok = r.errors.empty();
  for (const auto& e : r.errors) info("error at " + fmt("%+.0f dBm: ", e.power_dbm) + e.message);

  struct Point {
    double power, l1, ratio, nfd, dbp;
  };
  std::vector<Point> pts;
  for (double p : cfg.power_sweep_dbm) {
    const MetricsRow* n = find_row(r, p, "nfd");
    const MetricsRow* d = find_row(r, p, "dbp_ssfm_40");
    if (!n || !d) {
      ok = false;
      continue;
    }
    pts.push_back({p, n->l1_norm, n->soliton_ratio, n->evm, d->evm});
    info(fmt("%+.0f dBm: L1 %.3f, soliton ratio %.4f, ", p, n->l1_norm, n->soliton_ratio) +
         fmt("EVM nfd %.4f, dbp_ssfm_40 %.4f", n->evm, d->evm));
  }

  // Low power: L1 below pi/2.
  std::size_t low_index = cfg.power_sweep_dbm.size();
  double low_evm_gap = 0, low_wave = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].l1 < kPi / 2)) continue;
    if (low_index == cfg.power_sweep_dbm.size()) low_index = i;
    low_evm_gap = std::max(low_evm_gap, std::abs(pts[i].nfd - pts[i].dbp));
    low_wave = std::max(low_wave, nfd_waveform_error(cfg, i));
  }
  const bool have_low = low_index < pts.size();
  ok = ok && have_low && low_evm_gap <= kLowPowerEvmGap && low_wave <= kLowPowerWaveTol;

  // Convergence of the low-power waveform error when the sample step halves.
  double coarse = NAN, fine = NAN;
  if (have_low) {
    ExperimentConfig c4 = cfg;
    c4.ofdm.oversampling = 4;
    c4.framing.window_samples = cfg.framing.window_samples / 2;
    c4.framing.nfd_window_pad = cfg.framing.nfd_window_pad / 2;
    coarse = nfd_waveform_error(c4, low_index);
    fine = nfd_waveform_error(cfg, low_index);
    ok = ok && coarse >= kConvergenceFactor * fine;
  }

  // Threshold: first power with a nonzero soliton ratio.
  std::size_t sol = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].ratio > 0 || std::isnan(pts[i].ratio)) {
      sol = i;
      break;
    }
  }
  bool monotone = true;
  for (std::size_t i = 1; i < pts.size(); ++i) monotone &= pts[i].ratio >= pts[i - 1].ratio - 1e-12;
  const bool found = sol > 0 && sol < pts.size();
  double flat = 0, degraded = 0;
  if (found && have_low) {
    const double ref = pts[low_index].nfd;
    for (std::size_t i = 0; i < sol; ++i) flat = std::max(flat, pts[i].nfd / ref);
    for (std::size_t i = sol; i < pts.size(); ++i) degraded = std::max(degraded, pts[i].nfd / ref);
  }
  ok = ok && found && monotone && flat <= kFlatEvmFactor && degraded >= kDegradedEvmFactor;
  report(5, ok,
         fmt("anomalous OFDM: where L1 < pi/2, |EVM_nfd - EVM_dbp| %.1e and waveform error %.2e; ", low_evm_gap,
             low_wave) +
             fmt("soliton ratio departs at %+.0f dBm, NFD EVM below it <= %.2fx, beyond it up to %.0fx the low-power value",
                 found ? pts[sol].power : NAN, flat, degraded));
  info(fmt("NFD waveform error at the lowest power: %.2e with 4x oversampling, %.2e with 8x (ratio %.1f)", coarse,
           fine, coarse / fine));
  info(fmt("the round-trip tolerance %.0e of criterion 1 is not reached end to end: waveform error %.2e",
           kRoundTripTol, low_wave));
}

NormalizedSignal random_small_burst(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  NormalizedSignal s;
  s.kappa = Kappa::anomalous;
  s.samples.resize(d);
  const double width = 0.01 + 0.2 * u(rng);
  const double chirp = 200 * (u(rng) - 0.5);
  const double centre = -0.5 + 0.2 * (u(rng) - 0.5);
  for (Eigen::Index n = 0; n < d; ++n) {
    const double t = normalized_time(n, d) - centre;
    const double env = std::exp(-t * t / (2 * width * width));
    s.samples[n] = Complex(g(rng), g(rng)) * env * std::polar(1.0, chirp * t * t);
  }
  // L1 drawn up to just below the bound.
  s.samples *= (0.05 + 0.95 * u(rng)) * 0.999 * (kPi / 2) / l1_norm(s);
  return s;
}

void criterion6() {
  std::mt19937_64 rng(606);
  int empty = 0;
  double max_l1 = 0;
  for (int i = 0; i < 100; ++i) {
    const NormalizedSignal s = random_small_burst(1024, rng);
    max_l1 = std::max(max_l1, l1_norm(s));
    const auto pair = scatter_fast(rescale_samples(s), s.kappa);
    if (find_discrete_eigenvalues(pair).empty()) ++empty;
  }
  // q = (N / w) sech(t / w) has one eigenvalue at i (N - 1/2) / w for N < 3/2.
  const Eigen::Index d = 2048;
  const double w = 0.04, order = 0.52;
  NormalizedSignal sech;
  sech.kappa = Kappa::anomalous;
  sech.samples.resize(d);
  for (Eigen::Index n = 0; n < d; ++n) sech.samples[n] = order / w / std::cosh((normalized_time(n, d) + 0.5) / w);
  const auto lambdas = find_discrete_eigenvalues(scatter_fast(rescale_samples(sech), sech.kappa));
  const double dev = lambdas.size() == 1 ? std::abs(lambdas[0] - Complex(0, 0.5)) : NAN;
  report(6, empty == 100 && lambdas.size() == 1 && dev <= kEigenTol,
         fmt("%.0f/100 bursts with L1 < pi/2 (largest %.3f) have no eigenvalues; ", empty, max_l1) +
             fmt("sech case at D = 2048 finds %.0f eigenvalue(s), |lambda - i/2| = %.1e (tol %.0e)",
                 static_cast<double>(lambdas.size()), dev, kEigenTol));
}

void criterion7() {
  const double q1 = q_factor(0.0228), q2 = q_factor(1e-3);
  std::mt19937_64 rng(707);
  CVector s(256);
  const CVector c = constellation(ModFormat::qpsk);
  for (auto& v : s) v = c[static_cast<Eigen::Index>(rng() % 4)];
  const double e_exact = evm(s, s);
  const double e_gain = evm(CVector(s * std::polar(2.5, 0.7)), s);
  const bool ok = std::abs(q1 - 6.02) <= kQSpotTol && std::abs(q2 - 9.80) <= kQSpotTol && e_exact == 0.0 &&
                  e_gain < 1e-14 && std::isinf(q_factor(0.0));
  report(7, ok,
         fmt("Q(0.0228) = %.3f dB, Q(1e-3) = %.3f dB (tol %.2f)", q1, q2, kQSpotTol) +
             fmt("; EVM exact %.1e, after complex gain %.1e", e_exact, e_gain));
}

void criterion8() {
  BenchConfig bc;
  bc.repetitions = 9;  // minimum over more repetitions, the host timing is noisy
  const BenchReport r = bench_scaling(bc);
  bool ok = true;
  double lo = 1e9, hi = 0;
  for (std::size_t i = 1; i < r.scaling.size(); ++i) {
    lo = std::min(lo, r.scaling[i].scatter_ratio);
    hi = std::max(hi, r.scaling[i].scatter_ratio);
    const double k = std::log2(static_cast<double>(r.scaling[i - 1].size));
    info(fmt("D = %.0f: scatter ratio %.3f (model %.3f), ", static_cast<double>(r.scaling[i].size),
             r.scaling[i].scatter_ratio, 2 * std::pow((k + 1) / k, 2)) +
         fmt("back-rotation %.3f, inverse %.3f", r.scaling[i].backrotate_ratio, r.scaling[i].inverse_ratio));
  }
  ok = ok && lo >= kScatterRatioLo && hi <= kScatterRatioHi;

  double mean_nfd = 0;
  for (const auto& s : r.spans) mean_nfd += s.nfd_ms;
  mean_nfd /= static_cast<double>(r.spans.size());
  double nfd_dev = 0;
  for (const auto& s : r.spans) nfd_dev = std::max(nfd_dev, std::abs(s.nfd_ms / mean_nfd - 1));

  // Least-squares line t = c0 + c1 M through the dbp_ssfm timings.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(r.spans.size());
  for (const auto& s : r.spans) {
    sx += s.spans;
    sy += s.dbp_ssfm_ms;
    sxx += static_cast<double>(s.spans) * s.spans;
    sxy += s.spans * s.dbp_ssfm_ms;
  }
  const double c1 = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double c0 = (sy - c1 * sx) / m;
  double lin_dev = 0;
  for (const auto& s : r.spans) {
    lin_dev = std::max(lin_dev, std::abs(c0 + c1 * s.spans - s.dbp_ssfm_ms) / s.dbp_ssfm_ms);
    info(fmt("%.0f spans: dbp_ssfm %.1f ms, nfd %.1f ms", s.spans, s.dbp_ssfm_ms, s.nfd_ms));
  }
  const double growth = r.spans.back().dbp_ssfm_ms / r.spans.front().dbp_ssfm_ms;
  const double span_growth = static_cast<double>(r.spans.back().spans) / r.spans.front().spans;
  ok = ok && nfd_dev <= kFlatRuntimeTol && lin_dev <= kLinearRuntimeTol && growth >= 0.5 * span_growth;
  report(8, ok,
         fmt("scatter_fast doubling ratios in [%.3f, %.3f] (allowed [2.0, 2.9]); ", lo, hi) +
             fmt("NFD runtime within %.1f%% of its mean over 2-16 spans; dbp_ssfm off a line by at most %.1f%%",
                 100 * nfd_dev, 100 * lin_dev));
}

void criterion9() {
  ExperimentConfig cfg = load_config(g_source_dir + "/configs/desk_normal_nyquist.json");
  cfg.link.noise = false;
  const LaunchedBurst b = launch_burst(cfg, cfg.power_sweep_dbm.size() - 1, 0);
  const int steps = 80;
  const PhysicalSignal rx = propagate_link(b.frame.wave, cfg.link, {steps, SplitScheme::symmetric}, 1);
  const double e_ssfm = relative_l2(dbp_ssfm(rx, cfg.link, steps).samples, b.frame.wave.samples);

  LinkConfig linear = cfg.link;
  linear.gamma_nl = 1e-15;
  const PhysicalSignal rx_lin = propagate_link(b.frame.wave, linear, {4, SplitScheme::symmetric}, 1);
  const double e_cdc = relative_l2(cdc(rx_lin, linear).samples, b.frame.wave.samples);
  report(9, e_ssfm <= kSsfmInverseTol && e_cdc <= kCdcInverseTol,
         fmt("noiseless link undone by dbp_ssfm at %.0f steps/span: %.2e (tol %.0e); ", steps, e_ssfm,
             kSsfmInverseTol) +
             fmt("cdc on the gamma -> 0 link: %.2e (tol %.0e)", e_cdc, kCdcInverseTol));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_source_dir = argv[1];
  const std::vector<std::function<void()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("threw: ") + e.what());
    }
    info(fmt("criterion %.0f took %.1f s", static_cast<double>(i + 1), seconds_since(t0)));
  }
  std::printf("%s: %d of %zu criteria failed\n", g_failures ? "FAILED" : "ALL PASSED", g_failures, criteria.size());
  return g_failures ? 1 : 0;
}
