// Command-line front end: launch-power sweeps, the scaling benchmark and a
// quick self-test.

#include "nfdbp/diagnostics.hpp"
#include "nfdbp/experiment.hpp"
#include "nfdbp/nfddbp.hpp"
#include "nfdbp/txrx.hpp"
#include "nfdbp/zscatter.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

namespace {

int run_command(const std::string& config_path, const std::string& out_path, const std::string& format,
                std::optional<std::uint64_t> seed, bool desk_scale, std::optional<int> threads) {
  nfdbp::ExperimentConfig cfg = nfdbp::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (desk_scale) nfdbp::apply_desk_scale(cfg);
  const nfdbp::OutputFormat fmt = nfdbp::parse_output_format(format);

  const nfdbp::MetricsReport report = nfdbp::run_experiment(cfg);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& e : report.errors)
    std::cerr << "error at " << e.power_dbm << " dBm, trial " << e.trial << ", " << e.equalizer << ": " << e.message
              << '\n';
  if (out_path.empty() || out_path == "-") {
    if (fmt == nfdbp::OutputFormat::csv) std::cout << nfdbp::results_csv(report);
    else std::cout << nfdbp::results_json(report).dump(2) << '\n';
  } else {
    nfdbp::emit_results(report, out_path, fmt);
  }
  return 0;
}

int bench_command(const std::vector<long long>& sizes, const std::vector<int>& spans, int reps,
                  const std::string& out_path) {
  nfdbp::BenchConfig cfg;
  if (!sizes.empty()) cfg.sizes.assign(sizes.begin(), sizes.end());
  if (!spans.empty()) cfg.span_counts = spans;
  cfg.repetitions = reps;
  const std::string table = nfdbp::bench_table(nfdbp::bench_scaling(cfg));
  if (out_path.empty() || out_path == "-") {
    std::cout << table;
  } else {
    std::ofstream out(out_path);
    if (!out) throw nfdbp::Error(nfdbp::ErrorCode::io, "cannot open '" + out_path + "'");
    out << table;
  }
  return 0;
}

bool report_check(const char* name, bool ok, double value) {
  std::printf("%-44s %-4s %.3e\n", name, ok ? "ok" : "FAIL", value);
  return ok;
}

int selftest_command(std::uint64_t seed) {
  using namespace nfdbp;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  bool ok = true;

  const Eigen::Index d = 256;
  CVector q(d);
  for (auto& v : q) v = Complex(gauss(rng), gauss(rng)) * 0.02;
  for (Kappa k : {Kappa::normal, Kappa::anomalous}) {
    const auto slow = scatter_sequential(q, k);
    const auto fast = scatter_fast(q, k);
    const double dev = std::max((fast.a - slow.a).cwiseAbs().maxCoeff(), (fast.b - slow.b).cwiseAbs().maxCoeff()) /
                       std::max(slow.a.cwiseAbs().maxCoeff(), slow.b.cwiseAbs().maxCoeff());
    ok &= report_check(k == Kappa::normal ? "fast scattering, normal" : "fast scattering, anomalous", dev < 1e-8, dev);
    const CVector back = inverse_scatter_samples(fast) / static_cast<double>(d);
    const double err = relative_l2(back, q);
    ok &= report_check("scattering round trip", err < 1e-9, err);
  }
  const double q6 = q_factor(0.0228);
  ok &= report_check("Q at BER 0.0228 [dB]", std::abs(q6 - 6.02) < 0.05, q6);

  NormalizedSignal soliton;
  soliton.kappa = Kappa::anomalous;
  soliton.samples.resize(1024);
  for (Eigen::Index n = 0; n < 1024; ++n) soliton.samples[n] = 20.0 / std::cosh(20.0 * (normalized_time(n, 1024) + 0.5));
  const auto diag = soliton_power_ratio(soliton);
  ok &= report_check("single soliton power ratio", diag.eigenvalues.size() == 1 && std::abs(diag.ratio - 1) < 0.05,
                     diag.ratio);
  std::printf("%s\n", ok ? "selftest passed" : "selftest FAILED");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear-Fourier-domain digital backpropagation"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool desk_scale = false;
  auto* run = app.add_subcommand("run", "Launch-power sweep described by a JSON config");
  run->add_option("config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Master seed (overrides the config)");
  run->add_option("--out", out_path, "Output file, '-' for stdout");
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--desk-scale", desk_scale, "Clamp sizes to the desk-scale preset");
  run->add_option("--threads", threads, "Worker threads, 0 for all cores");

  std::vector<long long> sizes;
  std::vector<int> spans;
  int reps = 3;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Runtime scaling of the transform steps and of both backpropagators");
  bench->add_option("--sizes", sizes, "Window sizes (powers of two)");
  bench->add_option("--spans", spans, "Span counts for the length sweep");
  bench->add_option("--reps", reps, "Repetitions per point (minimum reported)")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "Output file, '-' for stdout");

  std::uint64_t selftest_seed = 1;
  auto* selftest = app.add_subcommand("selftest", "Fast consistency checks");
  selftest->add_option("--seed", selftest_seed, "Random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config_path, out_path, format, seed, desk_scale, threads);
    if (*bench) return bench_command(sizes, spans, reps, bench_out);
    if (*selftest) return selftest_command(selftest_seed);
  } catch (const nfdbp::Error& e) {
    std::cerr << "nfdbp: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
