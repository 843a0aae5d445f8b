#pragma once

// Launch-power sweeps with Monte Carlo trials over a simulated link, and the
// scaling benchmark.

#include "nfdbp/channel.hpp"
#include "nfdbp/common.hpp"
#include "nfdbp/link.hpp"
#include "nfdbp/nfddbp.hpp"
#include "nfdbp/txrx.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nfdbp {

inline constexpr int kConfigSchemaVersion = 1;

enum class TransceiverKind { nyquist, ofdm };
enum class EqualizerKind { none, nfd, dbp_ssfm, cdc };

struct EqualizerSpec {
  EqualizerKind kind = EqualizerKind::nfd;
  int steps_per_span = 40;                       // dbp_ssfm only
  InverseMode inverse_mode = InverseMode::reference;  // nfd only

  std::string label() const;
};

struct FramingConfig {
  Eigen::Index window_samples = 4096;
  Eigen::Index gate_flat = 0;      // samples kept at full weight beyond the payload
  Eigen::Index gate_shoulder = 0;  // raised-cosine roll-off samples
  double guard_factor = 1.1;       // required guard as a multiple of the dispersion memory
  bool strict_guard = false;       // short guard: error instead of warning
  Eigen::Index nfd_window_pad = 0; // zero samples added on each side before scattering
  double tx_lowpass_ghz = 0.0;     // raised-cosine transmit filter edge, 0 for none
};

struct ExperimentConfig {
  LinkConfig link;
  TransceiverKind transceiver = TransceiverKind::nyquist;
  NyquistConfig nyquist;
  OfdmConfig ofdm;
  ModFormat format = ModFormat::qpsk;
  FramingConfig framing;
  int forward_steps_per_span = 80;
  std::vector<EqualizerSpec> equalizers;
  std::vector<double> power_sweep_dbm;
  int trials = 1;
  std::uint64_t seed = 1;
  bool desk_scale = false;
  bool spectrum_diagnostics = true;  // eigenvalue search on anomalous links
  bool record_timing = false;        // off keeps output byte-identical across runs
  int threads = 0;                   // 0: hardware concurrency

  void validate() const;
};

/// Reduced sizes for interactive runs: window <= 4096, spans <= 10, packets <= 64 symbols.
void apply_desk_scale(ExperimentConfig& cfg);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a over the canonical JSON dump.
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct MetricsRow {
  double power_dbm = 0.0;
  std::string equalizer;
  double evm = 0.0;
  double ber = 0.0;
  double q_db = 0.0;
  double l1_norm = 0.0;
  double soliton_ratio = 0.0;
  double runtime_ms = 0.0;
  int trials = 0;
  double evm_ci = 0.0;  // 95% half-width of the mean EVM

  bool operator==(const MetricsRow&) const = default;
};

struct CellError {
  double power_dbm = 0.0;
  int trial = 0;
  std::string equalizer;
  std::string message;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::vector<CellError> errors;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  nlohmann::json config;
};

/// Transmitted burst at one launch power, before the link.
struct LaunchedBurst {
  CVector symbols;
  BurstFrame frame;  // frame.wave is scaled to the launch power
};

LaunchedBurst launch_burst(const ExperimentConfig& cfg, std::size_t power_index, int trial);

/// Received window through one equalizer.
PhysicalSignal apply_equalizer(const ExperimentConfig& cfg, const EqualizerSpec& eq, const PhysicalSignal& rx);

/// Payload symbols of an equalized window.
CVector demodulate_burst(const ExperimentConfig& cfg, const PhysicalSignal& sig, const BurstFrame& frame);

/// One burst through the whole chain at one launch power.
struct TrialOutcome {
  std::vector<double> evm;            // per equalizer, NaN on failure
  std::vector<std::string> failures;  // per equalizer, empty on success
  std::vector<double> runtime_ms;
  double l1_norm = 0.0;               // normalized transmitted window
  double soliton_ratio = 0.0;
  double dispersion_memory = 0.0;
  double guard_time = 0.0;
};

TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t power_index, int trial);

MetricsReport run_experiment(const ExperimentConfig& cfg);

enum class OutputFormat { csv, json };

OutputFormat parse_output_format(const std::string& name);

std::string results_csv(const MetricsReport& report);
nlohmann::json results_json(const MetricsReport& report);
void emit_results(const MetricsReport& report, const std::string& path, OutputFormat format);

std::vector<MetricsRow> parse_results_csv(const std::string& text);

struct ScalingRow {
  Eigen::Index size = 0;
  double scatter_ms = 0.0;
  double backrotate_ms = 0.0;
  double inverse_ms = 0.0;  // fast layer peeling
  double scatter_ratio = 0.0;  // T(D) / T(D/2), 0 for the first row
  double backrotate_ratio = 0.0;
  double inverse_ratio = 0.0;
};

struct SpanRow {
  int spans = 0;
  double dbp_ssfm_ms = 0.0;
  double nfd_ms = 0.0;
};

struct BenchReport {
  std::vector<ScalingRow> scaling;
  std::vector<SpanRow> spans;
  Eigen::Index span_window = 0;
  int steps_per_span = 0;
};

struct BenchConfig {
  std::vector<Eigen::Index> sizes{4096, 8192, 16384, 32768, 65536};
  std::vector<int> span_counts{2, 4, 8, 16};
  Eigen::Index span_window = 4096;
  int steps_per_span = 40;
  int repetitions = 3;  // minimum over repetitions is reported
  std::uint64_t seed = 7;
};

BenchReport bench_scaling(const BenchConfig& cfg);

std::string bench_table(const BenchReport& report);

}  // namespace nfdbp
