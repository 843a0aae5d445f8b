#include "nfdbp/experiment.hpp"

#include "nfdbp/baselines.hpp"
#include "nfdbp/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace nfdbp {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw Error(ErrorCode::parse, "unknown key '" + item.key() + "' in " + where);
  }
}

const char* to_string(EqualizerKind kind) {
  switch (kind) {
    case EqualizerKind::none: return "none";
    case EqualizerKind::nfd: return "nfd";
    case EqualizerKind::dbp_ssfm: return "dbp_ssfm";
    case EqualizerKind::cdc: return "cdc";
  }
  return "none";
}

EqualizerKind parse_equalizer_kind(const std::string& s) {
  if (s == "none") return EqualizerKind::none;
  if (s == "nfd") return EqualizerKind::nfd;
  if (s == "dbp_ssfm") return EqualizerKind::dbp_ssfm;
  if (s == "cdc") return EqualizerKind::cdc;
  throw Error(ErrorCode::parse, "unknown equalizer '" + s + "'");
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string EqualizerSpec::label() const {
  if (kind == EqualizerKind::dbp_ssfm) return "dbp_ssfm_" + std::to_string(steps_per_span);
  if (kind == EqualizerKind::nfd && inverse_mode == InverseMode::fast) return "nfd_fast";
  return to_string(kind);
}

void ExperimentConfig::validate() const {
  link.validate();
  if (trials < 1) throw Error(ErrorCode::invalid_config, "trials must be >= 1");
  if (forward_steps_per_span < 1) throw Error(ErrorCode::invalid_config, "forward_steps_per_span must be >= 1");
  if (!is_power_of_two(static_cast<std::size_t>(framing.window_samples)))
    throw Error(ErrorCode::invalid_config, "window_samples must be a power of two");
  if (framing.tx_lowpass_ghz < 0) throw Error(ErrorCode::invalid_config, "tx_lowpass_ghz must be >= 0");
  if (framing.gate_flat < 0 || framing.gate_shoulder < 0 || framing.nfd_window_pad < 0)
    throw Error(ErrorCode::invalid_config, "gate and padding lengths must be non-negative");
  if (transceiver == TransceiverKind::nyquist && nyquist.symbols_per_packet < 1)
    throw Error(ErrorCode::invalid_config, "symbols_per_packet must be >= 1");
  if (transceiver == TransceiverKind::ofdm && ofdm.symbols_per_packet < 1)
    throw Error(ErrorCode::invalid_config, "symbols_per_packet must be >= 1");
  for (const auto& eq : equalizers) {
    if (eq.kind == EqualizerKind::dbp_ssfm && eq.steps_per_span < 1)
      throw Error(ErrorCode::invalid_config, "dbp_ssfm steps_per_span must be >= 1");
  }
}

void apply_desk_scale(ExperimentConfig& cfg) {
  cfg.desk_scale = true;
  cfg.framing.window_samples = std::min<Eigen::Index>(cfg.framing.window_samples, 4096);
  cfg.link.num_spans = std::min(cfg.link.num_spans, 10);
  cfg.nyquist.symbols_per_packet = std::min<Eigen::Index>(cfg.nyquist.symbols_per_packet, 64);
  cfg.forward_steps_per_span = std::min(cfg.forward_steps_per_span, 80);
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  const LinkConfig& l = cfg.link;
  // SI fields only, so that parsing the echo reproduces the config exactly.
  j["link"] = {
      {"span_length_m", l.span_length},
      {"num_spans", l.num_spans},
      {"loss_per_m", l.loss_coeff},
      {"beta2_s2_per_m", l.beta2},
      {"gamma_per_w_m", l.gamma_nl},
      {"pump_freq_hz", l.pump_freq},
      {"photon_occupancy", l.photon_occupancy},
      {"carrier_wavelength_m", l.carrier_wavelength},
      {"noise", l.noise},
  };
  if (cfg.transceiver == TransceiverKind::nyquist) {
    j["transceiver"] = {{"kind", "nyquist"},
                        {"baud_rate_hz", cfg.nyquist.baud_rate},
                        {"symbols_per_packet", cfg.nyquist.symbols_per_packet},
                        {"oversampling", cfg.nyquist.oversampling}};
  } else {
    j["transceiver"] = {{"kind", "ofdm"},
                        {"ifft_size", cfg.ofdm.ifft_size},
                        {"active_subcarriers", cfg.ofdm.active_subcarriers},
                        {"symbol_duration_s", cfg.ofdm.symbol_duration},
                        {"oversampling", cfg.ofdm.oversampling},
                        {"symbols_per_packet", cfg.ofdm.symbols_per_packet}};
  }
  j["format"] = to_string(cfg.format);
  j["framing"] = {{"window_samples", cfg.framing.window_samples}, {"gate_flat", cfg.framing.gate_flat},
                  {"gate_shoulder", cfg.framing.gate_shoulder},   {"guard_factor", cfg.framing.guard_factor},
                  {"strict_guard", cfg.framing.strict_guard},     {"nfd_window_pad", cfg.framing.nfd_window_pad},
                  {"tx_lowpass_ghz", cfg.framing.tx_lowpass_ghz}};
  j["forward_steps_per_span"] = cfg.forward_steps_per_span;
  j["equalizers"] = json::array();
  for (const auto& eq : cfg.equalizers) {
    json e = {{"kind", to_string(eq.kind)}};
    if (eq.kind == EqualizerKind::dbp_ssfm) e["steps_per_span"] = eq.steps_per_span;
    if (eq.kind == EqualizerKind::nfd) e["inverse_mode"] = eq.inverse_mode == InverseMode::fast ? "fast" : "reference";
    j["equalizers"].push_back(e);
  }
  j["power_sweep_dbm"] = cfg.power_sweep_dbm;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["desk_scale"] = cfg.desk_scale;
  j["spectrum_diagnostics"] = cfg.spectrum_diagnostics;
  j["record_timing"] = cfg.record_timing;
  j["threads"] = cfg.threads;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  try {
    reject_unknown(j,
                   {"schema_version", "link", "transceiver", "format", "framing", "forward_steps_per_span",
                    "equalizers", "power_sweep_dbm", "trials", "seed", "desk_scale", "spectrum_diagnostics",
                    "record_timing", "threads"},
                   "config");
    const int version = j.value("schema_version", kConfigSchemaVersion);
    if (version != kConfigSchemaVersion)
      throw Error(ErrorCode::parse, "unsupported schema_version " + std::to_string(version));

    ExperimentConfig cfg;
    if (j.contains("link")) {
      const json& l = j.at("link");
      reject_unknown(l,
                     {"span_length_km", "span_length_m", "num_spans", "loss_db_per_km", "loss_per_m",
                      "dispersion_ps_nm_km", "beta2_s2_per_m", "gamma_per_w_km", "gamma_per_w_m", "pump_freq_thz",
                      "pump_freq_hz", "photon_occupancy", "carrier_wavelength_nm", "carrier_wavelength_m", "noise"},
                     "link");
      LinkConfig& link = cfg.link;
      if (l.contains("span_length_m")) link.span_length = l.at("span_length_m").get<double>();
      else if (l.contains("span_length_km")) link.span_length = l.at("span_length_km").get<double>() * 1e3;
      link.num_spans = l.value("num_spans", link.num_spans);
      if (l.contains("loss_per_m")) link.loss_coeff = l.at("loss_per_m").get<double>();
      else if (l.contains("loss_db_per_km")) link.loss_coeff = loss_from_db_per_km(l.at("loss_db_per_km").get<double>());
      if (l.contains("carrier_wavelength_m")) link.carrier_wavelength = l.at("carrier_wavelength_m").get<double>();
      else if (l.contains("carrier_wavelength_nm")) link.carrier_wavelength = l.at("carrier_wavelength_nm").get<double>() * 1e-9;
      if (l.contains("beta2_s2_per_m")) link.beta2 = l.at("beta2_s2_per_m").get<double>();
      else if (l.contains("dispersion_ps_nm_km"))
        link.beta2 = beta2_from_dispersion(l.at("dispersion_ps_nm_km").get<double>(), link.carrier_wavelength);
      if (l.contains("gamma_per_w_m")) link.gamma_nl = l.at("gamma_per_w_m").get<double>();
      else if (l.contains("gamma_per_w_km")) link.gamma_nl = l.at("gamma_per_w_km").get<double>() / 1e3;
      if (l.contains("pump_freq_hz")) link.pump_freq = l.at("pump_freq_hz").get<double>();
      else if (l.contains("pump_freq_thz")) link.pump_freq = l.at("pump_freq_thz").get<double>() * 1e12;
      link.photon_occupancy = l.value("photon_occupancy", link.photon_occupancy);
      link.noise = l.value("noise", link.noise);
    }
    if (j.contains("transceiver")) {
      const json& t = j.at("transceiver");
      const std::string kind = t.value("kind", std::string("nyquist"));
      if (kind == "nyquist") {
        reject_unknown(t, {"kind", "baud_rate_gbd", "baud_rate_hz", "symbols_per_packet", "oversampling"}, "transceiver");
        cfg.transceiver = TransceiverKind::nyquist;
        if (t.contains("baud_rate_hz")) cfg.nyquist.baud_rate = t.at("baud_rate_hz").get<double>();
        else if (t.contains("baud_rate_gbd")) cfg.nyquist.baud_rate = t.at("baud_rate_gbd").get<double>() * 1e9;
        cfg.nyquist.symbols_per_packet = t.value("symbols_per_packet", cfg.nyquist.symbols_per_packet);
        cfg.nyquist.oversampling = t.value("oversampling", cfg.nyquist.oversampling);
      } else if (kind == "ofdm") {
        reject_unknown(t,
                       {"kind", "ifft_size", "active_subcarriers", "symbol_duration_ns", "symbol_duration_s", "oversampling",
                        "symbols_per_packet", "cyclic_prefix"},
                       "transceiver");
        cfg.transceiver = TransceiverKind::ofdm;
        cfg.ofdm.ifft_size = t.value("ifft_size", cfg.ofdm.ifft_size);
        cfg.ofdm.active_subcarriers = t.value("active_subcarriers", cfg.ofdm.active_subcarriers);
        if (t.contains("symbol_duration_s")) cfg.ofdm.symbol_duration = t.at("symbol_duration_s").get<double>();
        else if (t.contains("symbol_duration_ns")) cfg.ofdm.symbol_duration = t.at("symbol_duration_ns").get<double>() * 1e-9;
        cfg.ofdm.oversampling = t.value("oversampling", cfg.ofdm.oversampling);
        cfg.ofdm.symbols_per_packet = t.value("symbols_per_packet", cfg.ofdm.symbols_per_packet);
        cfg.ofdm.cyclic_prefix = t.value("cyclic_prefix", 0);
      } else {
        throw Error(ErrorCode::parse, "unknown transceiver kind '" + kind + "'");
      }
    }
    if (j.contains("format")) cfg.format = parse_mod_format(j.at("format").get<std::string>());
    if (j.contains("framing")) {
      const json& f = j.at("framing");
      reject_unknown(f, {"window_samples", "gate_flat", "gate_shoulder", "guard_factor", "strict_guard", "nfd_window_pad",
                        "tx_lowpass_ghz"},
                     "framing");
      cfg.framing.window_samples = f.value("window_samples", cfg.framing.window_samples);
      cfg.framing.gate_flat = f.value("gate_flat", cfg.framing.gate_flat);
      cfg.framing.gate_shoulder = f.value("gate_shoulder", cfg.framing.gate_shoulder);
      cfg.framing.guard_factor = f.value("guard_factor", cfg.framing.guard_factor);
      cfg.framing.strict_guard = f.value("strict_guard", cfg.framing.strict_guard);
      cfg.framing.nfd_window_pad = f.value("nfd_window_pad", cfg.framing.nfd_window_pad);
      cfg.framing.tx_lowpass_ghz = f.value("tx_lowpass_ghz", cfg.framing.tx_lowpass_ghz);
    }
    cfg.forward_steps_per_span = j.value("forward_steps_per_span", cfg.forward_steps_per_span);
    if (j.contains("equalizers")) {
      for (const json& e : j.at("equalizers")) {
        reject_unknown(e, {"kind", "steps_per_span", "inverse_mode"}, "equalizer");
        EqualizerSpec eq;
        eq.kind = parse_equalizer_kind(e.at("kind").get<std::string>());
        eq.steps_per_span = e.value("steps_per_span", eq.steps_per_span);
        const std::string mode = e.value("inverse_mode", std::string("reference"));
        if (mode != "reference" && mode != "fast") throw Error(ErrorCode::parse, "unknown inverse_mode '" + mode + "'");
        eq.inverse_mode = mode == "fast" ? InverseMode::fast : InverseMode::reference;
        cfg.equalizers.push_back(eq);
      }
    }
    if (j.contains("power_sweep_dbm")) cfg.power_sweep_dbm = j.at("power_sweep_dbm").get<std::vector<double>>();
    cfg.trials = j.value("trials", cfg.trials);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.desk_scale = j.value("desk_scale", cfg.desk_scale);
    cfg.spectrum_diagnostics = j.value("spectrum_diagnostics", cfg.spectrum_diagnostics);
    cfg.record_timing = j.value("record_timing", cfg.record_timing);
    cfg.threads = j.value("threads", cfg.threads);
    if (cfg.desk_scale) apply_desk_scale(cfg);
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, path + ": " + e.what());
  }
  return config_from_json(j);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

CVector demodulate_burst(const ExperimentConfig& cfg, const PhysicalSignal& sig, const BurstFrame& frame) {
  if (cfg.transceiver == TransceiverKind::nyquist)
    return nyquist_demodulate(sig, cfg.nyquist, frame.payload_start, cfg.nyquist.symbols_per_packet);
  return ofdm_demodulate(sig, cfg.ofdm, frame.payload_start, cfg.ofdm.symbols_per_packet);
}

PhysicalSignal apply_equalizer(const ExperimentConfig& cfg, const EqualizerSpec& eq, const PhysicalSignal& rx) {
  switch (eq.kind) {
    case EqualizerKind::none: return rx;
    case EqualizerKind::cdc: return cdc(rx, cfg.link);
    case EqualizerKind::dbp_ssfm: return dbp_ssfm(rx, cfg.link, eq.steps_per_span);
    case EqualizerKind::nfd: {
      const NormalizationParams p = derive_normalization(cfg.link, rx.duration());
      NormalizedSignal field = to_normalized(rx, p);
      DbpNfdConfig nfd;
      nfd.x1 = normalized_distance(cfg.link, p);
      nfd.window_pad = cfg.framing.nfd_window_pad;
      nfd.inverse_mode = eq.inverse_mode;
      field.x = nfd.x1;
      return from_normalized(dbp_nfd(field, nfd), p, rx.t_start);
    }
  }
  return rx;
}

LaunchedBurst launch_burst(const ExperimentConfig& cfg, std::size_t power_index, int trial) {
  const double power = dbm_to_watt(cfg.power_sweep_dbm.at(power_index));

  // Data depends on the trial only, so every launch power carries the same bits.
  const bool nyquist = cfg.transceiver == TransceiverKind::nyquist;
  const Eigen::Index n_symbols =
      nyquist ? cfg.nyquist.symbols_per_packet : cfg.ofdm.symbols_per_packet * cfg.ofdm.active_subcarriers;
  std::mt19937_64 bit_rng(derive_seed(cfg.seed, 0xB175, static_cast<std::uint64_t>(trial)));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_symbols * bits_per_symbol(cfg.format)));
  for (auto& b : bits) b = static_cast<std::uint8_t>(bit_rng() >> 63);

  LaunchedBurst out;
  out.symbols = map_bits(bits, cfg.format);
  const Modulated mod = nyquist ? nyquist_modulate(out.symbols, cfg.nyquist, cfg.framing.window_samples)
                                : ofdm_modulate(out.symbols, cfg.ofdm);
  const GateConfig gate{cfg.framing.gate_flat, cfg.framing.gate_shoulder};
  out.frame = frame_burst(mod, gate, cfg.framing.window_samples, 0.0);
  if (cfg.framing.tx_lowpass_ghz > 0) raised_cosine_lowpass(out.frame.wave, cfg.framing.tx_lowpass_ghz * 1e9);
  BurstFrame& f = out.frame;
  f.wave.samples *= std::sqrt(power / payload_power(f.wave, f.payload_start, f.payload_samples));
  return out;
}

TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t power_index, int trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  const bool nyquist = cfg.transceiver == TransceiverKind::nyquist;
  const LaunchedBurst burst = launch_burst(cfg, power_index, trial);
  const BurstFrame& frame = burst.frame;
  const CVector& symbols = burst.symbols;

  TrialOutcome out;
  out.dispersion_memory = dispersion_memory(nyquist ? cfg.nyquist.baud_rate : cfg.ofdm.bandwidth(), cfg.link);
  out.guard_time = frame.guard_time;
  if (cfg.framing.strict_guard && out.guard_time < cfg.framing.guard_factor * out.dispersion_memory)
    throw Error(ErrorCode::window_mismatch, "guard interval is shorter than the required dispersion memory");

  const NormalizationParams p = derive_normalization(cfg.link, frame.wave.duration());
  const NormalizedSignal launched = to_normalized(frame.wave, p);
  out.l1_norm = l1_norm(launched);
  if (cfg.spectrum_diagnostics && launched.kappa == Kappa::anomalous) {
    try {
      EigenvalueOptions opts;
      opts.isolate_eigenvalues = false;
      out.soliton_ratio = soliton_power_ratio(launched, opts).ratio;
    } catch (const Error&) {
      out.soliton_ratio = kNaN;
    }
  }

  const StepConfig steps{cfg.forward_steps_per_span, SplitScheme::symmetric};
  const PhysicalSignal rx = propagate_link(frame.wave, cfg.link, steps, derive_seed(cfg.seed, power_index + 1, t));

  const std::size_t n_eq = cfg.equalizers.size();
  out.evm.assign(n_eq, kNaN);
  out.failures.assign(n_eq, std::string());
  out.runtime_ms.assign(n_eq, 0.0);
  for (std::size_t e = 0; e < n_eq; ++e) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const PhysicalSignal y = apply_equalizer(cfg, cfg.equalizers[e], rx);
      out.runtime_ms[e] = elapsed_ms(start);
      out.evm[e] = evm(demodulate_burst(cfg, y, frame), symbols);
    } catch (const Error& err) {
      out.failures[e] = err.what();
    }
  }
  return out;
}

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  MetricsReport report;
  report.seed = cfg.seed;
  report.config_hash = config_hash(cfg);
  report.config = config_to_json(cfg);

  const std::size_t n_pow = cfg.power_sweep_dbm.size();
  const auto n_trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t n_cells = n_pow * n_trials;
  std::vector<TrialOutcome> cells(n_cells);
  std::vector<std::string> cell_failure(n_cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < n_cells; c = next++) {
      try {
        cells[c] = run_trial(cfg, c / n_trials, static_cast<int>(c % n_trials));
      } catch (const Error& e) {
        cell_failure[c] = e.what();
      }
    }
  };
  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(std::max<std::size_t>(n_cells, 1))));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  bool short_guard = false;
  for (std::size_t pi = 0; pi < n_pow; ++pi) {
    const double dbm = cfg.power_sweep_dbm[pi];
    double l1 = 0, ratio = 0;
    int diag_count = 0;
    for (std::size_t t = 0; t < n_trials; ++t) {
      const std::size_t c = pi * n_trials + t;
      if (!cell_failure[c].empty()) {
        for (const auto& eq : cfg.equalizers)
          report.errors.push_back({dbm, static_cast<int>(t), eq.label(), cell_failure[c]});
        continue;
      }
      l1 += cells[c].l1_norm;
      ratio += cells[c].soliton_ratio;
      ++diag_count;
      if (cells[c].guard_time < cfg.framing.guard_factor * cells[c].dispersion_memory) short_guard = true;
    }
    if (diag_count > 0) {
      l1 /= diag_count;
      ratio /= diag_count;
    }

    for (std::size_t e = 0; e < cfg.equalizers.size(); ++e) {
      MetricsRow row;
      row.power_dbm = dbm;
      row.equalizer = cfg.equalizers[e].label();
      row.l1_norm = l1;
      row.soliton_ratio = ratio;
      std::vector<double> evms, log_bers;
      double runtime = 0;
      for (std::size_t t = 0; t < n_trials; ++t) {
        const std::size_t c = pi * n_trials + t;
        if (!cell_failure[c].empty()) continue;
        if (!cells[c].failures[e].empty()) {
          report.errors.push_back({dbm, static_cast<int>(t), row.equalizer, cells[c].failures[e]});
          continue;
        }
        evms.push_back(cells[c].evm[e]);
        log_bers.push_back(log_ber_from_evm(cells[c].evm[e], cfg.format));
        runtime += cells[c].runtime_ms[e];
      }
      row.trials = static_cast<int>(evms.size());
      if (evms.empty()) {
        row.evm = row.ber = row.q_db = kNaN;
      } else {
        const double n = static_cast<double>(evms.size());
        double mean = 0;
        for (double v : evms) mean += v;
        mean /= n;
        double var = 0;
        for (double v : evms) var += (v - mean) * (v - mean);
        row.evm = mean;
        row.evm_ci = evms.size() > 1 ? 1.96 * std::sqrt(var / (n - 1) / n) : 0.0;
        // Mean BER in the log domain; QPSK at high SNR sits far below the double range.
        const double peak = *std::max_element(log_bers.begin(), log_bers.end());
        double log_mean = -std::numeric_limits<double>::infinity();
        if (std::isfinite(peak)) {
          double acc = 0;
          for (double lb : log_bers) acc += std::exp(lb - peak);
          log_mean = peak + std::log(acc / n);
        }
        row.ber = std::exp(log_mean);
        try {
          row.q_db = q_factor_from_log_ber(log_mean);
        } catch (const Error&) {
          row.q_db = kNaN;
        }
        row.runtime_ms = cfg.record_timing ? runtime / n : 0.0;
      }
      report.rows.push_back(row);
    }
  }
  if (short_guard) report.warnings.push_back("guard interval shorter than guard_factor x dispersion memory");
  return report;
}

OutputFormat parse_output_format(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw Error(ErrorCode::parse, "unknown output format '" + name + "'");
}

std::string results_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "power_dBm,equalizer,evm,ber,q_db,l1_norm,soliton_ratio,runtime_ms,trials\n";
  for (const auto& r : report.rows) {
    out << format_number(r.power_dbm) << ',' << r.equalizer << ',' << format_number(r.evm) << ','
        << format_number(r.ber) << ',' << format_number(r.q_db) << ',' << format_number(r.l1_norm) << ','
        << format_number(r.soliton_ratio) << ',' << format_number(r.runtime_ms) << ',' << r.trials << '\n';
  }
  return out.str();
}

json results_json(const MetricsReport& report) {
  json j;
  j["seed"] = report.seed;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(report.config_hash));
  j["config_hash"] = hash;
  j["config"] = report.config;
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"power_dBm", r.power_dbm},
                         {"equalizer", r.equalizer},
                         {"evm", r.evm},
                         {"evm_ci95", r.evm_ci},
                         {"ber", r.ber},
                         {"q_db", r.q_db},
                         {"l1_norm", r.l1_norm},
                         {"soliton_ratio", r.soliton_ratio},
                         {"runtime_ms", r.runtime_ms},
                         {"trials", r.trials}});
  }
  j["errors"] = json::array();
  for (const auto& e : report.errors) {
    j["errors"].push_back(
        {{"power_dBm", e.power_dbm}, {"trial", e.trial}, {"equalizer", e.equalizer}, {"message", e.message}});
  }
  j["warnings"] = report.warnings;
  return j;
}

void emit_results(const MetricsReport& report, const std::string& path, OutputFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
  if (format == OutputFormat::csv) out << results_csv(report);
  else out << results_json(report).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "write to '" + path + "' failed");
}

std::vector<MetricsRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("power_dBm,", 0) != 0) throw Error(ErrorCode::parse, "missing CSV header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 9) throw Error(ErrorCode::parse, "expected 9 CSV fields, got " + std::to_string(f.size()));
    auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str()) throw Error(ErrorCode::parse, "bad number '" + s + "'");
      return v;
    };
    MetricsRow r;
    r.power_dbm = num(f[0]);
    r.equalizer = f[1];
    r.evm = num(f[2]);
    r.ber = num(f[3]);
    r.q_db = num(f[4]);
    r.l1_norm = num(f[5]);
    r.soliton_ratio = num(f[6]);
    r.runtime_ms = num(f[7]);
    r.trials = static_cast<int>(num(f[8]));
    rows.push_back(r);
  }
  return rows;
}

BenchReport bench_scaling(const BenchConfig& cfg) {
  BenchReport report;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_signal = [&](Eigen::Index d) {
    NormalizedSignal s;
    s.kappa = Kappa::normal;
    s.samples.resize(d);
    // Unit-variance samples: the energy eps sum |E|^2 stays near 2 at every size.
    for (auto& v : s.samples) v = Complex(gauss(rng), gauss(rng));
    return s;
  };
  // CPU time of this thread, which is less exposed to load from other tenants than wall time.
  auto timed = [](auto&& fn) {
    timespec a{}, b{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &a);
    fn();
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &b);
    return 1e3 * static_cast<double>(b.tv_sec - a.tv_sec) + 1e-6 * static_cast<double>(b.tv_nsec - a.tv_nsec);
  };
  const int reps = std::max(1, cfg.repetitions);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Repetitions run round-robin over all sizes so slow drift in machine load hits every entry alike.
  struct SizeCase {
    CVector q;
    ScatteringPair<double> pair, rotated;
  };
  std::vector<SizeCase> cases;
  for (Eigen::Index d : cfg.sizes) {
    if (!is_power_of_two(static_cast<std::size_t>(d))) throw Error(ErrorCode::invalid_config, "bench sizes must be powers of two");
    cases.push_back({rescale_samples(random_signal(d)), {}, {}});
    ScalingRow row;
    row.size = d;
    row.scatter_ms = row.backrotate_ms = row.inverse_ms = kInf;
    report.scaling.push_back(row);
  }
  for (int r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < cases.size(); ++i) {
      SizeCase& c = cases[i];
      ScalingRow& row = report.scaling[i];
      row.scatter_ms = std::min(row.scatter_ms, timed([&] { c.pair = scatter_fast(c.q, Kappa::normal); }));
      row.backrotate_ms = std::min(row.backrotate_ms, timed([&] { c.rotated = backrotate(c.pair, 1e-4); }));
      row.inverse_ms =
          std::min(row.inverse_ms, timed([&] { (void)inverse_scatter_samples(c.rotated, InverseMode::fast); }));
    }
  }
  for (std::size_t i = 1; i < report.scaling.size(); ++i) {
    ScalingRow& row = report.scaling[i];
    const ScalingRow& prev = report.scaling[i - 1];
    row.scatter_ratio = row.scatter_ms / prev.scatter_ms;
    row.backrotate_ratio = row.backrotate_ms / prev.backrotate_ms;
    row.inverse_ratio = row.inverse_ms / prev.inverse_ms;
  }

  report.span_window = cfg.span_window;
  report.steps_per_span = cfg.steps_per_span;
  PhysicalSignal rx;
  rx.sample_interval = 1.0 / (56e9 * 8);
  rx.samples.resize(cfg.span_window);
  for (auto& v : rx.samples) v = Complex(gauss(rng), gauss(rng)) * 1e-3;
  for (int spans : cfg.span_counts) report.spans.push_back({spans, kInf, kInf});
  for (int r = 0; r < reps; ++r) {
    for (SpanRow& row : report.spans) {
      ExperimentConfig ecfg;
      ecfg.link = standard_link(row.spans, true);
      row.dbp_ssfm_ms = std::min(row.dbp_ssfm_ms, timed([&] { (void)dbp_ssfm(rx, ecfg.link, cfg.steps_per_span); }));
      row.nfd_ms = std::min(row.nfd_ms, timed([&] { (void)apply_equalizer(ecfg, EqualizerSpec{}, rx); }));
    }
  }
  return report;
}

std::string bench_table(const BenchReport& report) {
  std::ostringstream out;
  char line[256];
  out << "# forward scattering, back-rotation and fast inverse per window size\n";
  std::snprintf(line, sizeof line, "%8s %12s %8s %12s %8s %12s %8s\n", "D", "scatter_ms", "ratio", "rotate_ms",
                "ratio", "inverse_ms", "ratio");
  out << line;
  for (const auto& r : report.scaling) {
    std::snprintf(line, sizeof line, "%8lld %12.3f %8.3f %12.3f %8.3f %12.3f %8.3f\n", static_cast<long long>(r.size),
                  r.scatter_ms, r.scatter_ratio, r.backrotate_ms, r.backrotate_ratio, r.inverse_ms, r.inverse_ratio);
    out << line;
  }
  std::snprintf(line, sizeof line, "# runtime vs span count, D = %lld, dbp_ssfm at %d steps/span\n",
                static_cast<long long>(report.span_window), report.steps_per_span);
  out << line;
  std::snprintf(line, sizeof line, "%8s %14s %12s\n", "spans", "dbp_ssfm_ms", "nfd_ms");
  out << line;
  for (const auto& r : report.spans) {
    std::snprintf(line, sizeof line, "%8d %14.3f %12.3f\n", r.spans, r.dbp_ssfm_ms, r.nfd_ms);
    out << line;
  }
  return out.str();
}

}  // namespace nfdbp
