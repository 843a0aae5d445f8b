#include "nfdbp/txrx.hpp"

#include "nfdbp/fft.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace nfdbp {

namespace {

int levels_per_axis(ModFormat fmt) { return fmt == ModFormat::qpsk ? 2 : 8; }

unsigned gray(unsigned i) { return i ^ (i >> 1); }

unsigned gray_inverse(unsigned g) {
  unsigned i = 0;
  for (; g; g >>= 1) i ^= g;
  return i;
}

double qam_scale(ModFormat fmt) {
  const double m = static_cast<double>(1 << bits_per_symbol(fmt));
  return 1.0 / std::sqrt(2.0 * (m - 1.0) / 3.0);
}

double axis_value(unsigned label, int levels) {
  return 2.0 * static_cast<double>(gray_inverse(label)) - (levels - 1);
}

unsigned axis_label(double v, int levels) {
  const double idx = std::round((v + (levels - 1)) / 2.0);
  return gray(static_cast<unsigned>(std::clamp(idx, 0.0, static_cast<double>(levels - 1))));
}

}  // namespace

int bits_per_symbol(ModFormat fmt) { return fmt == ModFormat::qpsk ? 2 : 6; }

const char* to_string(ModFormat fmt) { return fmt == ModFormat::qpsk ? "qpsk" : "64qam"; }

ModFormat parse_mod_format(const std::string& name) {
  if (name == "qpsk" || name == "QPSK") return ModFormat::qpsk;
  if (name == "64qam" || name == "64QAM" || name == "qam64") return ModFormat::qam64;
  throw Error(ErrorCode::parse, "unknown modulation format '" + name + "'");
}

CVector constellation(ModFormat fmt) {
  const int bps = bits_per_symbol(fmt);
  const int half = bps / 2;
  const int levels = levels_per_axis(fmt);
  const double scale = qam_scale(fmt);
  CVector points(1 << bps);
  for (unsigned label = 0; label < (1u << bps); ++label) {
    const unsigned li = label >> half;
    const unsigned lq = label & ((1u << half) - 1);
    points[label] = Complex(axis_value(li, levels), axis_value(lq, levels)) * scale;
  }
  return points;
}

CVector map_bits(const std::vector<std::uint8_t>& bits, ModFormat fmt) {
  const int bps = bits_per_symbol(fmt);
  if (bits.size() % static_cast<std::size_t>(bps) != 0)
    throw Error(ErrorCode::length_mismatch, "bit count is not a multiple of bits per symbol");
  const CVector table = constellation(fmt);
  CVector out(static_cast<Eigen::Index>(bits.size()) / bps);
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    unsigned label = 0;
    for (int j = 0; j < bps; ++j) label = (label << 1) | (bits[static_cast<std::size_t>(k * bps + j)] & 1u);
    out[k] = table[label];
  }
  return out;
}

std::vector<std::uint8_t> demap_symbols(const CVector& symbols, ModFormat fmt) {
  const int bps = bits_per_symbol(fmt);
  const int half = bps / 2;
  const int levels = levels_per_axis(fmt);
  const double scale = qam_scale(fmt);
  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<std::size_t>(symbols.size() * bps));
  for (const Complex& s : symbols) {
    const unsigned label = (axis_label(s.real() / scale, levels) << half) | axis_label(s.imag() / scale, levels);
    for (int j = bps - 1; j >= 0; --j) bits.push_back(static_cast<std::uint8_t>((label >> j) & 1u));
  }
  return bits;
}

Modulated nyquist_modulate(const CVector& symbols, const NyquistConfig& cfg, Eigen::Index buffer_samples) {
  if (cfg.oversampling < 2) throw Error(ErrorCode::invalid_config, "oversampling must be >= 2");
  if (!(cfg.baud_rate > 0)) throw Error(ErrorCode::invalid_config, "baud rate must be positive");
  const Eigen::Index ov = cfg.oversampling;
  const Eigen::Index span = symbols.size() * ov;
  if (buffer_samples < span || buffer_samples % ov != 0)
    throw Error(ErrorCode::invalid_config, "buffer must hold the packet and be a multiple of the oversampling");

  Modulated out;
  out.payload_start = ((buffer_samples - span) / 2 / ov) * ov;
  out.payload_samples = span;
  out.wave.sample_interval = cfg.sample_interval();
  CVector impulses = CVector::Zero(buffer_samples);
  for (Eigen::Index k = 0; k < symbols.size(); ++k) impulses[out.payload_start + k * ov] = symbols[k];

  // Keep buffer/ov contiguous bins centered on DC: a periodic sinc with zeros at every other symbol slot.
  CVector spec = fft::forward<double>(impulses);
  const Eigen::Index pass = buffer_samples / ov;
  for (Eigen::Index k = 0; k < buffer_samples; ++k) {
    const Eigen::Index signed_k = 2 * k >= buffer_samples ? k - buffer_samples : k;
    if (signed_k < -pass / 2 || signed_k >= pass - pass / 2) spec[k] = 0;
  }
  out.wave.samples = fft::inverse<double>(spec) * static_cast<double>(ov);
  return out;
}

CVector nyquist_demodulate(const PhysicalSignal& sig, const NyquistConfig& cfg, Eigen::Index payload_start,
                           Eigen::Index count) {
  const Eigen::Index n = sig.samples.size();
  const Eigen::Index ov = cfg.oversampling;
  if (payload_start < 0 || payload_start + (count - 1) * ov >= n)
    throw Error(ErrorCode::length_mismatch, "symbol instants fall outside the signal");
  CVector spec = fft::forward<double>(sig.samples);
  const Eigen::Index pass = n / ov;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index signed_k = 2 * k >= n ? k - n : k;
    if (signed_k < -pass / 2 || signed_k >= pass - pass / 2) spec[k] = 0;
  }
  const CVector filtered = fft::inverse<double>(spec);
  CVector out(count);
  for (Eigen::Index k = 0; k < count; ++k) out[k] = filtered[payload_start + k * ov];
  return out;
}

int ofdm_active_bin(const OfdmConfig& cfg, int k) { return k - cfg.active_subcarriers / 2; }

namespace {

void check_ofdm(const OfdmConfig& cfg) {
  if (cfg.active_subcarriers < 1 || cfg.active_subcarriers > cfg.ifft_size)
    throw Error(ErrorCode::invalid_config, "active subcarriers must be in [1, ifft_size]");
  if (cfg.oversampling < 1) throw Error(ErrorCode::invalid_config, "oversampling must be >= 1");
  if (cfg.cyclic_prefix != 0) throw Error(ErrorCode::invalid_config, "cyclic prefix is not supported");
  if (!(cfg.symbol_duration > 0)) throw Error(ErrorCode::invalid_config, "symbol duration must be positive");
}

Eigen::Index bin_index(int signed_bin, Eigen::Index n) { return signed_bin < 0 ? n + signed_bin : signed_bin; }

}  // namespace

Modulated ofdm_modulate(const CVector& symbols, const OfdmConfig& cfg) {
  check_ofdm(cfg);
  const Eigen::Index active = cfg.active_subcarriers;
  if (symbols.size() % active != 0)
    throw Error(ErrorCode::length_mismatch, "symbol count is not a multiple of the active subcarriers");
  const Eigen::Index n = cfg.samples_per_symbol();
  const Eigen::Index blocks = symbols.size() / active;
  // Unit mean power for unit-power symbols.
  const double scale = static_cast<double>(n) / std::sqrt(static_cast<double>(active));
  Modulated out;
  out.wave.sample_interval = cfg.sample_interval();
  out.wave.samples.resize(blocks * n);
  out.payload_start = 0;
  out.payload_samples = blocks * n;
  for (Eigen::Index b = 0; b < blocks; ++b) {
    CVector spec = CVector::Zero(n);
    for (int k = 0; k < active; ++k) spec[bin_index(ofdm_active_bin(cfg, k), n)] = symbols[b * active + k];
    out.wave.samples.segment(b * n, n) = fft::inverse<double>(spec) * scale;
  }
  return out;
}

CVector ofdm_demodulate(const PhysicalSignal& sig, const OfdmConfig& cfg, Eigen::Index payload_start,
                        Eigen::Index num_ofdm_symbols) {
  check_ofdm(cfg);
  const Eigen::Index n = cfg.samples_per_symbol();
  const Eigen::Index active = cfg.active_subcarriers;
  if (payload_start < 0 || payload_start + num_ofdm_symbols * n > sig.samples.size())
    throw Error(ErrorCode::length_mismatch, "OFDM symbols fall outside the signal");
  const double scale = std::sqrt(static_cast<double>(active)) / static_cast<double>(n);
  CVector out(num_ofdm_symbols * active);
  for (Eigen::Index b = 0; b < num_ofdm_symbols; ++b) {
    const CVector spec = fft::forward<double>(CVector(sig.samples.segment(payload_start + b * n, n)));
    for (int k = 0; k < active; ++k) out[b * active + k] = spec[bin_index(ofdm_active_bin(cfg, k), n)] * scale;
  }
  return out;
}

double dispersion_memory(double bandwidth, const LinkConfig& link) {
  return 2.0 * kPi * bandwidth * std::abs(link.beta2) * link.length();
}

BurstFrame frame_burst(const Modulated& mod, const GateConfig& gate, Eigen::Index window_size, double guard_time) {
  const double dt = mod.wave.sample_interval;
  const Eigen::Index reach = gate.flat + gate.shoulder;
  const Eigen::Index burst = mod.payload_samples + 2 * reach;
  const auto guard_samples = static_cast<Eigen::Index>(std::ceil(guard_time / dt - 1e-9));
  if (burst + guard_samples > window_size) {
    std::ostringstream why;
    why << "burst of " << burst << " samples plus a guard of " << guard_samples << " exceeds the window of "
        << window_size;
    throw Error(ErrorCode::window_mismatch, why.str());
  }

  BurstFrame out;
  out.window_size = window_size;
  out.burst_samples = burst;
  out.burst_start = (window_size - burst) / 2;
  out.payload_start = out.burst_start + reach;
  out.payload_samples = mod.payload_samples;
  out.guard_time = static_cast<double>(window_size - burst) * dt;
  out.wave.sample_interval = dt;
  out.wave.samples = CVector::Zero(window_size);

  const Eigen::Index n_src = mod.wave.samples.size();
  for (Eigen::Index i = 0; i < burst; ++i) {
    const Eigen::Index src = mod.payload_start - reach + i;
    // Distance past the nearest payload edge, negative inside the payload.
    const Eigen::Index outside = std::max(reach - i, i - (burst - 1 - reach));
    double w = 1.0;
    if (outside > gate.flat) {
      const double u = static_cast<double>(outside - gate.flat) / static_cast<double>(gate.shoulder + 1);
      w = 0.5 + 0.5 * std::cos(kPi * u);
    }
    const Eigen::Index wrapped = ((src % n_src) + n_src) % n_src;
    out.wave.samples[out.burst_start + i] = mod.wave.samples[wrapped] * w;
  }
  return out;
}

PhysicalSignal extract_burst(const PhysicalSignal& received, const BurstFrame& frame, Eigen::Index offset) {
  if (offset < 0 || offset + frame.window_size > received.samples.size())
    throw Error(ErrorCode::window_mismatch, "burst window lies outside the received record");
  PhysicalSignal out;
  out.sample_interval = received.sample_interval;
  out.t_start = received.t_start + static_cast<double>(offset) * received.sample_interval;
  out.samples = received.samples.segment(offset, frame.window_size);
  return out;
}

void raised_cosine_lowpass(PhysicalSignal& sig, double cutoff_hz, double flat_fraction) {
  if (!(cutoff_hz > 0) || !(flat_fraction >= 0 && flat_fraction < 1))
    throw Error(ErrorCode::invalid_config, "low-pass needs cutoff > 0 and flat fraction in [0, 1)");
  const Eigen::Index n = sig.samples.size();
  CVector spec = fft::forward<double>(sig.samples);
  const double edge = flat_fraction * cutoff_hz;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double f = std::abs(fft::angular_frequency(k, n, sig.sample_interval)) / (2.0 * kPi);
    if (f <= edge) continue;
    spec[k] *= f >= cutoff_hz ? 0.0 : 0.5 + 0.5 * std::cos(kPi * (f - edge) / (cutoff_hz - edge));
  }
  sig.samples = fft::inverse<double>(spec);
}

double payload_power(const PhysicalSignal& sig, Eigen::Index start, Eigen::Index count) {
  if (count < 1 || start < 0 || start + count > sig.samples.size())
    throw Error(ErrorCode::length_mismatch, "payload range outside the signal");
  return sig.samples.segment(start, count).squaredNorm() / static_cast<double>(count);
}

double evm(const CVector& rx, const CVector& ref) {
  if (rx.size() != ref.size() || rx.size() == 0)
    throw Error(ErrorCode::length_mismatch, "EVM needs two equally long non-empty sequences");
  const double ref_energy = ref.squaredNorm();
  if (!(ref_energy > 0)) throw Error(ErrorCode::zero_reference, "reference symbols carry no energy");
  const double rx_energy = rx.squaredNorm();
  const Complex gain = rx_energy > 0 ? rx.dot(ref) / rx_energy : Complex(0);
  return std::sqrt((gain * rx - ref).squaredNorm() / ref_energy);
}

double log_erfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  // Asymptotic series; std::erfc underflows near x = 26.5.
  const double r = 1.0 / (2.0 * x * x);
  return -x * x - std::log(x * std::sqrt(kPi)) + std::log1p(-r + 3.0 * r * r - 15.0 * r * r * r);
}

double log_ber_from_evm(double evm_value, ModFormat fmt) {
  if (evm_value < 0 || std::isnan(evm_value)) throw Error(ErrorCode::invalid_config, "EVM must be non-negative");
  if (evm_value == 0) return -std::numeric_limits<double>::infinity();
  const double m = static_cast<double>(1 << bits_per_symbol(fmt));
  const double l = std::sqrt(m);
  const double log2l = std::log2(l);
  const double arg = std::sqrt(3.0 * log2l / (l * l - 1.0) * 2.0 / (evm_value * evm_value * std::log2(m)));
  return std::log(2.0 * (1.0 - 1.0 / l) / log2l * 0.5) + log_erfc(arg / std::sqrt(2.0));
}

double ber_from_evm(double evm_value, ModFormat fmt) { return std::exp(log_ber_from_evm(evm_value, fmt)); }

double erfc_inv_log(double log_y) {
  if (!(log_y < 0)) throw Error(ErrorCode::undefined_q, "erfc^{-1} in log form needs y < 1");
  // log erfc is concave and decreasing on x >= 0; safeguarded Newton inside a bracket.
  double lo = 0.0, hi = std::sqrt(-log_y) + 5.0;
  double x = std::sqrt(std::max(0.0, -log_y - 1.0));
  for (int it = 0; it < 200; ++it) {
    const double f = log_erfc(x) - log_y;
    if (f > 0) lo = x;
    else hi = x;
    const double slope = -2.0 / std::sqrt(kPi) * std::exp(-x * x - log_erfc(x));
    double next = x - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

double erfc_inv(double y) {
  if (!(y > 0 && y < 2)) throw Error(ErrorCode::undefined_q, "erfc^{-1} needs an argument in (0, 2)");
  if (y > 1) return -erfc_inv(2 - y);
  if (y == 1) return 0.0;
  return erfc_inv_log(std::log(y));
}

double q_factor_from_log_ber(double log_ber) {
  if (std::isnan(log_ber) || !(log_ber < std::log(0.5)))
    throw Error(ErrorCode::undefined_q, "Q needs 0 <= BER < 0.5");
  if (std::isinf(log_ber)) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(std::sqrt(2.0) * erfc_inv_log(std::log(2.0) + log_ber));
}

double q_factor(double ber) {
  if (std::isnan(ber) || ber < 0 || ber >= 0.5) throw Error(ErrorCode::undefined_q, "Q needs 0 <= BER < 0.5");
  if (ber == 0) return std::numeric_limits<double>::infinity();
  return q_factor_from_log_ber(std::log(ber));
}

double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

}  // namespace nfdbp
