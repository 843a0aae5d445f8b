#pragma once

// Transmitter and receiver chains: Gray-coded square QAM, Nyquist (sinc) and
// OFDM modulation, burst framing with guard intervals, and EVM-based metrics.

#include "nfdbp/common.hpp"
#include "nfdbp/link.hpp"
#include "nfdbp/normcoord.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nfdbp {

enum class ModFormat { qpsk, qam64 };

int bits_per_symbol(ModFormat fmt);
const char* to_string(ModFormat fmt);
ModFormat parse_mod_format(const std::string& name);

/// Unit-average-power constellation; entry k is the point labelled k (MSB first).
CVector constellation(ModFormat fmt);

CVector map_bits(const std::vector<std::uint8_t>& bits, ModFormat fmt);
std::vector<std::uint8_t> demap_symbols(const CVector& symbols, ModFormat fmt);

struct NyquistConfig {
  double baud_rate = 56e9;
  Eigen::Index symbols_per_packet = 256;
  int oversampling = 8;

  double sample_interval() const { return 1.0 / (baud_rate * oversampling); }
  double packet_duration() const { return static_cast<double>(symbols_per_packet) / baud_rate; }
};

struct OfdmConfig {
  int ifft_size = 128;
  int active_subcarriers = 112;
  double symbol_duration = 2e-9;
  int cyclic_prefix = 0;
  int oversampling = 8;
  Eigen::Index symbols_per_packet = 1;  // OFDM symbols per burst

  Eigen::Index samples_per_symbol() const { return static_cast<Eigen::Index>(ifft_size) * oversampling; }
  double sample_interval() const { return symbol_duration / static_cast<double>(samples_per_symbol()); }
  /// Occupied bandwidth, active_subcarriers / symbol_duration.
  double bandwidth() const { return active_subcarriers / symbol_duration; }
};

/// Signed subcarrier index of active slot k: a centered block that keeps DC and
/// leaves the band-edge bins empty.
int ofdm_active_bin(const OfdmConfig& cfg, int k);

/// Waveform plus the sample range carrying the payload.
struct Modulated {
  PhysicalSignal wave;
  Eigen::Index payload_start = 0;
  Eigen::Index payload_samples = 0;
};

/// Symbols on a brick-wall band of width baud_rate, centered in a buffer of
/// buffer_samples. Symbol k sits at payload_start + k * oversampling with value
/// symbols[k]. The band limit is periodic over the buffer.
Modulated nyquist_modulate(const CVector& symbols, const NyquistConfig& cfg, Eigen::Index buffer_samples);

/// Ideal low-pass to the symbol band, then one sample per symbol from payload_start.
CVector nyquist_demodulate(const PhysicalSignal& sig, const NyquistConfig& cfg, Eigen::Index payload_start,
                           Eigen::Index count);

/// Back-to-back OFDM symbols without cyclic prefix, unit mean power per sample.
Modulated ofdm_modulate(const CVector& symbols, const OfdmConfig& cfg);

CVector ofdm_demodulate(const PhysicalSignal& sig, const OfdmConfig& cfg, Eigen::Index payload_start,
                        Eigen::Index num_ofdm_symbols);

/// Chromatic-dispersion memory 2 pi B |beta2| L.
double dispersion_memory(double bandwidth, const LinkConfig& link);

/// Raised-cosine gate around the payload: flat for `flat` samples beyond each
/// payload edge, then a shoulder of `shoulder` samples down to zero.
struct GateConfig {
  Eigen::Index flat = 0;
  Eigen::Index shoulder = 0;
};

struct BurstFrame {
  PhysicalSignal wave;              // window_size samples, burst centered
  Eigen::Index window_size = 0;
  Eigen::Index payload_start = 0;   // within the window
  Eigen::Index payload_samples = 0;
  Eigen::Index burst_start = 0;     // first nonzero sample of the gated burst
  Eigen::Index burst_samples = 0;
  double guard_time = 0.0;          // window time not occupied by the burst
};

/// Gates the payload region of `mod` and centers it in a window of window_size
/// samples. Throws window_mismatch when the gated burst plus guard_time does not fit.
BurstFrame frame_burst(const Modulated& mod, const GateConfig& gate, Eigen::Index window_size, double guard_time);

/// The window of `frame` cut out of a longer received record that starts at
/// sample `offset` of the window's position.
PhysicalSignal extract_burst(const PhysicalSignal& received, const BurstFrame& frame, Eigen::Index offset = 0);

/// Periodic low-pass over the whole record: unity below flat_fraction * cutoff_hz,
/// raised-cosine down to zero at cutoff_hz.
void raised_cosine_lowpass(PhysicalSignal& sig, double cutoff_hz, double flat_fraction = 0.6);

/// Mean |A|^2 over the payload samples.
double payload_power(const PhysicalSignal& sig, Eigen::Index start, Eigen::Index count);

/// Error vector magnitude after one least-squares complex gain on rx.
double evm(const CVector& rx, const CVector& ref);

/// Square-QAM BER estimate from EVM under a Gaussian error model.
double ber_from_evm(double evm_value, ModFormat fmt);

/// Natural log of ber_from_evm, finite far below the double range of BER itself.
double log_ber_from_evm(double evm_value, ModFormat fmt);

/// 20 log10(sqrt(2) erfc^{-1}(2 BER)); +inf for BER = 0.
double q_factor(double ber);

double q_factor_from_log_ber(double log_ber);

/// Inverse complementary error function on (0, 2).
double erfc_inv(double y);

/// x with log erfc(x) = log_y, for log_y < 0.
double erfc_inv_log(double log_y);

/// log erfc(x) without underflow for large x.
double log_erfc(double x);

double dbm_to_watt(double dbm);

}  // namespace nfdbp
