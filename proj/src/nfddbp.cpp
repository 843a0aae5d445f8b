#include "nfdbp/nfddbp.hpp"

#include "nfdbp/diagnostics.hpp"

namespace nfdbp {

NormalizedSignal dbp_nfd(const NormalizedSignal& received, const DbpNfdConfig& cfg, DbpNfdReport* report) {
  if (cfg.x1 < 0) throw Error(ErrorCode::invalid_config, "x1 must be non-negative");
  if (cfg.window_pad < 0) throw Error(ErrorCode::invalid_config, "window_pad must be non-negative");
  const Eigen::Index d = received.size();
  const Eigen::Index padded = d + 2 * cfg.window_pad;
  if (!is_power_of_two(static_cast<std::size_t>(padded)))
    throw Error(ErrorCode::invalid_config, "padded window length must be a power of two");

  // Enlarging the window by s rescales the normalized problem: t -> t/s, x -> x/s^2, E -> s E.
  const double s = static_cast<double>(padded) / static_cast<double>(d);
  NormalizedSignal work;
  work.kappa = received.kappa;
  work.x = received.x;
  work.samples = CVector::Zero(padded);
  work.samples.segment(cfg.window_pad, d) = received.samples * s;
  const double x1 = cfg.x1 / (s * s);

  ScatteringPair<double> pair = scatter_fast(rescale_samples(work), work.kappa);
  pair.x = work.x;
  pair = backrotate(pair, x1);
  if (report) report->unit_circle_residual = unit_circle_residual(pair);

  NormalizedSignal estimate = inverse_scatter(pair, cfg.inverse_mode);
  NormalizedSignal out;
  out.kappa = received.kappa;
  out.x = received.x - cfg.x1;
  out.samples = estimate.samples.segment(cfg.window_pad, d) / s;
  if (report) {
    report->l1_norm = l1_norm(out);
    report->soliton_risk = out.kappa == Kappa::anomalous && report->l1_norm >= kPi / 2;
  }
  return out;
}

}  // namespace nfdbp
