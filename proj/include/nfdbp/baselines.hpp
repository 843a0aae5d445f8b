#pragma once

// Reference compensators: split-step backpropagation and linear dispersion
// compensation.

#include "nfdbp/channel.hpp"
#include "nfdbp/common.hpp"
#include "nfdbp/link.hpp"
#include "nfdbp/normcoord.hpp"

namespace nfdbp {

/// Lossless normalized model run backwards span by span with the channel's own
/// split-step propagator.
PhysicalSignal dbp_ssfm(const PhysicalSignal& received, const LinkConfig& link, int steps_per_span,
                        SplitScheme scheme = SplitScheme::symmetric);

/// All-pass spectral phase exp(-i beta2 w^2 L / 2), the exact inverse of the
/// linear fiber response exp(+i beta2 w^2 L / 2) for A_z = -i (beta2 / 2) A_TT + ...
PhysicalSignal cdc(const PhysicalSignal& received, const LinkConfig& link);

}  // namespace nfdbp
