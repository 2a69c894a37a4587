#ifndef OPO_SWEEP_HPP
#define OPO_SWEEP_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "opo/cavity.hpp"
#include "opo/detection.hpp"

namespace opo {

/// One parametric-oscillation channel inside the pump resonance. The pump
/// parameter peaks at `sigma` on the channel center and tapers toward the
/// edges with a squared-Lorentzian lineshape of full width `width`.
struct SweepChannel {
    double center;  ///< detuning of the channel center (Hz)
    double sigma;   ///< peak pump parameter, >= 1
    double width;   ///< full channel width (Hz)
};

struct ChannelMarker {
    double center;
    double sigma;
};

struct SweepConfig {
    std::vector<SweepChannel> channels;  ///< non-overlapping
    double span;        ///< full detuning span, centered on zero (Hz)
    int points;         ///< samples across the span
    double sweep_time;  ///< s
    double jitter;      ///< relative per-point scatter; 0 renders noise-free
};

/// Multi-channel traces over one pump-frequency sweep. All arrays share one
/// length; noise columns are in measured shot-noise units (the shot-noise
/// reference including the electronic floor reads 1).
struct SweepTrace {
    Eigen::ArrayXd detuning;
    Eigen::ArrayXd snl;
    Eigen::ArrayXd noise_diff;
    Eigen::ArrayXd noise_sum;
    Eigen::ArrayXd noise_single;
    Eigen::ArrayXd pump_transmission;
    std::vector<ChannelMarker> channel_markers;
};

/// Renders the expected zero-span traces of a pump-detuning sweep. Inside a
/// channel the noise follows the analytic twin-beam and single-beam variances
/// at the tapered pump parameter; outside all channels every trace sits at
/// the shot-noise level. The pump transmission dip is a Lorentzian of width
/// gamma_p with the on-resonance depth set by the pump coupling ratio.
SweepTrace detuning_sweep(const CavityParams& cavity, const DetectionChain& chain,
                          const SweepConfig& config, std::uint64_t seed = 0);

}  // namespace opo

#endif  // OPO_SWEEP_HPP
