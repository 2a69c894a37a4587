#ifndef OPO_PHOTOCURRENT_HPP
#define OPO_PHOTOCURRENT_HPP

#include <cstdint>

#include <Eigen/Dense>

#include "opo/cavity.hpp"
#include "opo/detection.hpp"

namespace opo {

/// A pair of dimensionless photocurrent fluctuation traces for signal and
/// idler, calibrated so that an ideal coherent beam has unit variance per
/// sample. Regenerating with the same seed reproduces bit-identical traces.
struct PhotocurrentPair {
    double sample_rate;  ///< Hz
    double duration;     ///< s
    std::uint64_t seed;
    Eigen::ArrayXd signal_trace;
    Eigen::ArrayXd idler_trace;
};

/// Monte-Carlo realization of the twin-beam covariance: the difference and
/// sum normal modes are drawn as independent white Gaussian streams whose
/// variances are the analytic difference and sum variances at the chain's
/// zero-span frequency, then rotated back into signal and idler. Each
/// detector additionally sees its own electronic noise floor.
PhotocurrentPair simulate_photocurrents(const CavityParams& cavity,
                                        const OperatingPoint& op,
                                        const DetectionChain& chain,
                                        double duration, double sample_rate,
                                        std::uint64_t seed);

enum class CombineMode { sum, difference };

/// Balanced combiner with a scalar gain imbalance epsilon:
/// difference = (s (1 + eps/2) - i (1 - eps/2)) / sqrt(2), sum analogous.
Eigen::ArrayXd balanced_combine(const PhotocurrentPair& pair, CombineMode mode,
                                const DetectionChain& chain);

/// Sends both beams through a passive transmission T, mixing in fresh
/// independent vacuum on each arm: x -> sqrt(T) x + sqrt(1-T) v.
PhotocurrentPair attenuate_pair(const PhotocurrentPair& pair, double transmission,
                                std::uint64_t seed);

}  // namespace opo

#endif  // OPO_PHOTOCURRENT_HPP
