#include "opo/photocurrent.hpp"

#include <cmath>
#include <stdexcept>

#include "opo/random.hpp"
#include "opo/variance.hpp"

namespace opo {

namespace {

// Substream tags; every logical noise source has a fixed identity.
constexpr std::uint64_t kTagDifferenceMode = 1;
constexpr std::uint64_t kTagSumMode = 2;
constexpr std::uint64_t kTagElectronicSignal = 3;
constexpr std::uint64_t kTagElectronicIdler = 4;
constexpr std::uint64_t kTagVacuumSignal = 5;
constexpr std::uint64_t kTagVacuumIdler = 6;

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

PhotocurrentPair simulate_photocurrents(const CavityParams& cavity,
                                        const OperatingPoint& op,
                                        const DetectionChain& chain,
                                        double duration, double sample_rate,
                                        std::uint64_t seed) {
    if (duration <= 0)
        throw std::invalid_argument("simulate_photocurrents: duration must be positive");
    if (sample_rate <= 4.0 * chain.nu_center)
        throw std::invalid_argument(
            "simulate_photocurrents: sample rate must exceed 4x the zero-span center");

    // Variances at the zero-span sideband; throws below threshold or on the pole.
    const double omega = normalized_sideband(chain.nu_center, cavity);
    const double ratio = cavity.coupling_ratio();
    const double v_diff = twin_difference_variance(ratio, chain.eta, omega).value_snu;
    const double v_sum = twin_sum_variance(ratio, chain.eta, omega, op.sigma).value_snu;

    const auto n = static_cast<Eigen::Index>(std::floor(sample_rate * duration));
    if (n < 1)
        throw std::invalid_argument("simulate_photocurrents: empty trace");

    Eigen::ArrayXd diff_mode =
        std::sqrt(v_diff) * GaussianStream(seed, kTagDifferenceMode).samples(n);
    Eigen::ArrayXd sum_mode =
        std::sqrt(v_sum) * GaussianStream(seed, kTagSumMode).samples(n);

    PhotocurrentPair pair;
    pair.sample_rate = sample_rate;
    pair.duration = duration;
    pair.seed = seed;
    pair.signal_trace = (sum_mode + diff_mode) * kInvSqrt2;
    pair.idler_trace = (sum_mode - diff_mode) * kInvSqrt2;

    const double excess = electronic_excess_variance(chain.electronic_floor);
    if (excess > 0) {
        const double sd = std::sqrt(excess);
        pair.signal_trace += sd * GaussianStream(seed, kTagElectronicSignal).samples(n);
        pair.idler_trace += sd * GaussianStream(seed, kTagElectronicIdler).samples(n);
    }
    return pair;
}

Eigen::ArrayXd balanced_combine(const PhotocurrentPair& pair, CombineMode mode,
                                const DetectionChain& chain) {
    if (pair.signal_trace.size() != pair.idler_trace.size())
        throw std::invalid_argument("balanced_combine: trace lengths differ");
    const double eps = chain.cmrr_imbalance;
    const double gain_s = 1.0 + 0.5 * eps;
    const double gain_i = 1.0 - 0.5 * eps;
    if (mode == CombineMode::difference)
        return (gain_s * pair.signal_trace - gain_i * pair.idler_trace) * kInvSqrt2;
    return (gain_s * pair.signal_trace + gain_i * pair.idler_trace) * kInvSqrt2;
}

PhotocurrentPair attenuate_pair(const PhotocurrentPair& pair, double transmission,
                                std::uint64_t seed) {
    if (transmission < 0 || transmission > 1)
        throw std::invalid_argument("attenuate_pair: transmission must lie in [0, 1]");
    const auto n = pair.signal_trace.size();
    const double t_amp = std::sqrt(transmission);
    const double v_amp = std::sqrt(1.0 - transmission);

    PhotocurrentPair out = pair;
    out.signal_trace = t_amp * pair.signal_trace +
                       v_amp * GaussianStream(seed, kTagVacuumSignal).samples(n);
    out.idler_trace = t_amp * pair.idler_trace +
                      v_amp * GaussianStream(seed, kTagVacuumIdler).samples(n);
    return out;
}

}  // namespace opo
