#include "opo/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "opo/random.hpp"
#include "opo/variance.hpp"

namespace opo {
namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

// Stream tags for the optional per-column scatter.
constexpr std::uint64_t kTagJitterDiff = 16;
constexpr std::uint64_t kTagJitterSum = 17;
constexpr std::uint64_t kTagJitterSingle = 18;

const SweepChannel* channel_at(const std::vector<SweepChannel>& channels, double detuning) {
    for (const auto& ch : channels) {
        if (std::abs(detuning - ch.center) <= ch.width / 2.0) return &ch;
    }
    return nullptr;
}

}  // namespace

SweepTrace detuning_sweep(const CavityParams& cavity, const DetectionChain& chain,
                          const SweepConfig& config, std::uint64_t seed) {
    require(config.span > 0.0, "sweep: span must be positive");
    require(config.points >= 2, "sweep: need at least two points");
    require(config.sweep_time > 0.0, "sweep: sweep_time must be positive");
    require(config.jitter >= 0.0, "sweep: jitter must be nonnegative");
    for (const auto& ch : config.channels) {
        require(ch.width > 0.0, "sweep: channel width must be positive");
        require(ch.sigma >= 1.0, "sweep: channel sigma must be at least 1");
    }

    // Channels must not overlap: sort the intervals and check neighbors.
    std::vector<SweepChannel> sorted = config.channels;
    std::sort(sorted.begin(), sorted.end(),
              [](const SweepChannel& a, const SweepChannel& b) { return a.center < b.center; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const double prev_hi = sorted[i - 1].center + sorted[i - 1].width / 2.0;
        const double next_lo = sorted[i].center - sorted[i].width / 2.0;
        require(prev_hi < next_lo, "sweep: channels overlap");
    }

    const Eigen::Index n = config.points;
    SweepTrace trace;
    trace.detuning = Eigen::ArrayXd::LinSpaced(n, -config.span / 2.0, config.span / 2.0);
    trace.snl = Eigen::ArrayXd::Ones(n);
    trace.noise_diff = Eigen::ArrayXd::Ones(n);
    trace.noise_sum = Eigen::ArrayXd::Ones(n);
    trace.noise_single = Eigen::ArrayXd::Ones(n);
    trace.pump_transmission = Eigen::ArrayXd::Zero(n);

    const double omega = normalized_sideband(chain.nu_center, cavity);
    const double ratio = cavity.gamma0 / cavity.gamma;
    const double f = chain.electronic_floor;
    // Gain mismatch leaks each combiner port into the other; the shot-noise
    // reference is taken through the same combiner, which cancels the leakage
    // exactly when both ports sit at the vacuum level.
    const double leak = chain.cmrr_imbalance * chain.cmrr_imbalance / 4.0;
    const double combiner_norm = 1.0 + leak;

    // Pump transmission dip: Lorentzian of width gamma_p, on-resonance depth
    // from the pump coupling ratio (full extinction when critically coupled).
    const double pump_ratio = cavity.gamma_p0 / cavity.gamma_p;
    const double dip_depth = 1.0 - (1.0 - 2.0 * pump_ratio) * (1.0 - 2.0 * pump_ratio);

    for (Eigen::Index k = 0; k < n; ++k) {
        const double det = trace.detuning[k];
        const double x = 2.0 * det / cavity.gamma_p;
        trace.pump_transmission[k] = 1.0 - dip_depth / (1.0 + x * x);

        const SweepChannel* ch = channel_at(sorted, det);
        if (ch == nullptr) continue;

        // Squared-Lorentzian taper of the pump parameter across the channel.
        const double u = (det - ch->center) / (ch->width / 2.0);
        const double lorentz = 1.0 / (1.0 + u * u);
        const double sigma = 1.0 + (ch->sigma - 1.0) * lorentz * lorentz;

        const double v_minus = twin_difference_variance(ratio, chain.eta, omega).value_snu;
        const double v_plus = twin_sum_variance(ratio, chain.eta, omega, sigma).value_snu;
        const double v_single = single_beam_variance(ratio, chain.eta, omega, sigma).value_snu;

        const double diff_true = (v_minus + leak * v_plus) / combiner_norm;
        const double sum_true = (v_plus + leak * v_minus) / combiner_norm;

        trace.noise_diff[k] = measured_from_true_snu(diff_true, f);
        trace.noise_sum[k] = measured_from_true_snu(sum_true, f);
        trace.noise_single[k] = measured_from_true_snu(v_single, f);
    }

    if (config.jitter > 0.0) {
        GaussianStream gd(seed, kTagJitterDiff);
        GaussianStream gs(seed, kTagJitterSum);
        GaussianStream g1(seed, kTagJitterSingle);
        const double floor_min = f + 1e-12;
        for (Eigen::Index k = 0; k < n; ++k) {
            trace.noise_diff[k] =
                std::max(trace.noise_diff[k] * (1.0 + config.jitter * gd.next()), floor_min);
            trace.noise_sum[k] =
                std::max(trace.noise_sum[k] * (1.0 + config.jitter * gs.next()), floor_min);
            trace.noise_single[k] =
                std::max(trace.noise_single[k] * (1.0 + config.jitter * g1.next()), floor_min);
        }
    }

    trace.channel_markers.reserve(sorted.size());
    for (const auto& ch : sorted) {
        trace.channel_markers.push_back({ch.center, ch.sigma});
    }
    return trace;
}

}  // namespace opo
