#include "opo/zero_span.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace opo {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// One-pole coefficient for the band filter. The cutoff rbw/pi makes the
// two-sided noise-equivalent bandwidth of the complex filter equal to rbw.
double band_pole(double rbw, double sample_rate) {
    return std::exp(-2.0 * rbw / sample_rate);
}

}  // namespace

double shot_noise_reference(double dc_level, double calibration) {
    if (dc_level < 0)
        throw std::invalid_argument("shot_noise_reference: DC level must be nonnegative");
    if (calibration <= 0)
        throw std::invalid_argument("shot_noise_reference: calibration must be positive");
    return calibration * dc_level;
}

Eigen::ArrayXd zero_span_analyze(const Eigen::ArrayXd& trace, double sample_rate,
                                 const DetectionChain& chain) {
    if (sample_rate <= 2.0 * (chain.nu_center + chain.rbw))
        throw std::invalid_argument(
            "zero_span_analyze: sample rate too low for the requested band");
    const auto n = trace.size();
    Eigen::ArrayXd out(n);
    if (n == 0) return out;

    const double a = band_pole(chain.rbw, sample_rate);
    const double b = std::exp(-kTwoPi * chain.vbw / sample_rate);
    // White-noise power gain of the normalized band filter, sum h[k]^2.
    const double band_gain = (1.0 - a) / (1.0 + a);
    const double snl_power = shot_noise_reference(
        band_gain * measured_snl_variance(chain.electronic_floor));

    const double phase_step = -kTwoPi * chain.nu_center / sample_rate;
    std::complex<double> rotor(1.0, 0.0);
    const std::complex<double> step(std::cos(phase_step), std::sin(phase_step));
    std::complex<double> band_state(0.0, 0.0);
    double video_state = 0.0;

    for (Eigen::Index k = 0; k < n; ++k) {
        band_state = a * band_state + (1.0 - a) * (trace[k] * rotor);
        rotor *= step;
        if ((k & 0xffff) == 0xffff) rotor /= std::abs(rotor);  // magnitude drift
        const double power = std::norm(band_state) / snl_power;
        video_state = b * video_state + (1.0 - b) * power;
        out[k] = video_state;
    }

    if (chain.avg_count > 1) {
        Eigen::ArrayXd smoothed(n);
        double acc = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            acc += out[k];
            if (k >= chain.avg_count) {
                acc -= out[k - chain.avg_count];
                smoothed[k] = acc / chain.avg_count;
            } else {
                smoothed[k] = acc / static_cast<double>(k + 1);
            }
        }
        out = std::move(smoothed);
    }
    return out;
}

Eigen::Index zero_span_warmup_samples(const DetectionChain& chain,
                                      double sample_rate) {
    const double tau_band = sample_rate / (2.0 * chain.rbw);
    const double tau_video = sample_rate / (kTwoPi * chain.vbw);
    const double settle = 8.0 * std::max(tau_band, tau_video);
    return static_cast<Eigen::Index>(std::ceil(settle)) + chain.avg_count;
}

double zero_span_mean(const Eigen::ArrayXd& snu_series, Eigen::Index warmup) {
    if (snu_series.size() <= warmup)
        throw std::invalid_argument("zero_span_mean: series shorter than warmup");
    return snu_series.tail(snu_series.size() - warmup).mean();
}

double zero_span_standard_error(double value_snu, double duration, double rbw) {
    if (duration <= 0 || rbw <= 0)
        throw std::invalid_argument("zero_span_standard_error: need positive duration and rbw");
    return value_snu / std::sqrt(2.0 * duration * rbw);
}

}  // namespace opo
