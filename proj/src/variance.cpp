#include "opo/variance.hpp"

#include <cmath>

namespace opo {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

void check_common(double coupling_ratio, double eta, double omega) {
    require(coupling_ratio > 0 && coupling_ratio <= 1,
            "coupling ratio must lie in (0, 1]");
    require(eta >= 0 && eta <= 1, "detection efficiency must lie in [0, 1]");
    require(omega >= 0, "normalized sideband must be nonnegative");
}

void check_above_threshold(double sigma, double omega) {
    require(sigma >= 1, "pump parameter must be >= 1 (above-threshold model)");
    if (sigma == 1.0 && omega == 0.0)
        throw DivergenceError("noise model diverges at sigma = 1, omega = 0");
}

}  // namespace

std::string_view to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::difference: return "difference";
        case NoiseKind::sum: return "sum";
        case NoiseKind::single_beam: return "single_beam";
    }
    return "unknown";
}

NoiseResult NoiseResult::from_snu(double value_snu, NoiseKind kind) {
    require(value_snu > 0, "NoiseResult: variance must be positive");
    return NoiseResult{value_snu, kind, to_db(value_snu)};
}

double to_db(double snu) {
    require(snu > 0, "to_db: variance must be positive");
    return 10.0 * std::log10(snu);
}

double from_db(double db) { return std::pow(10.0, db / 10.0); }

NoiseResult twin_difference_variance(double coupling_ratio, double eta, double omega) {
    check_common(coupling_ratio, eta, omega);
    const double value = 1.0 - coupling_ratio * eta / (1.0 + omega * omega);
    return NoiseResult::from_snu(value, NoiseKind::difference);
}

NoiseResult twin_sum_variance(double coupling_ratio, double eta, double omega,
                              double sigma) {
    check_common(coupling_ratio, eta, omega);
    check_above_threshold(sigma, omega);
    const double sm1 = sigma - 1.0;
    const double value = 1.0 + coupling_ratio * eta / (sm1 * sm1 + omega * omega);
    return NoiseResult::from_snu(value, NoiseKind::sum);
}

NoiseResult single_beam_variance(double coupling_ratio, double eta, double omega,
                                 double sigma) {
    check_common(coupling_ratio, eta, omega);
    check_above_threshold(sigma, omega);
    const double sm1 = sigma - 1.0;
    const double denom = (1.0 + omega * omega) * (omega * omega + sm1 * sm1);
    const double value =
        1.0 - 0.5 * eta * coupling_ratio * sigma * (sigma - 2.0) / denom;
    return NoiseResult::from_snu(value, NoiseKind::single_beam);
}

NoiseResult single_beam_asymptote(double coupling_ratio, double eta, double omega) {
    check_common(coupling_ratio, eta, omega);
    const double value = 1.0 - 0.5 * eta * coupling_ratio / (1.0 + omega * omega);
    return NoiseResult::from_snu(value, NoiseKind::single_beam);
}

double apply_passive_loss(double v_in_snu, double transmission) {
    require(v_in_snu > 0, "apply_passive_loss: variance must be positive");
    require(transmission >= 0 && transmission <= 1,
            "apply_passive_loss: transmission must lie in [0, 1]");
    return 1.0 + transmission * (v_in_snu - 1.0);
}

double correct_electronic_noise(double v_measured_snu, double electronic_floor) {
    require(electronic_floor >= 0 && electronic_floor < 1,
            "correct_electronic_noise: floor must lie in [0, 1)");
    if (v_measured_snu <= electronic_floor)
        throw CorrectionError(
            "correct_electronic_noise: measured value does not exceed the floor");
    return (v_measured_snu - electronic_floor) / (1.0 - electronic_floor);
}

RelaxationInfo relaxation_frequency(double sigma, double gamma_p, double gamma) {
    require(gamma_p > 0 && gamma > 0, "relaxation_frequency: rates must be positive");
    require(sigma >= 0, "relaxation_frequency: sigma must be nonnegative");
    const double sigma_threshold = 1.0 + gamma_p / (4.0 * gamma);
    RelaxationInfo info;
    info.sigma_threshold = sigma_threshold;
    info.in_band_low = sigma_threshold;
    info.in_band_high = sigma_threshold + 2.0 * gamma / gamma_p;
    if (sigma >= sigma_threshold) {
        info.nu_n = std::sqrt(gamma_p / (2.0 * gamma)) * std::sqrt(sigma - sigma_threshold);
    }
    return info;
}

}  // namespace opo
