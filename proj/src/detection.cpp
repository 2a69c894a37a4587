#include "opo/detection.hpp"

#include <cmath>
#include <stdexcept>

namespace opo {

DetectionChain DetectionChain::create(double eta, double cmrr_imbalance,
                                      double electronic_floor, double rbw,
                                      double vbw, int avg_count, double nu_center) {
    if (eta < 0 || eta > 1)
        throw std::invalid_argument("DetectionChain: eta must lie in [0, 1]");
    if (cmrr_imbalance < 0)
        throw std::invalid_argument("DetectionChain: imbalance must be nonnegative");
    if (electronic_floor < 0 || electronic_floor >= 1)
        throw std::invalid_argument("DetectionChain: electronic floor must lie in [0, 1)");
    if (!(rbw > vbw && vbw > 0))
        throw std::invalid_argument("DetectionChain: need rbw > vbw > 0");
    if (avg_count < 1)
        throw std::invalid_argument("DetectionChain: averaging length must be >= 1");
    if (nu_center <= 0)
        throw std::invalid_argument("DetectionChain: center frequency must be positive");
    return DetectionChain{eta, cmrr_imbalance, electronic_floor, rbw, vbw,
                          avg_count, nu_center};
}

double electronic_excess_variance(double electronic_floor) {
    return electronic_floor / (1.0 - electronic_floor);
}

double measured_snl_variance(double electronic_floor) {
    return 1.0 / (1.0 - electronic_floor);
}

double measured_from_true_snu(double v_true_snu, double electronic_floor) {
    return v_true_snu * (1.0 - electronic_floor) + electronic_floor;
}

double common_mode_rejection_db(double cmrr_imbalance) {
    if (cmrr_imbalance <= 0)
        throw std::invalid_argument("common_mode_rejection_db: imbalance must be positive");
    return 10.0 * std::log10(4.0 / (cmrr_imbalance * cmrr_imbalance));
}

}  // namespace opo
