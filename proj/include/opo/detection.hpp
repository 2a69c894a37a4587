#ifndef OPO_DETECTION_HPP
#define OPO_DETECTION_HPP

namespace opo {

/// Detection efficiency, balancing imbalance and spectrum-analyzer settings
/// of the measurement chain.
struct DetectionChain {
    double eta;              ///< total detection efficiency [0, 1]
    double cmrr_imbalance;   ///< fractional gain mismatch epsilon >= 0
    double electronic_floor; ///< electronic power / measured SNL power, [0, 1)
    double rbw;              ///< resolution bandwidth (Hz)
    double vbw;              ///< video bandwidth (Hz)
    int avg_count;           ///< running-average length (samples)
    double nu_center;        ///< zero-span center frequency (Hz)

    static DetectionChain create(double eta, double cmrr_imbalance,
                                 double electronic_floor, double rbw, double vbw,
                                 int avg_count, double nu_center);
};

/// Per-detector electronic noise variance relative to the optical shot noise:
/// floor / (1 - floor). Choosing this makes the measured shot-noise reference
/// carry exactly `floor` of electronic power.
double electronic_excess_variance(double electronic_floor);

/// Variance of the measured shot-noise reference (optical shot noise plus
/// electronic floor) relative to optical shot noise: 1 / (1 - floor).
double measured_snl_variance(double electronic_floor);

/// Forward map from a true optical variance to the value a floor-limited
/// detection chain reports: v (1 - floor) + floor. Inverse of
/// correct_electronic_noise.
double measured_from_true_snu(double v_true_snu, double electronic_floor);

/// Model-implied common-mode rejection of the balanced pair in dB: a gain
/// mismatch epsilon leaks common-mode power into the difference port with
/// gain epsilon^2 / 4, so the rejection is 10 log10(4 / epsilon^2). Requires
/// epsilon > 0.
double common_mode_rejection_db(double cmrr_imbalance);

}  // namespace opo

#endif  // OPO_DETECTION_HPP
