#ifndef OPO_VARIANCE_HPP
#define OPO_VARIANCE_HPP

#include <optional>
#include <stdexcept>
#include <string_view>

namespace opo {

/// Thrown where the above-threshold noise model has a genuine pole
/// (sigma = 1 together with omega = 0) so callers can skip the point
/// instead of propagating an infinity.
class DivergenceError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Thrown when an electronic-noise correction is impossible because the
/// measured value does not exceed the floor.
class CorrectionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class NoiseKind { difference, sum, single_beam };

std::string_view to_string(NoiseKind kind);

/// A variance in shot-noise units (SNL = 1) together with its dB view.
struct NoiseResult {
    double value_snu;
    NoiseKind kind;
    double value_db;

    static NoiseResult from_snu(double value_snu, NoiseKind kind);
};

/// 10*log10 of a shot-noise-relative variance and its inverse.
double to_db(double snu);
double from_db(double db);

/// Twin-beam difference variance: 1 - (g0/g) * eta / (1 + omega^2).
/// Independent of the pump parameter by construction.
NoiseResult twin_difference_variance(double coupling_ratio, double eta, double omega);

/// Twin-beam sum variance: 1 + (g0/g) * eta / ((sigma-1)^2 + omega^2).
/// Diverges at sigma = 1, omega = 0.
NoiseResult twin_sum_variance(double coupling_ratio, double eta, double omega,
                              double sigma);

/// Amplitude quadrature variance of one parametric beam:
/// 1 - (eta/2) (g0/g) sigma(sigma-2) / ((1+omega^2)(omega^2+(sigma-1)^2)).
NoiseResult single_beam_variance(double coupling_ratio, double eta, double omega,
                                 double sigma);

/// sigma -> infinity limit of single_beam_variance:
/// 1 - (eta/2) (g0/g) / (1 + omega^2).
NoiseResult single_beam_asymptote(double coupling_ratio, double eta, double omega);

/// Beamsplitter noise mixing: a passive transmission T maps a variance V to
/// 1 + T (V - 1).
double apply_passive_loss(double v_in_snu, double transmission);

/// Inverse of adding an independent electronic floor to both the signal and
/// the shot-noise reference: (v - floor) / (1 - floor). The floor is the
/// electronic power as a fraction of the measured shot-noise level.
double correct_electronic_noise(double v_measured_snu, double electronic_floor);

/// Relaxation-oscillation threshold, normalized frequency and the pump-
/// parameter window where nu_N lies within the cavity bandwidth (nu_N <= 1).
struct RelaxationInfo {
    double sigma_threshold;       ///< 1 + gamma_p / (4 gamma)
    std::optional<double> nu_n;   ///< present only for sigma >= sigma_threshold
    double in_band_low;           ///< = sigma_threshold
    double in_band_high;          ///< sigma_threshold + 2 gamma / gamma_p
};

/// nu_N = sqrt(gamma_p / (2 gamma)) * sqrt(sigma - sigma_threshold).
RelaxationInfo relaxation_frequency(double sigma, double gamma_p, double gamma);

}  // namespace opo

#endif  // OPO_VARIANCE_HPP
