#ifndef OPO_FIT_HPP
#define OPO_FIT_HPP

#include <stdexcept>
#include <utility>
#include <vector>

namespace opo {

/// One measured point of the single-beam noise-versus-pump-power curve.
/// Powers carry whatever unit the caller uses — the fitted threshold comes
/// back in the same unit. Variance in corrected shot-noise units.
struct FitPoint {
    double power;
    double variance;
    double weight = 1.0;
};

struct FitConfig {
    int max_iterations = 500;
    double tolerance = 1e-10;      ///< relative objective change at convergence
    double sigma_margin = 1e-3;    ///< soft lower bound keeps sigma above 1 + margin
    double penalty_scale = 10.0;   ///< weight of the domain penalty residuals
};

struct FitResult {
    double p_th_hat;               ///< threshold power, in the unit of the input powers
    double scale_hat;              ///< noise-scale prefactor eta * gamma0 / gamma
    double asymptote_hat;          ///< high-pump variance limit, 1 - scale / (2 (1 + omega^2))
    double p_th_uncertainty;
    double scale_uncertainty;
    double asymptote_uncertainty;
    double residual_rms;           ///< weighted RMS residual (SNU)
    bool converged;
    int iterations;
};

/// Thrown when the optimizer exhausts its iteration budget; carries the best
/// iterate found so callers can inspect or report it.
class FitConvergenceError : public std::runtime_error {
public:
    FitConvergenceError(const std::string& what, FitResult best)
        : std::runtime_error(what), best_iterate(best) {}
    FitResult best_iterate;
};

/// Single-beam noise model evaluated at pump power `power`:
/// V = 1 - (scale / 2) * sigma (sigma - 2) / ((1 + omega^2)(omega^2 + (sigma - 1)^2))
/// with sigma = sqrt(power / p_th).
double single_beam_model(double power, double p_th, double scale, double omega);

/// Fits threshold power and noise scale to measured single-beam variances by
/// damped least squares, starting from a threshold just below the lowest
/// power. A stagnating run restarts from a derivative-free simplex before the
/// final polish. Uncertainties come from the inverse numerical Hessian of the
/// objective at the optimum, scaled by the residual variance.
///
/// Requires at least four points, powers spanning a factor of four or more,
/// and positive powers, variances, and weights.
FitResult fit_single_beam_noise(const std::vector<FitPoint>& data, double omega,
                                const FitConfig& config = {});

/// Mean of the decibel values of repeated squeezing measurements together
/// with the standard error of that mean. Input pairs are (power, variance in
/// SNU); at least two points with positive variances are required.
std::pair<double, double> mean_squeezing(const std::vector<std::pair<double, double>>& runs);

}  // namespace opo

#endif  // OPO_FIT_HPP
