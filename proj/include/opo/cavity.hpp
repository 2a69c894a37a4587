#ifndef OPO_CAVITY_HPP
#define OPO_CAVITY_HPP

#include <string_view>

namespace opo {

/// Linewidths and coupling rates of the pump and parametric modes.
/// All rates are energy loss rates in Hz (full linewidth). The parametric
/// total linewidth splits as gamma = alpha + gamma0.
struct CavityParams {
    double gamma_p;   ///< pump total linewidth (Hz)
    double gamma_p0;  ///< pump coupling rate (Hz)
    double gamma;     ///< parametric total linewidth (Hz)
    double gamma0;    ///< parametric coupling rate (Hz)
    double alpha;     ///< parametric intrinsic loss rate (Hz)

    /// Validating factory. Rejects nonpositive rates, gamma != alpha + gamma0
    /// (relative deviation > 1e-12), gamma0 > gamma and gamma_p0 > gamma_p.
    static CavityParams create(double gamma_p, double gamma_p0, double gamma,
                               double gamma0, double alpha);

    /// Builds the parametric split from a coupling ratio gamma0/gamma.
    static CavityParams from_coupling_ratio(double gamma_p, double gamma_p0,
                                            double gamma, double coupling_ratio);

    double coupling_ratio() const { return gamma0 / gamma; }
};

/// Pump power, threshold and the derived dimensionless operating point.
struct OperatingPoint {
    double pump_power;       ///< W
    double threshold_power;  ///< W
    double sigma;            ///< sqrt(pump_power / threshold_power)
    double nu_det;           ///< measurement sideband frequency (Hz)
    double omega;            ///< nu_det / gamma

    static OperatingPoint create(double pump_power, double threshold_power,
                                 double nu_det, const CavityParams& cavity);

    /// Convenience when the pump parameter itself is the input; pump power is
    /// back-computed as sigma^2 * threshold_power.
    static OperatingPoint from_sigma(double sigma, double threshold_power,
                                     double nu_det, const CavityParams& cavity);
};

enum class CouplingRegime { undercoupled, critical, overcoupled };

std::string_view to_string(CouplingRegime regime);

/// Omega = nu_det / gamma.
double normalized_sideband(double nu_det, const CavityParams& cavity);

/// sigma = sqrt(pump_power / threshold_power).
double pump_parameter(double pump_power, double threshold_power);

/// Cubic threshold law: P_th = k_const * gamma_p * gamma^2.
double threshold_power(double k_const, double gamma_p, double gamma);

/// Inverse of threshold_power in its first argument.
double calibrate_threshold_constant(double p_th_measured, double gamma_p,
                                    double gamma);

/// Classifies gamma0/gamma against the critical point 1/2. The classification
/// tolerance is 1e-9 relative; it is a convenience label, not physics.
CouplingRegime coupling_regime(double gamma0, double gamma);

}  // namespace opo

#endif  // OPO_CAVITY_HPP
