#include "opo/cavity.hpp"

#include <cmath>
#include <stdexcept>

namespace opo {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

CavityParams CavityParams::create(double gamma_p, double gamma_p0, double gamma,
                                  double gamma0, double alpha) {
    require(gamma_p > 0 && gamma_p0 > 0 && gamma > 0 && gamma0 > 0 && alpha > 0,
            "CavityParams: all rates must be strictly positive");
    require(gamma0 <= gamma, "CavityParams: gamma0 must not exceed gamma");
    require(gamma_p0 <= gamma_p, "CavityParams: gamma_p0 must not exceed gamma_p");
    const double deviation = std::abs(gamma - (alpha + gamma0)) / gamma;
    require(deviation <= 1e-12, "CavityParams: gamma must equal alpha + gamma0");
    return CavityParams{gamma_p, gamma_p0, gamma, gamma0, alpha};
}

CavityParams CavityParams::from_coupling_ratio(double gamma_p, double gamma_p0,
                                               double gamma, double coupling_ratio) {
    require(coupling_ratio > 0 && coupling_ratio < 1,
            "CavityParams: coupling ratio must lie in (0,1) to leave alpha > 0");
    const double gamma0 = coupling_ratio * gamma;
    return create(gamma_p, gamma_p0, gamma, gamma0, gamma - gamma0);
}

std::string_view to_string(CouplingRegime regime) {
    switch (regime) {
        case CouplingRegime::undercoupled: return "undercoupled";
        case CouplingRegime::critical: return "critical";
        case CouplingRegime::overcoupled: return "overcoupled";
    }
    return "unknown";
}

double normalized_sideband(double nu_det, const CavityParams& cavity) {
    require(nu_det >= 0, "normalized_sideband: nu_det must be nonnegative");
    return nu_det / cavity.gamma;
}

double pump_parameter(double pump_power, double threshold_power) {
    require(threshold_power > 0, "pump_parameter: threshold power must be positive");
    require(pump_power >= 0, "pump_parameter: pump power must be nonnegative");
    return std::sqrt(pump_power / threshold_power);
}

double threshold_power(double k_const, double gamma_p, double gamma) {
    require(k_const > 0, "threshold_power: threshold constant must be positive");
    return k_const * gamma_p * gamma * gamma;
}

double calibrate_threshold_constant(double p_th_measured, double gamma_p,
                                    double gamma) {
    require(p_th_measured > 0 && gamma_p > 0 && gamma > 0,
            "calibrate_threshold_constant: all inputs must be positive");
    return p_th_measured / (gamma_p * gamma * gamma);
}

CouplingRegime coupling_regime(double gamma0, double gamma) {
    require(gamma0 > 0 && gamma > 0, "coupling_regime: rates must be positive");
    require(gamma0 <= gamma, "coupling_regime: gamma0 must not exceed gamma");
    const double ratio = gamma0 / gamma;
    constexpr double tol = 1e-9;
    if (std::abs(ratio - 0.5) <= 0.5 * tol) return CouplingRegime::critical;
    return ratio < 0.5 ? CouplingRegime::undercoupled : CouplingRegime::overcoupled;
}

OperatingPoint OperatingPoint::create(double pump_power, double threshold_power,
                                      double nu_det, const CavityParams& cavity) {
    const double sigma = pump_parameter(pump_power, threshold_power);
    const double omega = normalized_sideband(nu_det, cavity);
    return OperatingPoint{pump_power, threshold_power, sigma, nu_det, omega};
}

OperatingPoint OperatingPoint::from_sigma(double sigma, double threshold_power,
                                          double nu_det, const CavityParams& cavity) {
    if (sigma < 0) throw std::invalid_argument("OperatingPoint: sigma must be nonnegative");
    return create(sigma * sigma * threshold_power, threshold_power, nu_det, cavity);
}

}  // namespace opo
