#ifndef OPO_IO_HPP
#define OPO_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "opo/cavity.hpp"
#include "opo/detection.hpp"
#include "opo/fit.hpp"
#include "opo/photocurrent.hpp"
#include "opo/sweep.hpp"

namespace opo::io {

/// Literal written in place of a number when the analytic formula diverges
/// (the sigma = 1, omega = 0 pole).
inline constexpr const char* kDivergentToken = "inf-pole";

/// Literal written in place of a relaxation frequency below the oscillation
/// threshold.
inline constexpr const char* kBelowThresholdToken = "below-threshold";

/// Formats with enough digits that parsing the text recovers the value to
/// better than 1e-12 relative. NaN encodes a divergent entry and renders as
/// the divergent token.
std::string format_double(double value);

/// Locale-independent strict parse of a full token; the divergent token maps
/// back to NaN.
double parse_double(const std::string& token, const std::string& context);

/// Writes via a temporary file in the same directory and renames into place,
/// so a failed run never leaves a partial file behind.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

/// Analytic variances tabulated over a sigma or omega grid; NaN entries mark
/// divergent grid points.
struct VarianceTable {
    std::string grid_name;  ///< "sigma" or "omega"
    Eigen::ArrayXd grid;
    Eigen::ArrayXd noise_diff;
    Eigen::ArrayXd noise_sum;
    Eigen::ArrayXd noise_single;
};

/// Relaxation-oscillation frequencies over a sigma grid; NaN entries mark
/// below-threshold rows.
struct RelaxTable {
    double sigma_threshold;
    double window_low;   ///< sigma where nu_n enters the cavity band
    double window_high;  ///< sigma where nu_n leaves the cavity band
    Eigen::ArrayXd sigma;
    Eigen::ArrayXd nu_n;
};

std::string sweep_to_csv(const SweepTrace& trace);
SweepTrace sweep_from_csv(const std::string& text);
nlohmann::json sweep_to_json(const SweepTrace& trace);
SweepTrace sweep_from_json(const nlohmann::json& j);

std::string pair_to_csv(const PhotocurrentPair& pair);
PhotocurrentPair pair_from_csv(const std::string& text);
nlohmann::json pair_to_json(const PhotocurrentPair& pair);
PhotocurrentPair pair_from_json(const nlohmann::json& j);

std::string variance_to_csv(const VarianceTable& table);
VarianceTable variance_from_csv(const std::string& text);
nlohmann::json variance_to_json(const VarianceTable& table);
VarianceTable variance_from_json(const nlohmann::json& j);

std::string relax_to_csv(const RelaxTable& table);
RelaxTable relax_from_csv(const std::string& text);
nlohmann::json relax_to_json(const RelaxTable& table);
RelaxTable relax_from_json(const nlohmann::json& j);

/// Loads `power_uW,variance_snu[,weight]` rows. Parse failures name the line
/// number and column. Powers stay in microwatts.
std::vector<FitPoint> load_fit_data(const std::string& text);
std::string fit_data_to_csv(const std::vector<FitPoint>& data, bool with_weights);

/// FitResult plus the input echo and a sampled fitted curve for plotting.
nlohmann::json fit_result_to_json(const FitResult& result, double omega,
                                  const std::vector<FitPoint>& data, int curve_points);
std::string fit_curve_to_csv(const FitResult& result, double omega,
                             const std::vector<FitPoint>& data, int curve_points);

/// One sweep preset: its own coupling ratio and detection efficiency plus the
/// channel layout.
struct SweepPreset {
    double coupling_ratio;
    double eta;
    SweepConfig config;
};

/// Contents of a parameter file, converted to SI units (Hz, s, W).
struct Params {
    double gamma_p;
    double gamma_p0;
    double gamma;
    double coupling_ratio;
    double nu_det;
    std::vector<double> p_th_options;  ///< W
    double eta_twin;
    double eta_single;
    double cmrr_imbalance;
    double electronic_floor;
    double rbw;
    double vbw;
    int avg_count;
    double nu_center;
    SweepPreset sweep_twin;
    SweepPreset sweep_single;

    CavityParams cavity() const;
    CavityParams cavity_with_ratio(double ratio) const;
    DetectionChain chain(double eta) const;
};

Params load_params(const std::string& path);

}  // namespace opo::io

#endif  // OPO_IO_HPP
