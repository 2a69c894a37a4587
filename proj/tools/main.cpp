#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "opo/cavity.hpp"
#include "opo/detection.hpp"
#include "opo/fit.hpp"
#include "opo/io.hpp"
#include "opo/photocurrent.hpp"
#include "opo/sweep.hpp"
#include "opo/variance.hpp"
#include "opo/zero_span.hpp"

namespace {

// Default seed for reproducible outputs; override with --seed.
constexpr std::uint64_t kDefaultSeed = 0x5EED;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

bool given(double v) { return !std::isnan(v); }

struct CommonOpts {
    std::string params_path;
    std::string out;
    std::string format = "csv";
    std::uint64_t seed = kDefaultSeed;
};

void add_common(CLI::App* cmd, CommonOpts& c, bool with_format, bool with_seed) {
    cmd->add_option("--params", c.params_path, "parameter file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "output file path")->required();
    if (with_format) {
        cmd->add_option("--format", c.format, "output format (default csv)")
            ->check(CLI::IsMember({"csv", "json"}));
    }
    if (with_seed) {
        cmd->add_option("--seed", c.seed, "RNG seed (default 24301 = 0x5EED)");
    }
}

/// Writes every output or none: later failures remove the files committed
/// earlier in the same command.
void commit_outputs(const std::vector<std::pair<std::string, std::string>>& outputs) {
    std::vector<std::string> done;
    try {
        for (const auto& [path, content] : outputs) {
            opo::io::write_text_atomic(path, content);
            done.push_back(path);
        }
    } catch (...) {
        for (const auto& path : done) std::remove(path.c_str());
        throw;
    }
}

struct VarianceOpts {
    std::string grid = "sigma";
    double grid_min = kUnset;
    double grid_max = kUnset;
    int grid_count = 50;
    double sigma = 3.0;       // fixed sigma for omega grids
    double omega = kUnset;    // fixed omega for sigma grids; default nu_det/gamma
    double coupling_ratio = kUnset;
    double eta = kUnset;      // overrides both column efficiencies
};

void run_variance(const CommonOpts& common, const VarianceOpts& opt) {
    const opo::io::Params params = opo::io::load_params(common.params_path);
    const bool sigma_grid = opt.grid == "sigma";
    const double lo = given(opt.grid_min) ? opt.grid_min : (sigma_grid ? 1.1 : 0.0);
    const double hi = given(opt.grid_max) ? opt.grid_max : (sigma_grid ? 10.0 : 3.0);
    if (opt.grid_count < 0) throw std::runtime_error("variance: --grid-count must be >= 0");
    if (opt.grid_count > 1 && !(hi > lo)) {
        throw std::runtime_error("variance: --grid-max must exceed --grid-min");
    }
    if (sigma_grid && opt.grid_count > 0 && lo < 1.0) {
        throw std::runtime_error("variance: sigma grid must start at or above threshold");
    }
    if (!sigma_grid && opt.grid_count > 0 && lo < 0.0) {
        throw std::runtime_error("variance: omega grid must be nonnegative");
    }

    const double ratio = given(opt.coupling_ratio) ? opt.coupling_ratio : params.coupling_ratio;
    const double eta_twin = given(opt.eta) ? opt.eta : params.eta_twin;
    const double eta_single = given(opt.eta) ? opt.eta : params.eta_single;
    const double omega_fixed =
        given(opt.omega) ? opt.omega : params.nu_det / params.gamma;

    opo::io::VarianceTable table;
    table.grid_name = opt.grid;
    table.grid = Eigen::ArrayXd::LinSpaced(opt.grid_count, lo, hi);
    table.noise_diff.resize(opt.grid_count);
    table.noise_sum.resize(opt.grid_count);
    table.noise_single.resize(opt.grid_count);
    for (Eigen::Index k = 0; k < table.grid.size(); ++k) {
        const double sigma = sigma_grid ? table.grid[k] : opt.sigma;
        const double omega = sigma_grid ? omega_fixed : table.grid[k];
        table.noise_diff[k] = opo::twin_difference_variance(ratio, eta_twin, omega).value_snu;
        try {
            table.noise_sum[k] = opo::twin_sum_variance(ratio, eta_twin, omega, sigma).value_snu;
        } catch (const opo::DivergenceError&) {
            table.noise_sum[k] = kUnset;
        }
        try {
            table.noise_single[k] =
                opo::single_beam_variance(ratio, eta_single, omega, sigma).value_snu;
        } catch (const opo::DivergenceError&) {
            table.noise_single[k] = kUnset;
        }
    }

    const std::string content = common.format == "json"
                                    ? opo::io::variance_to_json(table).dump(2) + "\n"
                                    : opo::io::variance_to_csv(table);
    commit_outputs({{common.out, content}});
    std::cout << "wrote " << common.out << " (" << table.grid.size() << " grid points)\n";
}

struct SweepOpts {
    std::string preset = "twin";
    double span_mhz = kUnset;
    int points = 0;
    double sweep_time_ms = kUnset;
    double jitter = kUnset;
    double coupling_ratio = kUnset;
    double eta = kUnset;
};

void run_sweep(const CommonOpts& common, const SweepOpts& opt) {
    const opo::io::Params params = opo::io::load_params(common.params_path);
    opo::io::SweepPreset preset =
        opt.preset == "single" ? params.sweep_single : params.sweep_twin;
    if (given(opt.coupling_ratio)) preset.coupling_ratio = opt.coupling_ratio;
    if (given(opt.eta)) preset.eta = opt.eta;
    if (given(opt.span_mhz)) preset.config.span = opt.span_mhz * 1e6;
    if (opt.points > 0) preset.config.points = opt.points;
    if (given(opt.sweep_time_ms)) preset.config.sweep_time = opt.sweep_time_ms * 1e-3;
    if (given(opt.jitter)) preset.config.jitter = opt.jitter;

    const opo::CavityParams cavity = params.cavity_with_ratio(preset.coupling_ratio);
    const opo::DetectionChain chain = params.chain(preset.eta);
    const opo::SweepTrace trace = opo::detuning_sweep(cavity, chain, preset.config, common.seed);

    const std::string content = common.format == "json"
                                    ? opo::io::sweep_to_json(trace).dump(2) + "\n"
                                    : opo::io::sweep_to_csv(trace);
    commit_outputs({{common.out, content}});

    std::cout << "wrote " << common.out << " (" << trace.detuning.size() << " points, "
              << trace.channel_markers.size() << " channels)\n";
    Eigen::Index at = 0;
    const double vmin = trace.noise_diff.minCoeff(&at);
    try {
        const double corrected = opo::correct_electronic_noise(vmin, chain.electronic_floor);
        std::cout << "difference minimum: " << opo::io::format_double(opo::to_db(corrected))
                  << " dB corrected at detuning "
                  << opo::io::format_double(trace.detuning[at] / 1e6) << " MHz\n";
    } catch (const opo::CorrectionError&) {
        // Jittered trace can dip below the floor; skip the summary line.
    }
}

struct SimulateOpts {
    double duration = 0.05;       // s
    double sample_rate = 16e6;    // Hz
    double sigma = kUnset;
    double pump_uw = kUnset;
    double p_th_uw = kUnset;
    double coupling_ratio = kUnset;
    double eta = kUnset;
    double attenuation = kUnset;  // optional passive transmission
};

void run_simulate(const CommonOpts& common, const SimulateOpts& opt) {
    const opo::io::Params params = opo::io::load_params(common.params_path);
    const double ratio = given(opt.coupling_ratio) ? opt.coupling_ratio : params.coupling_ratio;
    const double eta = given(opt.eta) ? opt.eta : params.eta_twin;
    const opo::CavityParams cavity = params.cavity_with_ratio(ratio);
    const opo::DetectionChain chain = params.chain(eta);

    // Threshold default: the last (fitted) entry of the parameter file options.
    const double p_th = given(opt.p_th_uw) ? opt.p_th_uw * 1e-6 : params.p_th_options.back();
    opo::OperatingPoint op =
        given(opt.pump_uw)
            ? opo::OperatingPoint::create(opt.pump_uw * 1e-6, p_th, params.nu_det, cavity)
            : opo::OperatingPoint::from_sigma(given(opt.sigma) ? opt.sigma : 1.2, p_th,
                                              params.nu_det, cavity);

    opo::PhotocurrentPair pair = opo::simulate_photocurrents(
        cavity, op, chain, opt.duration, opt.sample_rate, common.seed);
    if (given(opt.attenuation)) {
        pair = opo::attenuate_pair(pair, opt.attenuation, common.seed);
    }

    const std::string content = common.format == "json"
                                    ? opo::io::pair_to_json(pair).dump() + "\n"
                                    : opo::io::pair_to_csv(pair);
    commit_outputs({{common.out, content}});
    std::cout << "wrote " << common.out << " (" << pair.signal_trace.size()
              << " samples at sigma = " << opo::io::format_double(op.sigma) << ")\n";

    const Eigen::Index warmup = opo::zero_span_warmup_samples(chain, opt.sample_rate);
    if (pair.signal_trace.size() <= warmup) {
        std::cout << "trace shorter than the filter warmup; skipping zero-span summary\n";
        return;
    }
    const double steady = (pair.signal_trace.size() - warmup) / opt.sample_rate;
    const auto report = [&](const char* name, const Eigen::ArrayXd& trace) {
        const double measured =
            opo::zero_span_mean(opo::zero_span_analyze(trace, opt.sample_rate, chain), warmup);
        const double se = opo::zero_span_standard_error(measured, steady, chain.rbw);
        std::cout << name << ": " << opo::io::format_double(measured) << " +- "
                  << opo::io::format_double(se) << " SNU measured";
        try {
            const double corrected =
                opo::correct_electronic_noise(measured, chain.electronic_floor);
            std::cout << ", " << opo::io::format_double(corrected) << " SNU corrected";
        } catch (const opo::CorrectionError&) {
        }
        std::cout << "\n";
    };
    report("difference", opo::balanced_combine(pair, opo::CombineMode::difference, chain));
    report("sum", opo::balanced_combine(pair, opo::CombineMode::sum, chain));
    report("single", pair.signal_trace);
}

struct FitOpts {
    std::string data_path;
    std::string curve_out;
    double omega = kUnset;
};

void run_fit(const CommonOpts& common, const FitOpts& opt) {
    const opo::io::Params params = opo::io::load_params(common.params_path);
    const std::vector<opo::FitPoint> data =
        opo::io::load_fit_data(opo::io::read_text(opt.data_path));
    const double omega = given(opt.omega) ? opt.omega : params.nu_det / params.gamma;
    const std::string curve_out =
        opt.curve_out.empty() ? common.out + ".curve.csv" : opt.curve_out;

    opo::FitResult result;
    try {
        result = opo::fit_single_beam_noise(data, omega);
    } catch (const opo::FitConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n"
                  << "best iterate: p_th = " << opo::io::format_double(e.best_iterate.p_th_hat)
                  << " uW, scale = " << opo::io::format_double(e.best_iterate.scale_hat)
                  << ", residual rms = "
                  << opo::io::format_double(e.best_iterate.residual_rms) << " SNU after "
                  << e.best_iterate.iterations << " iterations\n";
        std::exit(1);
    }

    constexpr int kCurvePoints = 200;
    commit_outputs({
        {common.out, opo::io::fit_result_to_json(result, omega, data, kCurvePoints).dump(2) + "\n"},
        {curve_out, opo::io::fit_curve_to_csv(result, omega, data, kCurvePoints)},
    });
    std::cout << "wrote " << common.out << " and " << curve_out << "\n"
              << "p_th = " << opo::io::format_double(result.p_th_hat) << " +- "
              << opo::io::format_double(result.p_th_uncertainty) << " uW\n"
              << "asymptote = " << opo::io::format_double(result.asymptote_hat) << " +- "
              << opo::io::format_double(result.asymptote_uncertainty) << " SNU\n"
              << "residual rms = " << opo::io::format_double(result.residual_rms) << " SNU ("
              << result.iterations << " iterations)\n";
}

struct RelaxOpts {
    double grid_min = 1.0;
    double grid_max = 4.0;
    int grid_count = 301;
};

void run_relax(const CommonOpts& common, const RelaxOpts& opt) {
    const opo::io::Params params = opo::io::load_params(common.params_path);
    if (opt.grid_count < 1) throw std::runtime_error("relax: --grid-count must be >= 1");
    if (opt.grid_count > 1 && !(opt.grid_max > opt.grid_min)) {
        throw std::runtime_error("relax: --grid-max must exceed --grid-min");
    }

    opo::io::RelaxTable table;
    table.sigma = Eigen::ArrayXd::LinSpaced(opt.grid_count, opt.grid_min, opt.grid_max);
    table.nu_n.resize(table.sigma.size());
    for (Eigen::Index k = 0; k < table.sigma.size(); ++k) {
        const opo::RelaxationInfo info =
            opo::relaxation_frequency(table.sigma[k], params.gamma_p, params.gamma);
        table.sigma_threshold = info.sigma_threshold;
        table.window_low = info.in_band_low;
        table.window_high = info.in_band_high;
        table.nu_n[k] = info.nu_n.value_or(kUnset);
    }

    const std::string content = common.format == "json"
                                    ? opo::io::relax_to_json(table).dump(2) + "\n"
                                    : opo::io::relax_to_csv(table);
    commit_outputs({{common.out, content}});
    std::cout << "wrote " << common.out << " (" << table.sigma.size() << " grid points)\n"
              << "relaxation threshold sigma = "
              << opo::io::format_double(table.sigma_threshold) << "\n"
              << "in-band window sigma = [" << opo::io::format_double(table.window_low)
              << ", " << opo::io::format_double(table.window_high) << "]\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Above-threshold OPO intensity-noise models, detection-chain simulator "
                 "and fitter"};
    app.require_subcommand(1);

    CommonOpts var_common, sweep_common, sim_common, fit_common, relax_common;
    VarianceOpts var_opts;
    SweepOpts sweep_opts;
    SimulateOpts sim_opts;
    FitOpts fit_opts;
    RelaxOpts relax_opts;

    CLI::App* var = app.add_subcommand(
        "variance", "Tabulate analytic twin-beam and single-beam variances over a grid");
    add_common(var, var_common, true, false);
    var->add_option("--grid", var_opts.grid, "grid variable (default sigma)")
        ->check(CLI::IsMember({"sigma", "omega"}));
    var->add_option("--grid-min", var_opts.grid_min, "grid start (default 1.1 / 0)");
    var->add_option("--grid-max", var_opts.grid_max, "grid end (default 10 / 3)");
    var->add_option("--grid-count", var_opts.grid_count, "grid points (default 50)");
    var->add_option("--sigma", var_opts.sigma, "fixed pump parameter for omega grids");
    var->add_option("--omega", var_opts.omega,
                    "fixed sideband for sigma grids (default nu_det/gamma)");
    var->add_option("--coupling-ratio", var_opts.coupling_ratio, "gamma0/gamma override");
    var->add_option("--eta", var_opts.eta, "efficiency override for all columns");

    CLI::App* sweep = app.add_subcommand(
        "sweep", "Render the expected multi-channel traces of a pump-detuning sweep");
    add_common(sweep, sweep_common, true, true);
    sweep->add_option("--preset", sweep_opts.preset, "channel preset (default twin)")
        ->check(CLI::IsMember({"twin", "single"}));
    sweep->add_option("--span-MHz", sweep_opts.span_mhz, "detuning span override");
    sweep->add_option("--points", sweep_opts.points, "sample count override");
    sweep->add_option("--sweep-time-ms", sweep_opts.sweep_time_ms, "sweep time override");
    sweep->add_option("--jitter", sweep_opts.jitter,
                      "relative per-point scatter (default from preset, usually 0)");
    sweep->add_option("--coupling-ratio", sweep_opts.coupling_ratio, "gamma0/gamma override");
    sweep->add_option("--eta", sweep_opts.eta, "detection efficiency override");

    CLI::App* sim = app.add_subcommand(
        "simulate", "Generate seeded photocurrent traces and their zero-span summary");
    add_common(sim, sim_common, true, true);
    sim->add_option("--duration", sim_opts.duration, "trace duration in s (default 0.05)");
    sim->add_option("--sample-rate", sim_opts.sample_rate,
                    "sample rate in Hz (default 16e6)");
    CLI::Option* sig = sim->add_option("--sigma", sim_opts.sigma,
                                       "pump parameter (default 1.2)");
    sim->add_option("--pump-uW", sim_opts.pump_uw, "pump power; implies sigma")
        ->excludes(sig);
    sim->add_option("--p-th-uW", sim_opts.p_th_uw,
                    "threshold power (default last parameter-file option)");
    sim->add_option("--coupling-ratio", sim_opts.coupling_ratio, "gamma0/gamma override");
    sim->add_option("--eta", sim_opts.eta, "detection efficiency (default eta_twin)");
    sim->add_option("--attenuation", sim_opts.attenuation,
                    "passive transmission applied to both beams")
        ->check(CLI::Range(0.0, 1.0));

    CLI::App* fit = app.add_subcommand(
        "fit", "Fit threshold power and noise scale to single-beam noise data");
    add_common(fit, fit_common, false, false);
    fit->add_option("--data", fit_opts.data_path, "input CSV power_uW,variance_snu[,weight]")
        ->required()
        ->check(CLI::ExistingFile);
    fit->add_option("--curve-out", fit_opts.curve_out,
                    "fitted-curve CSV path (default <out>.curve.csv)");
    fit->add_option("--omega", fit_opts.omega,
                    "normalized sideband (default nu_det/gamma)");

    CLI::App* relax = app.add_subcommand(
        "relax", "Tabulate relaxation-oscillation frequencies and the in-band window");
    add_common(relax, relax_common, true, false);
    relax->add_option("--grid-min", relax_opts.grid_min, "sigma grid start (default 1)");
    relax->add_option("--grid-max", relax_opts.grid_max, "sigma grid end (default 4)");
    relax->add_option("--grid-count", relax_opts.grid_count, "grid points (default 301)");

    var->callback([&] { run_variance(var_common, var_opts); });
    sweep->callback([&] { run_sweep(sweep_common, sweep_opts); });
    sim->callback([&] { run_simulate(sim_common, sim_opts); });
    fit->callback([&] { run_fit(fit_common, fit_opts); });
    relax->callback([&] { run_relax(relax_common, relax_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
