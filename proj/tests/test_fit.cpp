#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "opo/fit.hpp"
#include "opo/variance.hpp"
#include "synthetic.hpp"

using namespace opo;

namespace {

std::vector<FitPoint> noiseless_curve(double p_th, double scale, double omega) {
    std::vector<FitPoint> data;
    for (int k = 0; k < 20; ++k) {
        const double power = 15.0 + (500.0 - 15.0) * k / 19.0;
        data.push_back({power, single_beam_model(power, p_th, scale, omega), 1.0});
    }
    return data;
}

}  // namespace

TEST_CASE("model agrees with the analytic single-beam variance") {
    const double ratio = 0.22;
    const double eta = 0.73;
    const double omega = 0.6;
    const double p_th = 12.3;
    for (double power : {14.0, 30.0, 49.2, 120.0, 400.0}) {
        const double sigma = std::sqrt(power / p_th);
        const double direct = single_beam_variance(ratio, eta, omega, sigma).value_snu;
        CHECK(single_beam_model(power, p_th, ratio * eta, omega) ==
              doctest::Approx(direct).epsilon(1e-12));
    }
    // exactly on the shot-noise line at sigma = 2 (power = 4 p_th)
    CHECK(single_beam_model(4.0 * p_th, p_th, 0.5, 0.6) == 1.0);
    CHECK_THROWS_AS(single_beam_model(-1.0, p_th, 0.5, 0.6), std::invalid_argument);
}

TEST_CASE("model gradient matches central differences") {
    const double p_th = 12.3;
    const double scale = 0.16;
    const double omega = 0.6;
    for (double power : {20.0, 60.0, 180.0, 450.0}) {
        const double sigma = std::sqrt(power / p_th);
        const double e = omega * omega + (sigma - 1.0) * (sigma - 1.0);
        const double a = 1.0 + omega * omega;
        const double d_scale = -0.5 * sigma * (sigma - 2.0) / (a * e);
        const double d_pth =
            -0.5 * scale * (2.0 * (sigma - 1.0) / (e * e)) * (-sigma / (2.0 * p_th));

        const double hs = scale * 1e-6;
        const double num_scale = (single_beam_model(power, p_th, scale + hs, omega) -
                                  single_beam_model(power, p_th, scale - hs, omega)) /
                                 (2.0 * hs);
        const double hp = p_th * 1e-6;
        const double num_pth = (single_beam_model(power, p_th + hp, scale, omega) -
                                single_beam_model(power, p_th - hp, scale, omega)) /
                               (2.0 * hp);
        CHECK(num_scale == doctest::Approx(d_scale).epsilon(1e-7));
        CHECK(num_pth == doctest::Approx(d_pth).epsilon(1e-5));
    }
}

TEST_CASE("noiseless data is recovered essentially exactly") {
    const double p_th = 12.3;
    const double scale = 0.1606;
    const double omega = 0.6;
    const FitResult fit = fit_single_beam_noise(noiseless_curve(p_th, scale, omega), omega);
    CHECK(fit.converged);
    CHECK(fit.p_th_hat == doctest::Approx(p_th).epsilon(1e-6));
    CHECK(fit.scale_hat == doctest::Approx(scale).epsilon(1e-6));
    CHECK(fit.asymptote_hat ==
          doctest::Approx(1.0 - scale / (2.0 * (1.0 + omega * omega))).epsilon(1e-6));
    CHECK(fit.residual_rms < 1e-7);
    CHECK(fit.iterations >= 1);
}

TEST_CASE("scattered data is recovered within its noise level") {
    const std::vector<FitPoint> data = test::make_threshold_scan(3);
    const FitResult fit = fit_single_beam_noise(data, test::kScanOmega);
    CHECK(fit.converged);
    CHECK(std::abs(fit.p_th_hat - test::kScanThreshold) / test::kScanThreshold < 0.05);
    CHECK(std::abs(fit.asymptote_hat - test::scan_asymptote()) < 0.02);
    CHECK(fit.residual_rms > 0.005);
    CHECK(fit.residual_rms < 0.05);
    CHECK(fit.p_th_uncertainty > 0.0);
    CHECK(fit.scale_uncertainty > 0.0);
    CHECK(fit.asymptote_uncertainty ==
          doctest::Approx(fit.scale_uncertainty /
                          (2.0 * (1.0 + test::kScanOmega * test::kScanOmega)))
              .epsilon(1e-12));
    // self-consistency of the derived asymptote
    CHECK(fit.asymptote_hat ==
          doctest::Approx(1.0 - fit.scale_hat /
                                    (2.0 * (1.0 + test::kScanOmega * test::kScanOmega)))
              .epsilon(1e-12));
}

TEST_CASE("fit is invariant under data reordering") {
    std::vector<FitPoint> data = test::make_threshold_scan(5);
    const FitResult forward = fit_single_beam_noise(data, test::kScanOmega);
    std::reverse(data.begin(), data.end());
    const FitResult backward = fit_single_beam_noise(data, test::kScanOmega);
    CHECK(backward.p_th_hat == doctest::Approx(forward.p_th_hat).epsilon(1e-6));
    CHECK(backward.scale_hat == doctest::Approx(forward.scale_hat).epsilon(1e-6));
}

TEST_CASE("fit is invariant under a uniform weight rescale") {
    std::vector<FitPoint> data = test::make_threshold_scan(7);
    const FitResult base = fit_single_beam_noise(data, test::kScanOmega);
    for (auto& pt : data) pt.weight *= 7.0;
    const FitResult scaled = fit_single_beam_noise(data, test::kScanOmega);
    CHECK(scaled.p_th_hat == doctest::Approx(base.p_th_hat).epsilon(1e-6));
    CHECK(scaled.scale_hat == doctest::Approx(base.scale_hat).epsilon(1e-6));
    CHECK(scaled.p_th_uncertainty == doctest::Approx(base.p_th_uncertainty).epsilon(1e-4));
    CHECK(scaled.scale_uncertainty == doctest::Approx(base.scale_uncertainty).epsilon(1e-4));
    CHECK(scaled.residual_rms == doctest::Approx(base.residual_rms).epsilon(1e-6));
}

TEST_CASE("explicit unit weights equal the default") {
    std::vector<FitPoint> with_weights = test::make_threshold_scan(9);
    std::vector<FitPoint> without;
    for (const auto& pt : with_weights) {
        FitPoint stripped;
        stripped.power = pt.power;
        stripped.variance = pt.variance;
        without.push_back(stripped);
    }
    const FitResult a = fit_single_beam_noise(with_weights, test::kScanOmega);
    const FitResult b = fit_single_beam_noise(without, test::kScanOmega);
    CHECK(a.p_th_hat == b.p_th_hat);
    CHECK(a.scale_hat == b.scale_hat);
    CHECK(a.p_th_uncertainty == b.p_th_uncertainty);
}

TEST_CASE("fit input validation") {
    const std::vector<FitPoint> good = test::make_threshold_scan(1);
    CHECK_THROWS_AS(fit_single_beam_noise(good, -0.1), std::invalid_argument);

    std::vector<FitPoint> three(good.begin(), good.begin() + 3);
    CHECK_THROWS_AS(fit_single_beam_noise(three, 0.6), std::invalid_argument);

    std::vector<FitPoint> bad = good;
    bad[4].power = -1.0;
    CHECK_THROWS_AS(fit_single_beam_noise(bad, 0.6), std::invalid_argument);
    bad = good;
    bad[4].variance = 0.0;
    CHECK_THROWS_AS(fit_single_beam_noise(bad, 0.6), std::invalid_argument);
    bad = good;
    bad[4].weight = 0.0;
    CHECK_THROWS_AS(fit_single_beam_noise(bad, 0.6), std::invalid_argument);

    // narrow power span cannot constrain the threshold
    std::vector<FitPoint> narrow;
    for (double p : {100.0, 110.0, 120.0, 130.0, 140.0}) {
        narrow.push_back({p, 0.95, 1.0});
    }
    CHECK_THROWS_AS(fit_single_beam_noise(narrow, 0.6), std::invalid_argument);
}

TEST_CASE("exhausted iteration budget reports the best iterate") {
    FitConfig config;
    config.max_iterations = 1;
    const std::vector<FitPoint> data = test::make_threshold_scan(11);
    bool threw = false;
    try {
        fit_single_beam_noise(data, test::kScanOmega, config);
    } catch (const FitConvergenceError& err) {
        threw = true;
        CHECK_FALSE(err.best_iterate.converged);
        CHECK(err.best_iterate.p_th_hat > 0.0);
        CHECK(err.best_iterate.iterations == 1);
    }
    CHECK(threw);
}

TEST_CASE("mean squeezing statistics") {
    const double v12 = from_db(-1.2);
    const double v14 = from_db(-1.4);
    const auto [mean, se] = mean_squeezing({{400.0, v12}, {400.0, v14}});
    CHECK(mean == doctest::Approx(-1.3).epsilon(1e-9));
    CHECK(se == doctest::Approx(0.1).epsilon(1e-9));

    const auto [cm, cse] = mean_squeezing({{1.0, 0.5}, {2.0, 0.5}, {3.0, 0.5}});
    CHECK(cm == doctest::Approx(to_db(0.5)).epsilon(1e-12));
    CHECK(cse == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(mean_squeezing({{1.0, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(mean_squeezing({{1.0, 0.5}, {2.0, -0.1}}), std::invalid_argument);
}
