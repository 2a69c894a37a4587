#include "opo/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "opo/variance.hpp"

namespace opo {
namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

struct Problem {
    const std::vector<FitPoint>* data;
    double omega;
    double a;             // 1 + omega^2
    double sigma_floor;   // 1 + margin
    double penalty_sqrt;  // sqrt(penalty_scale)
};

// Residual vector: one weighted data term per point followed by one hinge
// penalty term per point, active only where sigma drops below the floor.
void residuals(const Problem& p, double p_th, double scale, Eigen::VectorXd& r,
               Eigen::MatrixXd* jac) {
    const auto& data = *p.data;
    const Eigen::Index n = static_cast<Eigen::Index>(data.size());
    r.resize(2 * n);
    if (jac != nullptr) jac->setZero(2 * n, 2);

    for (Eigen::Index k = 0; k < n; ++k) {
        const double sqw = std::sqrt(data[k].weight);
        const double sigma = std::sqrt(data[k].power / p_th);
        const double dsigma_dpth = -sigma / (2.0 * p_th);
        const double e = p.omega * p.omega + (sigma - 1.0) * (sigma - 1.0);
        const double h = sigma * (sigma - 2.0) / (p.a * e);
        const double model = 1.0 - 0.5 * scale * h;

        r[k] = sqw * (model - data[k].variance);
        if (jac != nullptr) {
            const double dh_dsigma = 2.0 * (sigma - 1.0) / (e * e);
            (*jac)(k, 0) = sqw * (-0.5 * scale * dh_dsigma * dsigma_dpth);
            (*jac)(k, 1) = sqw * (-0.5 * h);
        }

        const double gap = p.sigma_floor - sigma;
        if (gap > 0.0) {
            r[n + k] = p.penalty_sqrt * gap;
            if (jac != nullptr) (*jac)(n + k, 0) = p.penalty_sqrt * (-dsigma_dpth);
        } else {
            r[n + k] = 0.0;
        }
    }
}

double objective(const Problem& p, double p_th, double scale) {
    if (p_th <= 0.0 || scale <= 0.0 || scale >= 2.0 * p.a) {
        return std::numeric_limits<double>::infinity();
    }
    Eigen::VectorXd r;
    residuals(p, p_th, scale, r, nullptr);
    return r.squaredNorm();
}

// Standard Nelder-Mead on the two parameters; used as a restart when the
// damped least-squares loop stagnates.
Eigen::Vector2d simplex_restart(const Problem& p, const Eigen::Vector2d& start, int iterations) {
    std::array<Eigen::Vector2d, 3> v{start, start, start};
    v[1][0] *= 1.05;
    v[2][1] *= 1.05;
    std::array<double, 3> f{};
    for (int i = 0; i < 3; ++i) f[i] = objective(p, v[i][0], v[i][1]);

    auto order = [&] {
        if (f[0] > f[1]) { std::swap(f[0], f[1]); std::swap(v[0], v[1]); }
        if (f[1] > f[2]) { std::swap(f[1], f[2]); std::swap(v[1], v[2]); }
        if (f[0] > f[1]) { std::swap(f[0], f[1]); std::swap(v[0], v[1]); }
    };
    order();

    for (int it = 0; it < iterations; ++it) {
        const Eigen::Vector2d centroid = 0.5 * (v[0] + v[1]);
        const Eigen::Vector2d refl = centroid + (centroid - v[2]);
        const double f_refl = objective(p, refl[0], refl[1]);
        if (f_refl < f[0]) {
            const Eigen::Vector2d exp_pt = centroid + 2.0 * (centroid - v[2]);
            const double f_exp = objective(p, exp_pt[0], exp_pt[1]);
            if (f_exp < f_refl) { v[2] = exp_pt; f[2] = f_exp; }
            else { v[2] = refl; f[2] = f_refl; }
        } else if (f_refl < f[1]) {
            v[2] = refl;
            f[2] = f_refl;
        } else {
            const Eigen::Vector2d contr = centroid + 0.5 * (v[2] - centroid);
            const double f_contr = objective(p, contr[0], contr[1]);
            if (f_contr < f[2]) {
                v[2] = contr;
                f[2] = f_contr;
            } else {
                for (int i = 1; i < 3; ++i) {
                    v[i] = v[0] + 0.5 * (v[i] - v[0]);
                    f[i] = objective(p, v[i][0], v[i][1]);
                }
            }
        }
        order();
        if (f[2] - f[0] <= 1e-14 * std::max(1.0, f[0])) break;
    }
    return v[0];
}

Eigen::Matrix2d numerical_hessian(const Problem& p, const Eigen::Vector2d& theta) {
    Eigen::Matrix2d h;
    Eigen::Vector2d step;
    for (int i = 0; i < 2; ++i) step[i] = std::max(std::abs(theta[i]), 1e-30) * 1e-4;

    auto f = [&](double d0, double d1) {
        return objective(p, theta[0] + d0, theta[1] + d1);
    };
    const double f0 = f(0.0, 0.0);
    h(0, 0) = (f(step[0], 0.0) - 2.0 * f0 + f(-step[0], 0.0)) / (step[0] * step[0]);
    h(1, 1) = (f(0.0, step[1]) - 2.0 * f0 + f(0.0, -step[1])) / (step[1] * step[1]);
    h(0, 1) = (f(step[0], step[1]) - f(step[0], -step[1]) - f(-step[0], step[1]) +
               f(-step[0], -step[1])) /
              (4.0 * step[0] * step[1]);
    h(1, 0) = h(0, 1);
    return h;
}

}  // namespace

double single_beam_model(double power, double p_th, double scale, double omega) {
    require(power > 0.0 && p_th > 0.0, "fit: power and threshold must be positive");
    const double sigma = std::sqrt(power / p_th);
    const double e = omega * omega + (sigma - 1.0) * (sigma - 1.0);
    const double a = 1.0 + omega * omega;
    return 1.0 - 0.5 * scale * sigma * (sigma - 2.0) / (a * e);
}

FitResult fit_single_beam_noise(const std::vector<FitPoint>& data, double omega,
                                const FitConfig& config) {
    require(omega >= 0.0, "fit: omega must be nonnegative");
    require(data.size() >= 4, "fit: need at least four data points");
    double p_min = std::numeric_limits<double>::infinity();
    double p_max = 0.0;
    double v_min = std::numeric_limits<double>::infinity();
    for (const auto& pt : data) {
        require(pt.power > 0.0, "fit: powers must be positive");
        require(pt.variance > 0.0, "fit: variances must be positive");
        require(pt.weight > 0.0, "fit: weights must be positive");
        p_min = std::min(p_min, pt.power);
        p_max = std::max(p_max, pt.power);
        v_min = std::min(v_min, pt.variance);
    }
    require(p_max >= 4.0 * p_min, "fit: powers must span at least a factor of four");

    Problem prob;
    prob.data = &data;
    prob.omega = omega;
    prob.a = 1.0 + omega * omega;
    prob.sigma_floor = 1.0 + config.sigma_margin;
    prob.penalty_sqrt = std::sqrt(config.penalty_scale);

    Eigen::Vector2d theta;
    theta[0] = 0.9 * p_min;
    theta[1] = std::clamp(2.0 * prob.a * (1.0 - v_min), 0.01, 1.999 * prob.a);

    double fval = objective(prob, theta[0], theta[1]);
    double lambda = 1e-3;
    bool restarted = false;
    bool converged = false;
    int iter = 0;

    // per-column cosine between the residual and the Jacobian columns; zero
    // at a stationary point of the sum of squares
    const auto gradient_cosine = [](const Eigen::Matrix2d& jtj, const Eigen::Vector2d& g,
                                    double rnorm) {
        double worst = 0.0;
        for (int j = 0; j < 2; ++j) {
            const double denom = std::sqrt(std::max(jtj(j, j), 0.0)) * rnorm;
            if (denom > 0.0) worst = std::max(worst, std::abs(g[j]) / denom);
        }
        return worst;
    };

    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    for (; iter < config.max_iterations && !converged; ++iter) {
        residuals(prob, theta[0], theta[1], r, &jac);
        const Eigen::Matrix2d jtj = jac.transpose() * jac;
        const Eigen::Vector2d g = jac.transpose() * r;
        if (fval <= 1e-24 || gradient_cosine(jtj, g, r.norm()) <= 1e-9) {
            converged = true;
            break;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            Eigen::Matrix2d damped = jtj;
            for (int i = 0; i < 2; ++i) {
                damped(i, i) += lambda * std::max(jtj(i, i), 1e-30);
            }
            const Eigen::Vector2d delta = damped.ldlt().solve(-g);
            const Eigen::Vector2d cand = theta + delta;
            const double f_cand = objective(prob, cand[0], cand[1]);
            if (f_cand < fval) {
                const double drop = fval - f_cand;
                const double rel_step =
                    std::max(std::abs(delta[0]) / std::max(std::abs(theta[0]), 1e-300),
                             std::abs(delta[1]) / std::max(std::abs(theta[1]), 1e-300));
                theta = cand;
                fval = f_cand;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                // a vanishing step pins the parameters; a vanishing drop only
                // counts once the damping has relaxed, so an inflated-lambda
                // crawl cannot masquerade as convergence
                if (rel_step <= 1e-12) converged = true;
                if (drop <= config.tolerance * std::max(fval, 1e-300) && lambda <= 1e-3)
                    converged = true;
                break;
            }
            lambda = std::min(lambda * 4.0, 1e14);
        }

        if (!accepted) {
            residuals(prob, theta[0], theta[1], r, &jac);
            if (gradient_cosine(jac.transpose() * jac, jac.transpose() * r, r.norm()) <=
                1e-5) {
                converged = true;
                break;
            }
            if (restarted) break;
            restarted = true;
            theta = simplex_restart(prob, theta, 200);
            fval = objective(prob, theta[0], theta[1]);
            lambda = 1e-3;
        }
    }

    FitResult result{};
    result.p_th_hat = theta[0];
    result.scale_hat = theta[1];
    result.asymptote_hat = 1.0 - theta[1] / (2.0 * prob.a);
    result.converged = converged;
    result.iterations = iter;

    residuals(prob, theta[0], theta[1], r, nullptr);
    const Eigen::Index n = static_cast<Eigen::Index>(data.size());
    double weight_sum = 0.0;
    for (const auto& pt : data) weight_sum += pt.weight;
    const double rss = r.head(n).squaredNorm();
    result.residual_rms = std::sqrt(rss / weight_sum);

    const double dof = static_cast<double>(data.size()) - 2.0;
    const double s2 = rss / std::max(dof, 1.0);
    Eigen::Matrix2d hess = numerical_hessian(prob, theta);
    bool have_cov = false;
    if (hess.determinant() > 0.0 && hess(0, 0) > 0.0) {
        const Eigen::Matrix2d cov = 2.0 * s2 * hess.inverse();
        if (cov(0, 0) >= 0.0 && cov(1, 1) >= 0.0) {
            result.p_th_uncertainty = std::sqrt(cov(0, 0));
            result.scale_uncertainty = std::sqrt(cov(1, 1));
            have_cov = true;
        }
    }
    if (!have_cov) {
        residuals(prob, theta[0], theta[1], r, &jac);
        const Eigen::Matrix2d jtj = jac.transpose() * jac;
        const Eigen::Matrix2d cov = s2 * jtj.inverse();
        result.p_th_uncertainty = std::sqrt(std::max(cov(0, 0), 0.0));
        result.scale_uncertainty = std::sqrt(std::max(cov(1, 1), 0.0));
    }
    result.asymptote_uncertainty = result.scale_uncertainty / (2.0 * prob.a);

    if (!converged) {
        throw FitConvergenceError("fit: no convergence within the iteration budget", result);
    }
    return result;
}

std::pair<double, double> mean_squeezing(const std::vector<std::pair<double, double>>& runs) {
    require(runs.size() >= 2, "mean_squeezing: need at least two runs");
    std::vector<double> db;
    db.reserve(runs.size());
    for (const auto& [power, variance] : runs) {
        require(variance > 0.0, "mean_squeezing: variances must be positive");
        db.push_back(to_db(variance));
    }
    const double n = static_cast<double>(db.size());
    double mean = 0.0;
    for (double d : db) mean += d;
    mean /= n;
    double ss = 0.0;
    for (double d : db) ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    return {mean, sd / std::sqrt(n)};
}

}  // namespace opo
