#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqband/gos.hpp"
#include "seqband/types.hpp"

namespace seqband {

struct BaselineEstimate {
    StepFunction lambda_hat;     // cumulative hazard
    StepFunction f_hat;          // 1 - exp(-lambda_hat)
    StepFunction f_hat_product;  // 1 - prod(1 - Y), the exact-band flavor
    LoadSharingParams gamma_used;
    std::size_t M = 0;
    std::vector<std::string> warnings;
};

struct GammaEstimate {
    LoadSharingParams gamma_hat;
    bool converged = false;
    std::size_t iterations = 0;
    double score_norm = 0.0;  // sup-norm of the score at gamma_hat
    double t_star = kInfinity;
};

BaselineEstimate nelson_aalen(const SampleSet& data, const LoadSharingParams& params);
BaselineEstimate nelson_aalen(const EventTable& events, const LoadSharingParams& params);
BaselineEstimate nelson_aalen_plugin(const SampleSet& data, const GammaEstimate& fit);

// Profile likelihood and its derivatives. Events after t_star are ignored.
double profile_loglik(const SampleSet& data, const LoadSharingParams& params, double t_star = kInfinity);
double profile_loglik(const EventTable& events, const LoadSharingParams& params, double t_star = kInfinity);

/// U_j = gamma_j * d(loglik)/d(gamma_j), j = 2..r.
Eigen::VectorXd score(const SampleSet& data, const LoadSharingParams& params, double t_star = kInfinity);
Eigen::VectorXd score(const EventTable& events, const LoadSharingParams& params, double t_star = kInfinity);

/// dU_j / d(gamma_k), j, k = 2..r.
Eigen::MatrixXd score_jacobian(const SampleSet& data, const LoadSharingParams& params, double t_star = kInfinity);
Eigen::MatrixXd score_jacobian(const EventTable& events, const LoadSharingParams& params,
                               double t_star = kInfinity);

struct FitOptions {
    std::optional<std::vector<double>> initial;  // gamma_2..gamma_r; default is the no-load-sharing start
    std::size_t max_iterations = 100;
};

/// Newton iteration in beta = log(gamma_2..gamma_r) with step halving.
GammaEstimate fit_gamma(const SampleSet& data, double gamma1, double t_star, const McConfig& config,
                        const FitOptions& options = {});
GammaEstimate fit_gamma(const EventTable& events, double gamma1, double t_star, const McConfig& config,
                        const FitOptions& options = {});

/// Start used by fit_gamma: gamma_j = gamma1 - j + 1 when gamma1 >= r (unit alphas with n = gamma1),
/// otherwise gamma1 (r - j + 1) / r.
std::vector<double> default_start(double gamma1, std::size_t r);

}  // namespace seqband
