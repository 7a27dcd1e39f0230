#include "seqband/estimators.hpp"

#include <cmath>

#include "seqband/error.hpp"

namespace seqband {

namespace {

// Visits every event at or before t_star with (event index, gamma-bar at its left limit).
template <class Visit>
void for_each_event(const EventTable& events, const LoadSharingParams& params, double t_star, Visit&& visit)
{
    require(params.r() == events.r(), ErrorCode::InvalidParams,
            "gamma has length " + std::to_string(params.r()) + " but data has r = " + std::to_string(events.r()));
    for (std::size_t k = 0; k < events.size() && events[k].time <= t_star; ++k) {
        visit(k, events.gamma_bar(k, params));
    }
}

}  // namespace

BaselineEstimate nelson_aalen(const EventTable& events, const LoadSharingParams& params)
{
    BaselineEstimate est{.gamma_used = params, .M = events.M()};
    std::vector<double> knots;
    std::vector<double> lambda;
    std::vector<double> fexp;
    std::vector<double> fprod;
    const double M = static_cast<double>(events.M());
    double cum = 0.0;
    double survival = 1.0;
    bool absorbed = false;
    bool overshoot = false;
    for_each_event(events, params, kInfinity, [&](std::size_t k, double gbar) {
        if (absorbed) {
            return;
        }
        if (!(gbar > 0.0)) {
            absorbed = true;
            est.warnings.push_back("all systems absorbed; later events skipped");
            return;
        }
        const double y = 1.0 / (M * gbar);
        cum += y;
        survival *= 1.0 - y;
        if (survival <= 0.0) {
            survival = 0.0;
            overshoot = true;
        }
        const double t = events[k].time;
        if (!knots.empty() && knots.back() == t) {
            lambda.back() = cum;
            fexp.back() = -std::expm1(-cum);
            fprod.back() = 1.0 - survival;
        } else {
            knots.push_back(t);
            lambda.push_back(cum);
            fexp.push_back(-std::expm1(-cum));
            fprod.push_back(1.0 - survival);
        }
    });
    if (overshoot) {
        est.warnings.push_back("product-form increment reached 1; estimate set to 1");
    }
    est.lambda_hat = StepFunction(knots, std::move(lambda));
    est.f_hat = StepFunction(knots, std::move(fexp));
    est.f_hat_product = StepFunction(std::move(knots), std::move(fprod));
    return est;
}

BaselineEstimate nelson_aalen(const SampleSet& data, const LoadSharingParams& params)
{
    return nelson_aalen(EventTable(data), params);
}

BaselineEstimate nelson_aalen_plugin(const SampleSet& data, const GammaEstimate& fit)
{
    require(fit.converged, ErrorCode::NotConverged, "plug-in estimate requires a converged fit");
    return nelson_aalen(data, fit.gamma_hat);
}

double profile_loglik(const EventTable& events, const LoadSharingParams& params, double t_star)
{
    double sum = 0.0;
    for_each_event(events, params, t_star, [&](std::size_t k, double gbar) {
        sum += std::log(params[events[k].rank - 1]) - std::log(gbar);
    });
    return sum / static_cast<double>(events.M());
}

double profile_loglik(const SampleSet& data, const LoadSharingParams& params, double t_star)
{
    return profile_loglik(EventTable(data), params, t_star);
}

Eigen::VectorXd score(const EventTable& events, const LoadSharingParams& params, double t_star)
{
    const std::size_t r = params.r();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(r > 0 ? r - 1 : 0));
    for_each_event(events, params, t_star, [&](std::size_t k, double gbar) {
        const std::size_t rank = events[k].rank;
        for (std::size_t j = 2; j <= r; ++j) {
            const double hit = rank == j ? 1.0 : 0.0;
            u(static_cast<Eigen::Index>(j - 2)) += hit - params[j - 1] * events.delta_bar(k, j) / gbar;
        }
    });
    return u / static_cast<double>(events.M());
}

Eigen::VectorXd score(const SampleSet& data, const LoadSharingParams& params, double t_star)
{
    return score(EventTable(data), params, t_star);
}

Eigen::MatrixXd score_jacobian(const EventTable& events, const LoadSharingParams& params, double t_star)
{
    const std::size_t r = params.r();
    const auto n = static_cast<Eigen::Index>(r > 0 ? r - 1 : 0);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> delta(r + 1);
    for_each_event(events, params, t_star, [&](std::size_t k, double gbar) {
        for (std::size_t j = 2; j <= r; ++j) {
            delta[j] = events.delta_bar(k, j);
        }
        for (std::size_t j = 2; j <= r; ++j) {
            const auto a = static_cast<Eigen::Index>(j - 2);
            z(a, a) -= delta[j] / gbar;
            for (std::size_t l = 2; l <= r; ++l) {
                z(a, static_cast<Eigen::Index>(l - 2)) += params[j - 1] * delta[j] * delta[l] / (gbar * gbar);
            }
        }
    });
    return z / static_cast<double>(events.M());
}

Eigen::MatrixXd score_jacobian(const SampleSet& data, const LoadSharingParams& params, double t_star)
{
    return score_jacobian(EventTable(data), params, t_star);
}

std::vector<double> default_start(double gamma1, std::size_t r)
{
    std::vector<double> g(r);
    const double n = static_cast<double>(r);
    for (std::size_t j = 0; j < r; ++j) {
        const double jj = static_cast<double>(j);
        g[j] = gamma1 >= n ? gamma1 - jj : gamma1 * (n - jj) / n;
    }
    return g;
}

GammaEstimate fit_gamma(const EventTable& events, double gamma1, double t_star, const McConfig& config,
                        const FitOptions& options)
{
    require(std::isfinite(gamma1) && gamma1 > 0.0, ErrorCode::InvalidParams, "gamma1 must be finite and positive");
    require(!(t_star <= 0.0), ErrorCode::DomainError, "t_star must be positive");
    const std::size_t r = events.r();
    require(events.M() >= 2, ErrorCode::DegenerateSample,
            "M = 1: the score vanishes identically and gamma is not estimable");

    GammaEstimate est;
    est.t_star = t_star;
    if (r == 1) {
        est.gamma_hat = LoadSharingParams({gamma1}, true);
        est.converged = true;
        return est;
    }

    std::vector<std::size_t> hits(r + 1, 0);
    for (std::size_t k = 0; k < events.size() && events[k].time <= t_star; ++k) {
        ++hits[events[k].rank];
    }
    for (std::size_t j = 2; j <= r; ++j) {
        require(hits[j] > 0, ErrorCode::NonIdentifiable,
                "no failures in state j = " + std::to_string(j) + " before t_star; gamma_" + std::to_string(j) +
                    " is not identifiable");
    }

    const auto n = static_cast<Eigen::Index>(r - 1);
    std::vector<double> start = default_start(gamma1, r);
    if (options.initial) {
        require(options.initial->size() == r - 1, ErrorCode::InvalidParams, "initial value must have length r - 1");
        std::copy(options.initial->begin(), options.initial->end(), start.begin() + 1);
    }
    Eigen::VectorXd beta(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        require(start[static_cast<std::size_t>(j + 1)] > 0.0, ErrorCode::InvalidParams, "initial gamma must be > 0");
        beta(j) = std::log(start[static_cast<std::size_t>(j + 1)]);
    }
    auto params_of = [&](const Eigen::VectorXd& b) {
        std::vector<double> g(r);
        g[0] = gamma1;
        for (Eigen::Index j = 0; j < n; ++j) {
            g[static_cast<std::size_t>(j + 1)] = std::exp(b(j));
        }
        return LoadSharingParams(std::move(g), true);
    };

    LoadSharingParams current = params_of(beta);
    double value = profile_loglik(events, current, t_star);
    Eigen::VectorXd u = score(events, current, t_star);
    std::size_t iter = 0;
    while (u.lpNorm<Eigen::Infinity>() > config.tolerance && iter < options.max_iterations) {
        ++iter;
        const Eigen::MatrixXd z = score_jacobian(events, current, t_star);
        Eigen::MatrixXd hess = z;
        for (Eigen::Index k = 0; k < n; ++k) {
            hess.col(k) *= current[static_cast<std::size_t>(k + 1)];
        }
        hess = 0.5 * (hess + hess.transpose()).eval();
        Eigen::VectorXd step = -hess.ldlt().solve(u);
        if (!step.allFinite() || step.dot(u) <= 0.0) {
            step = u;  // gradient ascent fallback
        }
        double scale = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            const Eigen::VectorXd trial = beta + scale * step;
            if (trial.lpNorm<Eigen::Infinity>() <= 60.0) {
                const LoadSharingParams cand = params_of(trial);
                const double cand_value = profile_loglik(events, cand, t_star);
                if (cand_value >= value - 1e-15 * std::abs(value)) {
                    beta = trial;
                    current = cand;
                    value = cand_value;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        u = score(events, current, t_star);
        if (!accepted || beta.lpNorm<Eigen::Infinity>() > 50.0) {
            break;
        }
    }
    est.gamma_hat = current;
    est.iterations = iter;
    est.score_norm = u.lpNorm<Eigen::Infinity>();
    est.converged = est.score_norm <= config.tolerance;
    if (!est.converged) {
        fail(ErrorCode::NotConverged, "Newton iteration stopped after " + std::to_string(iter) +
                                          " iterations with |U| = " + std::to_string(est.score_norm) +
                                          (beta.lpNorm<Eigen::Infinity>() > 50.0 ? " (estimate diverging)" : ""));
    }
    return est;
}

GammaEstimate fit_gamma(const SampleSet& data, double gamma1, double t_star, const McConfig& config,
                        const FitOptions& options)
{
    return fit_gamma(EventTable(data), gamma1, t_star, config, options);
}

}  // namespace seqband
