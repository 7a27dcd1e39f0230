#include "seqband/theory.hpp"

#include <algorithm>
#include <cmath>

#include "seqband/error.hpp"
#include "seqband/quadrature.hpp"

namespace seqband {

const char* to_string(PsiMeasure m)
{
    return m == PsiMeasure::hazard ? "hazard" : "lebesgue";
}

namespace theory {

namespace {

quadrature::Tolerance tol_for(double tolerance)
{
    const double t = std::clamp(tolerance * 1e-2, 1e-15, 1e-8);
    return {t, t};
}

double hazard_of(double u)
{
    return u >= 1.0 ? kInfinity : -std::log1p(-u);
}

void check_unit(double u, bool allow_one, const char* what)
{
    const bool ok = u >= 0.0 && (allow_one ? u <= 1.0 : u < 1.0);
    require(ok, ErrorCode::DomainError,
            std::string(what) + ": u = " + std::to_string(u) + (allow_one ? " outside [0,1]" : " outside [0,1)"));
}

int panels_for(const LoadSharingParams& params, double w)
{
    return static_cast<int>(std::clamp(std::ceil(w * params.min()), 1.0, 256.0));
}

}  // namespace

bool near_equal(const LoadSharingParams& params, std::size_t count)
{
    return params.min_gap(count) < kMergeThreshold * params.max();
}

std::vector<double> coeffs_c(const LoadSharingParams& params)
{
    const std::size_t r = params.r();
    require(!near_equal(params, r), ErrorCode::NearDegenerate,
            "coeffs_c requires pairwise-distinct load-sharing parameters");
    std::vector<double> c(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        double prod_gamma = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            prod_gamma *= params[j];
        }
        double prod_diff = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            prod_diff *= params[j] - params[i];
        }
        for (std::size_t k = i; k < r; ++k) {
            prod_gamma *= params[k];
            if (k != i) {
                prod_diff *= params[k] - params[i];
            }
            c[i] += prod_gamma / prod_diff;
        }
    }
    return c;
}

namespace detail {

std::vector<double> state_probs_closed_form(const LoadSharingParams& params, double w)
{
    const std::size_t r = params.r();
    std::vector<double> p(r, 0.0);
    if (std::isinf(w)) {
        return p;
    }
    std::vector<double> decay(r);
    for (std::size_t i = 0; i < r; ++i) {
        decay[i] = std::exp(-params[i] * w);
    }
    double prefix = 1.0;  // prod_{k<j} gamma_k
    for (std::size_t j = 0; j < r; ++j) {
        if (near_equal(params, j + 1)) {
            for (std::size_t rest = j; rest < r; ++rest) {
                p[rest] = std::nan("");
            }
            return p;
        }
        double sum = 0.0;
        for (std::size_t i = 0; i <= j; ++i) {
            double denom = 1.0;
            for (std::size_t k = 0; k <= j; ++k) {
                if (k != i) {
                    denom *= params[k] - params[i];
                }
            }
            sum += decay[i] / denom;
        }
        p[j] = std::max(prefix * sum, 0.0);
        prefix *= params[j];
    }
    return p;
}

std::vector<double> state_probs_expm(const LoadSharingParams& params, double w)
{
    const auto r = static_cast<Eigen::Index>(params.r());
    std::vector<double> p(params.r(), 0.0);
    if (std::isinf(w)) {
        return p;
    }
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(r, r);
    for (Eigen::Index j = 0; j < r; ++j) {
        gen(j, j) = -params[static_cast<std::size_t>(j)];
        if (j + 1 < r) {
            gen(j + 1, j) = params[static_cast<std::size_t>(j)];
        }
    }
    const double norm = 2.0 * params.max() * w;
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    }
    const Eigen::MatrixXd step = gen * (w / std::ldexp(1.0, squarings));
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(r, r);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(r, r);
    for (int k = 1; k <= 24; ++k) {
        term = term * step / static_cast<double>(k);
        result += term;
    }
    // The generator is Metzler, so every power of the propagator is entrywise nonnegative.
    result = result.cwiseMax(0.0);
    for (int s = 0; s < squarings; ++s) {
        result = (result * result).eval();
    }
    for (Eigen::Index j = 0; j < r; ++j) {
        p[static_cast<std::size_t>(j)] = result(j, 0);
    }
    return p;
}

}  // namespace detail

std::vector<double> state_probs_hazard(const LoadSharingParams& params, double w)
{
    require(w >= 0.0, ErrorCode::DomainError, "hazard argument must be nonnegative");
    auto p = detail::state_probs_closed_form(params, w);
    if (std::any_of(p.begin(), p.end(), [](double x) { return std::isnan(x); })) {
        const auto merged = detail::state_probs_expm(params, w);
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (std::isnan(p[j])) {
                p[j] = merged[j];
            }
        }
    }
    return p;
}

double mean_load_hazard(const LoadSharingParams& params, double w)
{
    require(w >= 0.0, ErrorCode::DomainError, "hazard argument must be nonnegative");
    if (std::isinf(w)) {
        return 0.0;
    }
    if (!near_equal(params, params.r())) {
        const auto c = coeffs_c(params);
        double sum = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            sum += c[i] * std::exp(-params[i] * w);
        }
        return std::clamp(sum, 0.0, params.max());
    }
    const auto p = detail::state_probs_expm(params, w);
    double sum = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        sum += params[j] * p[j];
    }
    return sum;
}

double mean_load(const LoadSharingParams& params, double u)
{
    check_unit(u, true, "mean_load");
    if (u == 0.0) {
        return params[0];
    }
    return mean_load_hazard(params, hazard_of(u));
}

double state_prob(const LoadSharingParams& params, std::size_t j, double u)
{
    require(j >= 1 && j <= params.r(), ErrorCode::DomainError, "state index j must lie in 1..r");
    check_unit(u, true, "state_prob");
    return state_probs_hazard(params, hazard_of(u))[j - 1];
}

namespace {

// Eigen-free integrand evaluation: v' = 1 / E gamma(w) on the hazard scale.
struct LoadModel {
    const LoadSharingParams& params;
    bool distinct;
    std::vector<double> c;

    explicit LoadModel(const LoadSharingParams& p)
        : params(p), distinct(!near_equal(p, p.r())), c(distinct ? coeffs_c(p) : std::vector<double>{})
    {}

    double mean_load(double w) const
    {
        if (distinct) {
            double sum = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) {
                sum += c[i] * std::exp(-params[i] * w);
            }
            return sum;
        }
        return mean_load_hazard(params, w);
    }
};

double integrate_v(const LoadModel& model, double a, double b, double tolerance)
{
    return quadrature::integrate([&](double w) { return 1.0 / model.mean_load(w); }, a, b, tol_for(tolerance),
                                 panels_for(model.params, b - a));
}

double psi_integrand(const LoadSharingParams& params, double w, std::size_t j, PsiMeasure measure)
{
    const auto p = state_probs_hazard(params, w);
    double load = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        load += params[k] * p[k];
    }
    const double ratio = p[j] / load;
    return measure == PsiMeasure::hazard ? ratio : ratio * std::exp(-w);
}

double integrate_psi(const LoadSharingParams& params, std::size_t j, PsiMeasure measure, double a, double b,
                     double tolerance)
{
    return quadrature::integrate([&](double w) { return psi_integrand(params, w, j, measure); }, a, b,
                                 tol_for(tolerance), panels_for(params, b - a));
}

}  // namespace

double variance_v_hazard(const LoadSharingParams& params, double w, double tolerance)
{
    require(w >= 0.0 && std::isfinite(w), ErrorCode::DomainError, "v_gamma diverges at u = 1");
    const LoadModel model(params);
    return integrate_v(model, 0.0, w, tolerance);
}

double variance_v(const LoadSharingParams& params, double u, double tolerance)
{
    check_unit(u, false, "variance_v");
    return variance_v_hazard(params, hazard_of(u), tolerance);
}

std::vector<double> psi_hazard(const LoadSharingParams& params, double w, PsiMeasure measure, double tolerance)
{
    require(params.r() >= 2, ErrorCode::EmptyVector, "Psi_G is empty for r = 1");
    require(w >= 0.0 && std::isfinite(w), ErrorCode::DomainError, "Psi_G requires u < 1");
    std::vector<double> out(params.r() - 1);
    for (std::size_t j = 1; j < params.r(); ++j) {
        out[j - 1] = integrate_psi(params, j, measure, 0.0, w, tolerance);
    }
    return out;
}

std::vector<double> psi_g(const LoadSharingParams& params, double u, PsiMeasure measure, double tolerance)
{
    require(params.r() >= 2, ErrorCode::EmptyVector, "Psi_G is empty for r = 1");
    check_unit(u, false, "psi_g");
    return psi_hazard(params, hazard_of(u), measure, tolerance);
}

Eigen::MatrixXd sigma_g(const LoadSharingParams& params, double tolerance)
{
    const std::size_t r = params.r();
    require(r >= 2, ErrorCode::EmptyVector, "Sigma_G is empty for r = 1");
    const auto n = static_cast<Eigen::Index>(r - 1);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);

    // Integrand on the hazard scale: diag(gamma_j P_j) - (gamma P)(gamma P)^T / E gamma, j = 2..r.
    auto entry = [&](double w, std::size_t a, std::size_t b) {
        const auto p = state_probs_hazard(params, w);
        double load = 0.0;
        for (std::size_t k = 0; k < r; ++k) {
            load += params[k] * p[k];
        }
        if (!(load > 0.0)) {
            return 0.0;
        }
        const double ga = params[a] * p[a];
        if (a == b) {
            // gamma_a P_a (E gamma - gamma_a P_a) / E gamma, written without cancellation
            double rest = 0.0;
            for (std::size_t k = 0; k < r; ++k) {
                if (k != a) {
                    rest += params[k] * p[k];
                }
            }
            return ga * rest / load;
        }
        return -ga * params[b] * p[b] / load;
    };

    const auto rel = tol_for(tolerance);
    const double decay = params.min();
    double lo = 0.0;
    double width = 1.0 / params.max();
    for (int chunk = 0; chunk < 200; ++chunk) {
        const double hi = lo + width;
        for (std::size_t a = 1; a < r; ++a) {
            for (std::size_t b = a; b < r; ++b) {
                const double part =
                    quadrature::integrate([&](double w) { return entry(w, a, b); }, lo, hi, rel);
                sigma(static_cast<Eigen::Index>(a - 1), static_cast<Eigen::Index>(b - 1)) += part;
            }
        }
        lo = hi;
        width = std::min(width * 1.5, 2.0 / decay);
        // Every entry is bounded by gamma_max * P(N < r), which decays at least like exp(-gamma_min w);
        // stop once the remaining mass is below tolerance.
        const auto p = state_probs_hazard(params, lo);
        double alive = 0.0;
        for (double x : p) {
            alive += x;
        }
        if (params.max() * alive / decay < tolerance * 1e-2) {
            break;
        }
    }
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < a; ++b) {
            sigma(a, b) = sigma(b, a);
        }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    require(eig.eigenvalues().minCoeff() > 0.0, ErrorCode::NumericalError,
            "Sigma_G is not positive definite; quadrature misconfigured");
    return sigma;
}

}  // namespace theory

PopulationQuantities::PopulationQuantities(const LoadSharingParams& params, Extent extent, PsiMeasure measure,
                                           double tolerance, bool with_sigma)
    : params_(params), measure_(measure), tolerance_(tolerance)
{
    const std::size_t r = params_.r();
    if (!theory::near_equal(params_, r)) {
        coeffs_ = theory::coeffs_c(params_);
    }
    if (r >= 2 && with_sigma) {
        sigma_ = theory::sigma_g(params_, tolerance_);
    }

    const double h = 0.02 / params_.max();
    const theory::LoadModel model(params_);
    const auto rel = theory::tol_for(tolerance_);
    nodes_.push_back(0.0);
    v_.push_back(0.0);
    dv_.push_back(v_derivative(0.0));
    psi_.emplace_back(r - 1, 0.0);
    dpsi_.push_back(psi_derivative(0.0));
    constexpr std::size_t max_nodes = 2'000'000;
    while (nodes_.size() < 3 || nodes_.back() < extent.w_max || v_.back() < extent.v_max) {
        require(nodes_.size() < max_nodes, ErrorCode::NumericalError, "v_gamma table exceeded its size limit");
        const double lo = nodes_.back();
        const double hi = static_cast<double>(nodes_.size()) * h;
        const double dv = quadrature::integrate([&](double w) { return 1.0 / model.mean_load(w); }, lo, hi, rel);
        std::vector<double> next = psi_.back();
        for (std::size_t j = 1; j < r; ++j) {
            next[j - 1] += quadrature::integrate(
                [&](double w) { return theory::psi_integrand(params_, w, j, measure_); }, lo, hi, rel);
        }
        nodes_.push_back(hi);
        v_.push_back(v_.back() + dv);
        dv_.push_back(v_derivative(hi));
        psi_.push_back(std::move(next));
        dpsi_.push_back(psi_derivative(hi));
        require(std::isfinite(v_.back()), ErrorCode::NumericalError, "v_gamma overflowed while tabulating");
    }
}

double PopulationQuantities::v_derivative(double w) const
{
    return 1.0 / theory::mean_load_hazard(params_, w);
}

std::vector<double> PopulationQuantities::psi_derivative(double w) const
{
    std::vector<double> out(params_.r() - 1);
    for (std::size_t j = 1; j < params_.r(); ++j) {
        out[j - 1] = theory::psi_integrand(params_, w, j, measure_);
    }
    return out;
}

std::size_t PopulationQuantities::cell(double w) const
{
    const double h = nodes_[1];
    const auto k = static_cast<std::size_t>(w / h);
    return std::min(k, nodes_.size() - 2);
}

namespace {

double hermite(double y0, double y1, double d0, double d1, double h, double t)
{
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

}  // namespace

double PopulationQuantities::v_hazard(double w) const
{
    require(w >= 0.0 && std::isfinite(w), ErrorCode::DomainError, "v_gamma requires a finite hazard");
    if (w > nodes_.back()) {
        const theory::LoadModel model(params_);
        return v_.back() + theory::integrate_v(model, nodes_.back(), w, tolerance_);
    }
    const std::size_t k = cell(w);
    const double h = nodes_[k + 1] - nodes_[k];
    const double t = (w - nodes_[k]) / h;
    return hermite(v_[k], v_[k + 1], dv_[k], dv_[k + 1], h, t);
}

double PopulationQuantities::v(double u) const
{
    require(u >= 0.0 && u < 1.0, ErrorCode::DomainError, "v_gamma requires u in [0,1)");
    return v_hazard(-std::log1p(-u));
}

double PopulationQuantities::v_inverse_hazard(double z) const
{
    require(z >= 0.0 && z <= v_.back(), ErrorCode::DomainError, "v_gamma inverse outside tabulated range");
    const auto it = std::upper_bound(v_.begin(), v_.end(), z);
    std::size_t k = it == v_.begin() ? 0 : static_cast<std::size_t>(it - v_.begin()) - 1;
    k = std::min(k, nodes_.size() - 2);
    const double h = nodes_[k + 1] - nodes_[k];
    double lo = 0.0;
    double hi = 1.0;
    for (int it2 = 0; it2 < 64; ++it2) {
        const double mid = 0.5 * (lo + hi);
        (hermite(v_[k], v_[k + 1], dv_[k], dv_[k + 1], h, mid) < z ? lo : hi) = mid;
    }
    return nodes_[k] + 0.5 * (lo + hi) * h;
}

std::vector<double> PopulationQuantities::psi_hazard(double w) const
{
    require(params_.r() >= 2, ErrorCode::EmptyVector, "Psi_G is empty for r = 1");
    require(w >= 0.0 && std::isfinite(w), ErrorCode::DomainError, "Psi_G requires a finite hazard");
    std::vector<double> out(params_.r() - 1);
    if (w > nodes_.back()) {
        for (std::size_t j = 1; j < params_.r(); ++j) {
            out[j - 1] = psi_.back()[j - 1] +
                         theory::integrate_psi(params_, j, measure_, nodes_.back(), w, tolerance_);
        }
        return out;
    }
    const std::size_t k = cell(w);
    const double h = nodes_[k + 1] - nodes_[k];
    const double t = (w - nodes_[k]) / h;
    for (std::size_t j = 0; j + 1 < params_.r(); ++j) {
        out[j] = hermite(psi_[k][j], psi_[k + 1][j], dpsi_[k][j], dpsi_[k + 1][j], h, t);
    }
    return out;
}

}  // namespace seqband
