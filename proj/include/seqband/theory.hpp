#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "seqband/types.hpp"

// Population quantities of the GOS model under a standard uniform baseline.
// Internally everything is evaluated on the cumulative-hazard scale w = -log(1 - u),
// where the counting process is a pure-birth chain with rates gamma_1, ..., gamma_r.
namespace seqband {

/// Measure used in the Psi_G integral: dLambda_G(s) = ds / (1 - s) (shipped default,
/// confirmed by the joint-covariance simulation in the acceptance suite) or plain ds.
enum class PsiMeasure { hazard, lebesgue };

const char* to_string(PsiMeasure m);

namespace theory {

/// Relative gap below which parameters are treated as equal.
inline constexpr double kMergeThreshold = 1e-6;

/// True when some pair among the first `count` parameters is closer than kMergeThreshold * max gamma.
bool near_equal(const LoadSharingParams& params, std::size_t count);

/// c_i(gamma), i = 1..r, from the closed form for E gamma(u). Requires pairwise-distinct parameters.
std::vector<double> coeffs_c(const LoadSharingParams& params);

/// E gamma(u): expected active load at u in [0, 1].
double mean_load(const LoadSharingParams& params, double u);

/// P(N(u) = j - 1) for 1-based j.
double state_prob(const LoadSharingParams& params, std::size_t j, double u);

/// v_gamma(u) = int_0^u ds / ((1 - s) E gamma(s)), u in [0, 1).
double variance_v(const LoadSharingParams& params, double u, double tolerance = 1e-10);

/// Psi_G(u; gamma), components j = 2..r.
std::vector<double> psi_g(const LoadSharingParams& params, double u, PsiMeasure measure = PsiMeasure::hazard,
                          double tolerance = 1e-10);

/// Sigma_G(gamma): (r-1) x (r-1) information matrix of the score at t = infinity.
Eigen::MatrixXd sigma_g(const LoadSharingParams& params, double tolerance = 1e-10);

// Hazard-scale forms, w in [0, inf].
std::vector<double> state_probs_hazard(const LoadSharingParams& params, double w);
double mean_load_hazard(const LoadSharingParams& params, double w);
double variance_v_hazard(const LoadSharingParams& params, double w, double tolerance = 1e-10);
std::vector<double> psi_hazard(const LoadSharingParams& params, double w, PsiMeasure measure,
                               double tolerance = 1e-10);

namespace detail {

/// Closed-form state probabilities; entries whose leading parameters nearly coincide are NaN.
std::vector<double> state_probs_closed_form(const LoadSharingParams& params, double w);
/// Transient distribution of the pure-birth chain via exp(T w) e_1 (scaling and squaring).
/// Valid for any parameters, including coinciding ones.
std::vector<double> state_probs_expm(const LoadSharingParams& params, double w);

}  // namespace detail
}  // namespace theory

/// Tabulated v_gamma and Psi_G on the hazard scale with cubic Hermite interpolation
/// (exact derivatives at the nodes), plus Sigma_G and, for distinct parameters, c_i.
/// Built once and read-only afterwards. Queries past the table fall back to quadrature.
class PopulationQuantities {
public:
    struct Extent {
        double w_max = 0.0;  // tabulate at least up to this hazard
        double v_max = 0.0;  // ... and until v reaches this value
    };

    PopulationQuantities(const LoadSharingParams& params, Extent extent, PsiMeasure measure = PsiMeasure::hazard,
                         double tolerance = 1e-10, bool with_sigma = true);

    const LoadSharingParams& params() const noexcept { return params_; }
    PsiMeasure measure() const noexcept { return measure_; }
    const std::vector<double>& coeffs_c() const noexcept { return coeffs_; }
    const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
    double w_max() const noexcept { return nodes_.back(); }
    double v_max() const noexcept { return v_.back(); }

    double v_hazard(double w) const;
    double v(double u) const;
    /// Hazard w with v(w) = z; z must not exceed v_max().
    double v_inverse_hazard(double z) const;
    /// Psi_G at hazard w, length r - 1.
    std::vector<double> psi_hazard(double w) const;

private:
    std::size_t cell(double w) const;
    double v_derivative(double w) const;
    std::vector<double> psi_derivative(double w) const;

    LoadSharingParams params_;
    PsiMeasure measure_;
    double tolerance_;
    std::vector<double> coeffs_;
    Eigen::MatrixXd sigma_;
    std::vector<double> nodes_;
    std::vector<double> v_;
    std::vector<double> dv_;
    std::vector<std::vector<double>> psi_;   // per node, length r - 1
    std::vector<std::vector<double>> dpsi_;
};

}  // namespace seqband
