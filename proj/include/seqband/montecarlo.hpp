#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqband/bands.hpp"
#include "seqband/baseline.hpp"
#include "seqband/parallel.hpp"
#include "seqband/quantile.hpp"
#include "seqband/theory.hpp"
#include "seqband/types.hpp"
#include "seqband/weight.hpp"

namespace seqband {

// ---- K_gamma ---------------------------------------------------------------

/// Exact sup over u in (0,1) of h(G(u)) |G(u) - u| for a step function G on (0,1).
double kgamma_statistic(const StepFunction& g_hat, const KsWeight& h);

/// K_gamma draw for replication `rep`: uniform-baseline data of shape (M, r).
double kgamma_draw(const LoadSharingParams& params, std::size_t M, const KsWeight& h, EstimatorFlavor flavor,
                   std::uint64_t seed, std::size_t rep);

std::vector<double> kgamma_draws(const LoadSharingParams& params, std::size_t M, const KsWeight& h,
                                 EstimatorFlavor flavor, const McConfig& config,
                                 Execution exec = Execution::parallel);

QuantileEstimate quantile_kgamma(const LoadSharingParams& params, std::size_t M, const KsWeight& h, double q,
                                 const McConfig& config, EstimatorFlavor flavor = EstimatorFlavor::product,
                                 Execution exec = Execution::parallel);

// ---- Brownian suprema ------------------------------------------------------

/// Increasing time grid for a Brownian path started at W(0) = 0. Base points carry the
/// path skeleton; the others are filled in by Brownian bridges, so adding points never
/// changes the skeleton drawn for a given seed.
class SupGrid {
public:
    SupGrid() = default;
    SupGrid(std::vector<double> times, std::vector<char> is_base);

    /// `n` base points z_min * rho^i, i < n, with z_{n-1} = z_max.
    static SupGrid geometric(double z_min, double z_max, std::size_t n);
    /// Default grid for a weight with g(0) = g_at_zero: geometric from grid_z_min(g_at_zero) to z_max
    /// with config.grid_size base points and config.grid_refine inserted points per interval.
    static SupGrid standard(double g_at_zero, double z_max, const McConfig& config);

    /// Base grid continued with the same ratio until it reaches factor * z_max.
    SupGrid extended(double factor) const;
    /// Inserts `m` geometric points inside every interval.
    SupGrid refined(std::size_t m) const;
    /// Adds non-base points (must lie inside (0, last base point]).
    SupGrid with_points(std::span<const double> extra) const;

    std::span<const double> times() const noexcept { return times_; }
    std::span<const char> is_base() const noexcept { return is_base_; }
    std::size_t size() const noexcept { return times_.size(); }
    std::size_t base_count() const noexcept { return base_count_; }
    double ratio() const noexcept { return ratio_; }
    double z_max() const noexcept { return times_.back(); }

private:
    std::vector<double> times_;
    std::vector<char> is_base_;
    std::size_t base_count_ = 0;
    double z_min_ = 0.0;
    double log_ratio_ = 0.0;
    double ratio_ = 0.0;
};

/// Everything the sup kernel needs about one statistic sup |W(t) + drift(t)| / g(t).
struct SupProblem {
    const SupGrid* grid = nullptr;
    std::vector<double> g;  // g at every grid time (the left end of each interval is used)
    double g0 = 1.0;        // g on the first interval (0, t_0]
    // Optional drift drift_k = loadings_k . W-bar with W-bar = chol_inv_t * xi.
    Eigen::MatrixXd loadings;       // grid.size() x (r - 1), empty for none
    Eigen::MatrixXd chol_inv_t;     // (r - 1) x (r - 1): L^{-T} with Sigma = L L^T
};

struct SupDraw {
    double value = 0.0;
    double argmax = 0.0;  // grid time at the left end of the maximizing interval
};

/// Fused kernel: one replication without materializing the path.
SupDraw sup_draw(const SupProblem& problem, std::uint64_t seed, std::size_t rep);

/// Reference kernel: materializes the full path first. Matches sup_draw bit for bit.
SupDraw sup_draw_reference(const SupProblem& problem, std::uint64_t seed, std::size_t rep);

std::vector<SupDraw> sup_draws(const SupProblem& problem, std::size_t n_reps, std::uint64_t seed,
                               Execution exec = Execution::parallel);

/// Automatic horizon: g(z) = 20 sqrt(2 z max(log log z, 1)), capped at 1e12.
double auto_z_max(const std::function<double(double)>& g);

/// Smallest grid time: 1e-6 * min(1, g(0)^2).
double grid_z_min(double g_at_zero);

QuantileEstimate quantile_d(const WeightFn& g, double q, const McConfig& config,
                            Execution exec = Execution::parallel);

/// Same statistic for an arbitrary positive g on a given grid (no horizon doubling).
QuantileEstimate quantile_sup(const std::function<double(double)>& g, const SupGrid& grid, double q,
                              const McConfig& config, Execution exec = Execution::parallel);

struct QuantileEOptions {
    PsiMeasure measure = PsiMeasure::hazard;
    bool zero_psi_term = false;  // test hook: drop the W-bar term
    std::size_t uniform_points = 512;
};

QuantileEstimate quantile_e(const LoadSharingParams& params, const WeightFn& g, double q, const McConfig& config,
                            const QuantileEOptions& options = {}, Execution exec = Execution::parallel);

// ---- coverage --------------------------------------------------------------

struct CoverageScenario {
    Baseline baseline = Baseline::exponential();
    LoadSharingParams gamma;
    std::size_t M = 0;
    BandKind kind = BandKind::exact_known_gamma;
    double q = 0.9;
    std::optional<WeightFn> g;            // asymptotic kinds
    KsWeight h = KsWeight::unit();        // exact kind
    double R = kInfinity;                 // cdf horizon (x scale); p for the quantile band
    McConfig calibration;                 // used to calibrate c, d or e
    PsiMeasure measure = PsiMeasure::hazard;
};

struct CoverageReport {
    std::size_t n_reps = 0;
    std::size_t covered = 0;
    std::size_t failures = 0;  // construction errors, counted as not covered
    double empirical_level = 0.0;
    double std_error = 0.0;
    double quantile_used = 0.0;  // calibrated quantile (mean of e over replications for unknown gamma)
    nlohmann::json config;
};

/// config.n_reps coverage replications; replication i uses seeds derived from (config.seed, i).
CoverageReport coverage_experiment(const CoverageScenario& scenario, const McConfig& config,
                                   Execution exec = Execution::parallel);

}  // namespace seqband
