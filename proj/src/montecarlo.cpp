#include "seqband/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "seqband/error.hpp"
#include "seqband/estimators.hpp"
#include "seqband/gos.hpp"
#include "seqband/rng.hpp"

namespace seqband {

// ---- shared helpers --------------------------------------------------------

QuantileEstimate summarize_draws(std::vector<double>& draws, double q, nlohmann::json metadata)
{
    require(!draws.empty(), ErrorCode::EmptyRequest, "no Monte Carlo draws");
    require(q > 0.0 && q < 1.0, ErrorCode::DomainError, "level q must lie in (0,1)");
    std::sort(draws.begin(), draws.end());
    const auto n = draws.size();
    const double nd = static_cast<double>(n);
    const auto j = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(nd * q)), 1, n);
    const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(nd * q * (1.0 - q))));
    const std::size_t lo = j > k ? j - k : 1;
    const std::size_t hi = std::min(n, j + k);

    QuantileEstimate est;
    est.value = draws[j - 1];
    est.level = q;
    est.n_reps = n;
    est.std_error = 0.5 * (draws[hi - 1] - draws[lo - 1]);
    est.metadata = std::move(metadata);
    est.metadata["q"] = q;
    est.metadata["n_reps"] = n;
    require(std::isfinite(est.value), ErrorCode::NumericalError, "non-finite Monte Carlo quantile");
    return est;
}

const char* to_string(EstimatorFlavor f)
{
    return f == EstimatorFlavor::product ? "product" : "exponential";
}

KsWeight KsWeight::unit()
{
    return KsWeight{"unit", [](double) { return 1.0; }};
}

namespace {

nlohmann::json gamma_json(const LoadSharingParams& params)
{
    return std::vector<double>(params.values().begin(), params.values().end());
}

}  // namespace

// ---- K_gamma ---------------------------------------------------------------

double kgamma_statistic(const StepFunction& g_hat, const KsWeight& h)
{
    double sup = 0.0;
    double left = 0.0;
    double value = g_hat.initial_value();
    const auto knots = g_hat.knots();
    const auto values = g_hat.values();
    for (std::size_t k = 0; k <= knots.size(); ++k) {
        const double right = k < knots.size() ? std::min(knots[k], 1.0) : 1.0;
        const double dev = std::max(std::abs(value - left), std::abs(value - right));
        sup = std::max(sup, h(value) * dev);
        if (k < knots.size()) {
            left = right;
            value = values[k];
        }
    }
    return sup;
}

double kgamma_draw(const LoadSharingParams& params, std::size_t M, const KsWeight& h, EstimatorFlavor flavor,
                   std::uint64_t seed, std::size_t rep)
{
    const SampleSet data = sample_gos(params, Baseline::uniform(), M, stream_key(seed, rep, 11), Execution::serial);
    const BaselineEstimate est = nelson_aalen(data, params);
    return kgamma_statistic(flavor == EstimatorFlavor::product ? est.f_hat_product : est.f_hat, h);
}

std::vector<double> kgamma_draws(const LoadSharingParams& params, std::size_t M, const KsWeight& h,
                                 EstimatorFlavor flavor, const McConfig& config, Execution exec)
{
    config.validate();
    require(M >= 1, ErrorCode::EmptyRequest, "M must be at least 1");
    std::vector<double> draws(config.n_reps);
    for_each_index(exec, config.n_reps,
                   [&](std::size_t i) { draws[i] = kgamma_draw(params, M, h, flavor, config.seed, i); });
    return draws;
}

QuantileEstimate quantile_kgamma(const LoadSharingParams& params, std::size_t M, const KsWeight& h, double q,
                                 const McConfig& config, EstimatorFlavor flavor, Execution exec)
{
    auto draws = kgamma_draws(params, M, h, flavor, config, exec);
    nlohmann::json meta = {{"statistic", "K_gamma"}, {"gamma", gamma_json(params)}, {"M", M},
                           {"H", h.name},            {"flavor", to_string(flavor)}, {"seed", config.seed}};
    return summarize_draws(draws, q, std::move(meta));
}

// ---- grids -----------------------------------------------------------------

SupGrid::SupGrid(std::vector<double> times, std::vector<char> is_base)
    : times_(std::move(times)), is_base_(std::move(is_base))
{
    require(!times_.empty() && times_.size() == is_base_.size(), ErrorCode::InvalidConfig, "malformed grid");
    require(times_.front() > 0.0, ErrorCode::InvalidConfig, "grid times must be positive");
    for (std::size_t i = 1; i < times_.size(); ++i) {
        require(times_[i] > times_[i - 1], ErrorCode::InvalidConfig, "grid times must increase strictly");
    }
    require(is_base_.back() != 0, ErrorCode::InvalidConfig, "grid must end at a base point");
    base_count_ = static_cast<std::size_t>(std::count(is_base_.begin(), is_base_.end(), char{1}));
}

SupGrid SupGrid::geometric(double z_min, double z_max, std::size_t n)
{
    require(n >= 2, ErrorCode::InvalidConfig, "grid needs at least 2 points");
    require(z_min > 0.0 && z_max > z_min, ErrorCode::InvalidConfig, "grid needs 0 < z_min < z_max");
    const double log_ratio = std::log(z_max / z_min) / static_cast<double>(n - 1);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = z_min * std::exp(static_cast<double>(i) * log_ratio);
    }
    SupGrid grid(std::move(t), std::vector<char>(n, 1));
    grid.z_min_ = z_min;
    grid.log_ratio_ = log_ratio;
    grid.ratio_ = std::exp(log_ratio);
    return grid;
}

SupGrid SupGrid::standard(double g_at_zero, double z_max, const McConfig& config)
{
    return geometric(grid_z_min(g_at_zero), z_max, config.grid_size).refined(config.grid_refine);
}

SupGrid SupGrid::extended(double factor) const
{
    require(log_ratio_ > 0.0, ErrorCode::InvalidConfig, "only geometric grids can be extended");
    require(factor >= 1.0, ErrorCode::InvalidConfig, "extension factor must be >= 1");
    const auto extra = static_cast<std::size_t>(std::ceil(std::log(factor) / log_ratio_ - 1e-9));
    std::vector<double> t = times_;
    std::vector<char> base = is_base_;
    for (std::size_t i = base_count_; i < base_count_ + extra; ++i) {
        t.push_back(z_min_ * std::exp(static_cast<double>(i) * log_ratio_));
        base.push_back(1);
    }
    SupGrid grid(std::move(t), std::move(base));
    grid.z_min_ = z_min_;
    grid.log_ratio_ = log_ratio_;
    grid.ratio_ = ratio_;
    return grid;
}

SupGrid SupGrid::refined(std::size_t m) const
{
    if (m == 0) {
        return *this;
    }
    std::vector<double> t;
    std::vector<char> base;
    t.reserve(times_.size() * (m + 1));
    base.reserve(times_.size() * (m + 1));
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (i > 0) {
            const double step = std::log(times_[i] / times_[i - 1]) / static_cast<double>(m + 1);
            for (std::size_t k = 1; k <= m; ++k) {
                const double x = times_[i - 1] * std::exp(static_cast<double>(k) * step);
                if (x > t.back() && x < times_[i]) {
                    t.push_back(x);
                    base.push_back(0);
                }
            }
        }
        t.push_back(times_[i]);
        base.push_back(is_base_[i]);
    }
    SupGrid grid(std::move(t), std::move(base));
    grid.z_min_ = z_min_;
    grid.log_ratio_ = log_ratio_;
    grid.ratio_ = ratio_;
    return grid;
}

SupGrid SupGrid::with_points(std::span<const double> extra) const
{
    std::vector<double> add(extra.begin(), extra.end());
    std::sort(add.begin(), add.end());
    std::vector<double> t;
    std::vector<char> base;
    std::size_t a = 0;
    for (std::size_t i = 0; i < times_.size(); ++i) {
        while (a < add.size() && add[a] <= times_[i]) {
            if (add[a] > 0.0 && add[a] < times_[i] && (t.empty() || add[a] > t.back())) {
                t.push_back(add[a]);
                base.push_back(0);
            }
            ++a;
        }
        t.push_back(times_[i]);
        base.push_back(is_base_[i]);
    }
    SupGrid grid(std::move(t), std::move(base));
    grid.z_min_ = z_min_;
    grid.log_ratio_ = log_ratio_;
    grid.ratio_ = ratio_;
    return grid;
}

double grid_z_min(double g_at_zero)
{
    return 1e-6 * std::min(1.0, g_at_zero * g_at_zero);
}

double auto_z_max(const std::function<double(double)>& g)
{
    constexpr double cap = 1e12;
    auto gap = [&](double z) { return g(z) - 20.0 * std::sqrt(2.0 * z * std::max(std::log(std::log(z)), 1.0)); };
    if (gap(cap) < 0.0) {
        return cap;
    }
    double lo = 10.0;
    double hi = cap;
    if (gap(lo) >= 0.0) {
        return lo;
    }
    for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
        const double mid = std::sqrt(lo * hi);
        (gap(mid) < 0.0 ? lo : hi) = mid;
    }
    return hi;
}

// ---- sup kernels -----------------------------------------------------------

namespace {

struct Streams {
    Engine skeleton;
    Engine bridge;
    Engine extremes;
    Engine gaussian;
    std::normal_distribution<double> skeleton_normal;
    std::normal_distribution<double> bridge_normal;

    Streams(std::uint64_t seed, std::size_t rep)
        : skeleton(make_stream(seed, rep, 0)), bridge(make_stream(seed, rep, 1)), extremes(make_stream(seed, rep, 2)),
          gaussian(make_stream(seed, rep, 3))
    {}
};

Eigen::VectorXd draw_wbar(const SupProblem& problem, Streams& streams)
{
    const auto n = problem.chol_inv_t.rows();
    if (n == 0 || problem.loadings.size() == 0) {
        return {};
    }
    std::normal_distribution<double> normal;
    Eigen::VectorXd xi(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        xi(j) = normal(streams.gaussian);
    }
    return problem.chol_inv_t * xi;
}

double drift_at(const SupProblem& problem, const Eigen::VectorXd& wbar, std::size_t i)
{
    if (wbar.size() == 0) {
        return 0.0;
    }
    return problem.loadings.row(static_cast<Eigen::Index>(i)).dot(wbar);
}

// Sup of |bridge| between (t0, x0) and (t1, x1): sample the extreme on the side the endpoints lean to.
inline double bridge_extreme(double x0, double x1, double dt, double uniform)
{
    const double diff = x1 - x0;
    const double root = std::sqrt(diff * diff - 2.0 * dt * std::log(uniform));
    return 0.5 * (std::abs(x0 + x1) + root);
}

inline double skeleton_step(double w_prev, double t_prev, double t, double z)
{
    return w_prev + std::sqrt(t - t_prev) * z;
}

inline double bridge_fill(double w0, double t0, double w1, double t1, double t, double z)
{
    const double span = t1 - t0;
    const double mean = w0 + (t - t0) / span * (w1 - w0);
    const double sd = std::sqrt((t - t0) * (t1 - t) / span);
    return mean + sd * z;
}

struct Tracker {
    SupDraw best;
    double prev_t = 0.0;
    double prev_x = 0.0;

    void visit(const SupProblem& problem, std::size_t i, double t, double x, Engine& extremes)
    {
        const double g_left = i == 0 ? problem.g0 : problem.g[i - 1];
        const double m = bridge_extreme(prev_x, x, t - prev_t, open_uniform(extremes));
        const double value = m / g_left;
        if (value > best.value) {
            best.value = value;
            best.argmax = prev_t;
        }
        prev_t = t;
        prev_x = x;
    }
};

void check_problem(const SupProblem& problem)
{
    require(problem.grid != nullptr && problem.grid->size() == problem.g.size(), ErrorCode::InvalidConfig,
            "sup problem: g must be tabulated on the grid");
    require(problem.loadings.size() == 0 ||
                static_cast<std::size_t>(problem.loadings.rows()) == problem.grid->size(),
            ErrorCode::InvalidConfig, "sup problem: drift loadings must match the grid");
}

}  // namespace

SupDraw sup_draw(const SupProblem& problem, std::uint64_t seed, std::size_t rep)
{
    const SupGrid& grid = *problem.grid;
    const auto times = grid.times();
    const auto base = grid.is_base();
    Streams s(seed, rep);
    const Eigen::VectorXd wbar = draw_wbar(problem, s);

    Tracker tracker;
    double w_left = 0.0;  // path at the last visited point
    double t_left = 0.0;
    double w_base = 0.0;  // path at the last base point
    double t_base = 0.0;
    bool pending = false;
    double w_next = 0.0;
    double t_next = 0.0;
    std::size_t next_base = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        double w;
        if (base[i]) {
            w = pending ? w_next : skeleton_step(w_base, t_base, times[i], s.skeleton_normal(s.skeleton));
            pending = false;
            w_base = w;
            t_base = times[i];
        } else {
            if (!pending) {
                next_base = i + 1;
                while (!base[next_base]) {
                    ++next_base;
                }
                t_next = times[next_base];
                w_next = skeleton_step(w_base, t_base, t_next, s.skeleton_normal(s.skeleton));
                pending = true;
            }
            w = bridge_fill(w_left, t_left, w_next, t_next, times[i], s.bridge_normal(s.bridge));
        }
        w_left = w;
        t_left = times[i];
        tracker.visit(problem, i, times[i], w + drift_at(problem, wbar, i), s.extremes);
    }
    return tracker.best;
}

SupDraw sup_draw_reference(const SupProblem& problem, std::uint64_t seed, std::size_t rep)
{
    const SupGrid& grid = *problem.grid;
    const auto times = grid.times();
    const auto base = grid.is_base();
    const std::size_t n = times.size();
    Streams s(seed, rep);
    const Eigen::VectorXd wbar = draw_wbar(problem, s);

    // skeleton first, in base order
    std::vector<double> path(n, 0.0);
    double w_prev = 0.0;
    double t_prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (base[i]) {
            path[i] = skeleton_step(w_prev, t_prev, times[i], s.skeleton_normal(s.skeleton));
            w_prev = path[i];
            t_prev = times[i];
        }
    }
    // bridges, left to right
    std::size_t right = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (base[i]) {
            continue;
        }
        if (right <= i) {
            right = i + 1;
            while (!base[right]) {
                ++right;
            }
        }
        const double w0 = i == 0 ? 0.0 : path[i - 1];
        const double t0 = i == 0 ? 0.0 : times[i - 1];
        path[i] = bridge_fill(w0, t0, path[right], times[right], times[i], s.bridge_normal(s.bridge));
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = path[i] + drift_at(problem, wbar, i);
    }
    Tracker tracker;
    for (std::size_t i = 0; i < n; ++i) {
        tracker.visit(problem, i, times[i], x[i], s.extremes);
    }
    return tracker.best;
}

std::vector<SupDraw> sup_draws(const SupProblem& problem, std::size_t n_reps, std::uint64_t seed, Execution exec)
{
    check_problem(problem);
    std::vector<SupDraw> out(n_reps);
    for_each_index(exec, n_reps, [&](std::size_t i) { out[i] = sup_draw(problem, seed, i); });
    return out;
}

namespace {

double tail_fraction(const std::vector<SupDraw>& draws, double z_max)
{
    std::size_t tail = 0;
    for (const auto& d : draws) {
        tail += d.argmax >= z_max / 10.0 ? 1 : 0;
    }
    return static_cast<double>(tail) / static_cast<double>(draws.size());
}

std::vector<double> values_of(const std::vector<SupDraw>& draws)
{
    std::vector<double> v(draws.size());
    std::transform(draws.begin(), draws.end(), v.begin(), [](const SupDraw& d) { return d.value; });
    return v;
}

constexpr double kHorizonCap = 1e12;
constexpr int kMaxDoublings = 8;
constexpr double kTailThreshold = 0.01;

}  // namespace

QuantileEstimate quantile_sup(const std::function<double(double)>& g, const SupGrid& grid, double q,
                              const McConfig& config, Execution exec)
{
    config.validate();
    SupProblem problem;
    problem.grid = &grid;
    problem.g0 = g(0.0);
    problem.g.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        problem.g[i] = g(grid.times()[i]);
    }
    const auto draws = sup_draws(problem, config.n_reps, config.seed, exec);
    auto values = values_of(draws);
    nlohmann::json meta = {{"statistic", "sup"},        {"z_max", grid.z_max()}, {"grid_points", grid.size()},
                           {"tail_fraction", tail_fraction(draws, grid.z_max())}, {"seed", config.seed}};
    return summarize_draws(values, q, std::move(meta));
}

QuantileEstimate quantile_d(const WeightFn& g, double q, const McConfig& config, Execution exec)
{
    config.validate();
    const bool automatic = config.z_max <= 0.0;
    const double z0 = automatic ? auto_z_max([&](double z) { return g(z); }) : config.z_max;
    SupGrid base = SupGrid::geometric(grid_z_min(g.floor()), z0, config.grid_size);

    std::vector<SupDraw> draws;
    SupGrid grid;
    int doublings = 0;
    for (;;) {
        grid = base.refined(config.grid_refine);
        SupProblem problem;
        problem.grid = &grid;
        problem.g0 = g(0.0);
        problem.g.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            problem.g[i] = g(grid.times()[i]);
        }
        draws = sup_draws(problem, config.n_reps, config.seed, exec);
        if (!automatic || doublings >= kMaxDoublings || base.z_max() >= kHorizonCap ||
            tail_fraction(draws, base.z_max()) < kTailThreshold) {
            break;
        }
        base = base.extended(2.0);
        ++doublings;
    }
    auto values = values_of(draws);
    nlohmann::json meta = {{"statistic", "d"},
                           {"g", g.describe()},
                           {"z_max", base.z_max()},
                           {"auto_horizon", automatic},
                           {"doublings", doublings},
                           {"grid_size", config.grid_size},
                           {"grid_refine", config.grid_refine},
                           {"tail_fraction", tail_fraction(draws, base.z_max())},
                           {"seed", config.seed}};
    return summarize_draws(values, q, std::move(meta));
}

QuantileEstimate quantile_e(const LoadSharingParams& params, const WeightFn& g, double q, const McConfig& config,
                            const QuantileEOptions& options, Execution exec)
{
    config.validate();
    if (params.r() == 1) {
        QuantileEstimate d = quantile_d(g, q, config, exec);
        d.metadata["statistic"] = "e";
        d.metadata["gamma"] = gamma_json(params);
        return d;
    }
    const std::size_t r = params.r();
    const bool automatic = config.z_max <= 0.0;
    const double z0 = automatic ? auto_z_max([&](double z) { return g(z); }) : config.z_max;
    SupGrid base = SupGrid::geometric(grid_z_min(g.floor()), z0, config.grid_size);

    std::optional<PopulationQuantities> pq;
    Eigen::MatrixXd chol_inv_t;
    std::vector<SupDraw> draws;
    int doublings = 0;
    for (;;) {
        const double horizon = base.z_max();
        if (!pq || pq->v_max() < horizon) {
            const double target = automatic ? std::min(horizon * 16.0, kHorizonCap * 2.0) : horizon;
            pq.emplace(params, PopulationQuantities::Extent{0.0, std::max(target, horizon)}, options.measure,
                       config.tolerance, true);
            const Eigen::LLT<Eigen::MatrixXd> llt(pq->sigma());
            require(llt.info() == Eigen::Success, ErrorCode::NumericalError, "Sigma_G factorization failed");
            const Eigen::MatrixXd L = llt.matrixL();
            const auto n = L.rows();
            chol_inv_t = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n)).transpose();
        }
        // u-points on a uniform grid, placed at their time-changed positions
        std::vector<double> extra;
        for (std::size_t i = 1; i <= options.uniform_points; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(options.uniform_points + 1);
            const double z = pq->v(u);
            if (z < horizon) {
                extra.push_back(z);
            }
        }
        const SupGrid grid = base.refined(config.grid_refine).with_points(extra);

        SupProblem problem;
        problem.grid = &grid;
        problem.g0 = g(0.0);
        problem.g.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            problem.g[i] = g(grid.times()[i]);
        }
        if (!options.zero_psi_term) {
            problem.loadings.resize(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(r - 1));
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double w = pq->v_inverse_hazard(grid.times()[i]);
                const auto psi = pq->psi_hazard(w);
                for (std::size_t j = 0; j + 1 < r; ++j) {
                    problem.loadings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        psi[j] * params[j + 1];
                }
            }
            problem.chol_inv_t = chol_inv_t;
        }
        draws = sup_draws(problem, config.n_reps, config.seed, exec);
        if (!automatic || doublings >= kMaxDoublings || horizon >= kHorizonCap ||
            tail_fraction(draws, horizon) < kTailThreshold) {
            break;
        }
        base = base.extended(2.0);
        ++doublings;
    }
    auto values = values_of(draws);
    nlohmann::json meta = {{"statistic", "e"},
                           {"gamma", gamma_json(params)},
                           {"g", g.describe()},
                           {"psi_measure", to_string(options.measure)},
                           {"psi_term", !options.zero_psi_term},
                           {"z_max", base.z_max()},
                           {"auto_horizon", automatic},
                           {"doublings", doublings},
                           {"grid_size", config.grid_size},
                           {"grid_refine", config.grid_refine},
                           {"uniform_points", options.uniform_points},
                           {"tail_fraction", tail_fraction(draws, base.z_max())},
                           {"seed", config.seed}};
    return summarize_draws(values, q, std::move(meta));
}

// ---- coverage --------------------------------------------------------------

CoverageReport coverage_experiment(const CoverageScenario& scenario, const McConfig& config, Execution exec)
{
    config.validate();
    require(scenario.M >= 1, ErrorCode::EmptyRequest, "scenario needs M >= 1");
    const bool asymptotic = scenario.kind != BandKind::exact_known_gamma;
    require(!asymptotic || scenario.g.has_value(), ErrorCode::InvalidWeight, "asymptotic bands need a weight g");
    if (scenario.kind == BandKind::quantile_function) {
        require(scenario.R > 0.0 && scenario.R < 1.0, ErrorCode::DomainError, "quantile band needs p in (0,1)");
    }

    double calibrated = 0.0;
    if (scenario.kind == BandKind::exact_known_gamma) {
        calibrated = quantile_kgamma(scenario.gamma, scenario.M, scenario.h, scenario.q, scenario.calibration,
                                     EstimatorFlavor::product, exec)
                         .value;
    } else if (scenario.kind != BandKind::asymptotic_unknown_gamma) {
        calibrated = quantile_d(*scenario.g, scenario.q, scenario.calibration, exec).value;
    }

    const auto cdf = [&](double x) { return scenario.baseline.cdf(x); };
    const auto quantile = [&](double u) { return scenario.baseline.quantile(u); };
    std::vector<char> covered(config.n_reps, 0);
    std::vector<char> failed(config.n_reps, 0);
    std::vector<double> used(config.n_reps, calibrated);
    const Execution inner = exec == Execution::parallel ? Execution::serial : exec;
    for_each_index(exec, config.n_reps, [&](std::size_t i) {
        try {
            const SampleSet data =
                sample_gos(scenario.gamma, scenario.baseline, scenario.M, stream_key(config.seed, i, 21), inner);
            switch (scenario.kind) {
            case BandKind::exact_known_gamma: {
                const Band band = exact_band(data, scenario.gamma, scenario.q, calibrated, scenario.h);
                covered[i] = band_contains_cdf(band, cdf, scenario.R);
                break;
            }
            case BandKind::asymptotic_known_gamma: {
                const Band band =
                    asymptotic_band_known(data, scenario.gamma, scenario.q, *scenario.g, calibrated, scenario.R);
                covered[i] = band_contains_cdf(band, cdf, scenario.R);
                break;
            }
            case BandKind::asymptotic_unknown_gamma: {
                McConfig calib = scenario.calibration;
                calib.seed = stream_key(scenario.calibration.seed, i, 22);
                const auto result = asymptotic_band_unknown(data, scenario.gamma[0], scenario.q, *scenario.g, calib,
                                                            scenario.R, scenario.measure, inner);
                used[i] = result.band.quantile_used;
                covered[i] = band_contains_cdf(result.band, cdf, scenario.R);
                break;
            }
            case BandKind::quantile_function: {
                const Band band =
                    quantile_band(data, scenario.gamma, scenario.q, *scenario.g, scenario.R, calibrated);
                covered[i] = band_contains_quantile(band, quantile);
                break;
            }
            }
        } catch (const Error&) {
            failed[i] = 1;
            covered[i] = 0;
        }
    });

    CoverageReport report;
    report.n_reps = config.n_reps;
    report.covered = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), char{1}));
    report.failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), char{1}));
    report.empirical_level = static_cast<double>(report.covered) / static_cast<double>(report.n_reps);
    report.std_error =
        std::sqrt(report.empirical_level * (1.0 - report.empirical_level) / static_cast<double>(report.n_reps));
    double sum = 0.0;
    for (double u : used) {
        sum += u;
    }
    report.quantile_used = sum / static_cast<double>(used.size());
    report.config = {{"kind", to_string(scenario.kind)},
                     {"baseline", scenario.baseline.describe()},
                     {"gamma", gamma_json(scenario.gamma)},
                     {"M", scenario.M},
                     {"q", scenario.q},
                     {"R", std::isfinite(scenario.R) ? nlohmann::json(scenario.R) : nlohmann::json(nullptr)},
                     {"weight", scenario.g ? scenario.g->describe() : scenario.h.name},
                     {"n_reps", config.n_reps},
                     {"seed", config.seed},
                     {"calibration_reps", scenario.calibration.n_reps},
                     {"calibration_seed", scenario.calibration.seed}};
    return report;
}

}  // namespace seqband
