#include "seqband/bands.hpp"

#include <algorithm>
#include <cmath>

#include "seqband/error.hpp"
#include "seqband/montecarlo.hpp"

namespace seqband {

const char* to_string(BandKind kind)
{
    switch (kind) {
    case BandKind::exact_known_gamma: return "ExactKnownGamma";
    case BandKind::asymptotic_known_gamma: return "AsymptoticKnownGamma";
    case BandKind::asymptotic_unknown_gamma: return "AsymptoticUnknownGamma";
    case BandKind::quantile_function: return "QuantileFunction";
    }
    return "Unknown";
}

namespace {

void check_level(double q)
{
    require(q > 0.0 && q < 1.0, ErrorCode::DomainError, "level q must lie in (0,1)");
}

struct Envelope {
    std::vector<double> lower;
    std::vector<double> upper;
    double lower0;
    double upper0;
};

template <class HalfWidth>
Envelope envelope_around(const StepFunction& f, HalfWidth&& half_width)
{
    Envelope env;
    const auto values = f.values();
    env.lower.resize(values.size());
    env.upper.resize(values.size());
    auto fill = [&](double y, double w, double& lo, double& hi) {
        require(w >= 0.0 && !std::isnan(w), ErrorCode::NumericalError, "negative band half-width");
        lo = std::clamp(y - w, 0.0, kUpperClip);
        hi = std::clamp(y + w, 0.0, kUpperClip);
    };
    fill(f.initial_value(), half_width(std::size_t(0), true), env.lower0, env.upper0);
    for (std::size_t k = 0; k < values.size(); ++k) {
        fill(values[k], half_width(k, false), env.lower[k], env.upper[k]);
    }
    return env;
}

Band make_band(BandKind kind, const StepFunction& f, Envelope env)
{
    Band band;
    band.kind = kind;
    const std::vector<double> knots(f.knots().begin(), f.knots().end());
    band.lower = StepFunction(knots, std::move(env.lower), env.lower0);
    band.upper = StepFunction(knots, std::move(env.upper), env.upper0);
    band.fhat = f;
    return band;
}

}  // namespace

Band exact_band(const SampleSet& data, const LoadSharingParams& params, double q, double c_quantile,
                const KsWeight& h, EstimatorFlavor flavor)
{
    check_level(q);
    require(std::isfinite(c_quantile) && c_quantile >= 0.0, ErrorCode::DomainError, "c must be finite and >= 0");
    const BaselineEstimate est = nelson_aalen(data, params);
    const StepFunction& f = flavor == EstimatorFlavor::product ? est.f_hat_product : est.f_hat;
    auto half = [&](std::size_t k, bool initial) {
        const double y = initial ? f.initial_value() : f.values()[k];
        const double weight = h(y);
        require(weight > 0.0, ErrorCode::InvalidWeight, "h must be positive");
        return c_quantile / weight;
    };
    Band band = make_band(BandKind::exact_known_gamma, f, envelope_around(f, half));
    band.quantile_used = c_quantile;
    band.level = q;
    band.gamma = params;
    band.M = data.M();
    band.weight = h.name;
    return band;
}

Band exact_band(const SampleSet& data, const LoadSharingParams& params, const QuantileEstimate& c_quantile,
                const KsWeight& h, EstimatorFlavor flavor)
{
    const auto& meta = c_quantile.metadata;
    const std::vector<double> gamma(params.values().begin(), params.values().end());
    const bool matches = meta.value("statistic", "") == "K_gamma" && meta.contains("gamma") &&
                         meta["gamma"].get<std::vector<double>>() == gamma &&
                         meta.value("M", std::size_t{0}) == data.M() && meta.value("H", "") == h.name &&
                         meta.value("flavor", "") == to_string(flavor);
    require(matches, ErrorCode::CalibrationMismatch,
            "calibration " + meta.dump() + " was not produced for this gamma, M = " + std::to_string(data.M()) +
                ", H = " + h.name);
    Band band = exact_band(data, params, c_quantile.level, c_quantile.value, h, flavor);
    band.seed = meta.value("seed", std::uint64_t{0});
    return band;
}

Band asymptotic_envelope(const BaselineEstimate& estimate, const PopulationQuantities& pq, const WeightFn& g,
                         double factor)
{
    require(std::isfinite(factor) && factor >= 0.0, ErrorCode::DomainError, "band quantile must be >= 0");
    const double root_m = std::sqrt(static_cast<double>(estimate.M));
    const StepFunction& f = estimate.f_hat;
    const StepFunction& lambda = estimate.lambda_hat;
    auto half = [&](std::size_t k, bool initial) {
        const double cum = initial ? 0.0 : lambda.values()[k];
        const double v = pq.v_hazard(cum);
        return factor * g(v) * std::exp(-cum) / root_m;
    };
    Band band = make_band(BandKind::asymptotic_known_gamma, f, envelope_around(f, half));
    band.quantile_used = factor;
    band.gamma = estimate.gamma_used;
    band.M = estimate.M;
    band.weight = g.describe();
    return band;
}

Band asymptotic_band_known(const SampleSet& data, const LoadSharingParams& params, double q, const WeightFn& g,
                           double d_quantile, double horizon)
{
    check_level(q);
    require(horizon > 0.0, ErrorCode::DomainError, "horizon R must be positive");
    const BaselineEstimate est = nelson_aalen(data, params);
    const PopulationQuantities pq(params, {est.lambda_hat.final_value(), 0.0}, PsiMeasure::hazard, 1e-10, false);
    Band band = asymptotic_envelope(est, pq, g, d_quantile);
    band.level = q;
    band.horizon = horizon;
    return band;
}

UnknownBandResult asymptotic_band_unknown(const SampleSet& data, double gamma1, double q, const WeightFn& g,
                                          const McConfig& config, double horizon, PsiMeasure measure,
                                          Execution exec)
{
    check_level(q);
    require(horizon > 0.0, ErrorCode::DomainError, "horizon R must be positive");
    require(g.for_unknown_gamma(), ErrorCode::InvalidWeight, "weight must grow without bound");
    require(data.M() >= 2, ErrorCode::DegenerateSample, "M = 1: gamma is not estimable");
    const EventTable events(data);
    UnknownBandResult out;
    out.fit = fit_gamma(events, gamma1, kInfinity, config);
    const BaselineEstimate est = nelson_aalen(events, out.fit.gamma_hat);
    QuantileEOptions options;
    options.measure = measure;
    out.e_quantile = quantile_e(out.fit.gamma_hat, g, q, config, options, exec);
    const PopulationQuantities pq(out.fit.gamma_hat, {est.lambda_hat.final_value(), 0.0}, measure,
                                  config.tolerance, false);
    out.band = asymptotic_envelope(est, pq, g, out.e_quantile.value);
    out.band.kind = BandKind::asymptotic_unknown_gamma;
    out.band.level = q;
    out.band.horizon = horizon;
    out.band.seed = config.seed;
    return out;
}

CrossSection quantile_cross_section(const StepFunction& fhat, double u, double slack)
{
    const auto knots = fhat.knots();
    const auto values = fhat.values();
    CrossSection cs{0.0, kInfinity};
    const double low = u - slack;
    if (low > fhat.initial_value()) {
        const auto it = std::lower_bound(values.begin(), values.end(), low);
        cs.lo = it == values.end() ? kInfinity : knots[static_cast<std::size_t>(it - values.begin())];
    }
    const auto it = std::upper_bound(values.begin(), values.end(), u + slack);
    if (it != values.end()) {
        cs.hi = knots[static_cast<std::size_t>(it - values.begin())];
    }
    return cs;
}

Band quantile_band(const SampleSet& data, const LoadSharingParams& params, double q, const WeightFn& g, double p,
                   double d_quantile, std::size_t grid_points)
{
    check_level(q);
    require(p > 0.0 && p < 1.0, ErrorCode::DomainError, "quantile band needs p in (0,1)");
    require(grid_points >= 1, ErrorCode::InvalidConfig, "quantile band needs at least one grid point");
    const BaselineEstimate est = nelson_aalen(data, params);
    const PopulationQuantities pq(params, {-std::log1p(-p), 0.0}, PsiMeasure::hazard, 1e-10, false);
    const double root_m = std::sqrt(static_cast<double>(data.M()));

    std::vector<double> u(grid_points);
    std::vector<double> lo(grid_points);
    std::vector<double> hi(grid_points);
    for (std::size_t k = 0; k < grid_points; ++k) {
        u[k] = p * static_cast<double>(k + 1) / static_cast<double>(grid_points);
        const double slack = d_quantile * g(pq.v(u[k])) * (1.0 - u[k]) / root_m;
        const CrossSection cs = quantile_cross_section(est.f_hat, u[k], slack);
        lo[k] = cs.lo;
        hi[k] = cs.hi;
    }
    // monotone hull; F^{-1} is increasing, so this does not change the coverage event
    for (std::size_t k = 1; k < grid_points; ++k) {
        lo[k] = std::max(lo[k], lo[k - 1]);
    }
    for (std::size_t k = grid_points - 1; k-- > 0;) {
        hi[k] = std::min(hi[k], hi[k + 1]);
    }

    Band band;
    band.kind = BandKind::quantile_function;
    band.lower = StepFunction(u, lo, 0.0);
    band.upper = StepFunction(u, hi, hi.front());
    band.fhat = est.f_hat;
    band.quantile_used = d_quantile;
    band.level = q;
    band.horizon = p;
    band.gamma = params;
    band.M = data.M();
    band.weight = g.describe();
    band.u_grid = std::move(u);
    return band;
}

bool band_contains_cdf(const Band& band, const std::function<double(double)>& cdf, double R)
{
    require(band.kind != BandKind::quantile_function, ErrorCode::InvalidConfig, "not a cdf band");
    require(R > 0.0, ErrorCode::DomainError, "horizon R must be positive");
    const auto knots = band.lower.knots();
    const auto lower = band.lower.values();
    const auto upper = band.upper.values();
    // step intervals [a, b) with constant envelope
    for (std::size_t k = 0; k <= knots.size(); ++k) {
        const double a = k == 0 ? 0.0 : knots[k - 1];
        if (a >= R && k > 0) {
            break;
        }
        const double b = std::min(k < knots.size() ? knots[k] : kInfinity, R);
        const double lo = k == 0 ? band.lower.initial_value() : lower[k - 1];
        const double hi = k == 0 ? band.upper.initial_value() : upper[k - 1];
        if (cdf(a) < lo) {
            return false;
        }
        if (std::isinf(b) ? hi < kUpperClip : cdf(b) > hi) {
            return false;
        }
    }
    const double span = std::isfinite(R) ? R : (knots.empty() ? 1.0 : knots.back());
    for (int i = 1; i <= 200; ++i) {
        const double x = span * i / 200.0;
        const double y = cdf(x);
        if (y < band.lower(x) || y > band.upper(x)) {
            return false;
        }
    }
    return true;
}

bool band_contains_quantile(const Band& band, const std::function<double(double)>& quantile)
{
    require(band.kind == BandKind::quantile_function, ErrorCode::InvalidConfig, "not a quantile band");
    const auto lower = band.lower.values();
    const auto upper = band.upper.values();
    for (std::size_t k = 0; k < band.u_grid.size(); ++k) {
        const double z = quantile(band.u_grid[k]);
        if (z < lower[k] || z > upper[k]) {
            return false;
        }
    }
    return true;
}

}  // namespace seqband
