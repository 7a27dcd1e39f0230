#include "seqband/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "seqband/bands.hpp"
#include "seqband/baseline.hpp"
#include "seqband/error.hpp"
#include "seqband/estimators.hpp"
#include "seqband/gos.hpp"
#include "seqband/io.hpp"
#include "seqband/montecarlo.hpp"
#include "seqband/parallel.hpp"
#include "seqband/rng.hpp"
#include "seqband/weight.hpp"

namespace seqband {

namespace {

struct Options {
    // shared
    std::uint64_t seed = 20240601;
    int threads = 0;
    std::size_t reps = 10000;
    std::size_t grid = 4096;
    std::size_t grid_refine = 0;
    double z_max = 0.0;
    double tolerance = 1e-10;
    // data and model
    std::string in;
    std::string out;
    std::string json_out;
    std::string svg_out;
    std::string gamma;
    double gamma1 = 0.0;
    std::string baseline = "exp";
    std::size_t M = 0;
    std::string t_star = "inf";
    // bands
    std::string mode;
    double q = 0.9;
    std::string g = "power:0.75,0.5";
    std::string R = "inf";
    double R_level = 0.0;
    double p = 0.9;
    std::size_t grid_points = 512;
    std::optional<double> quantile;
    std::string psi = "hazard";
    std::string kind;
    std::size_t calib_reps = 2000;
};

double parse_real(const std::string& text, const char* what)
{
    if (text == "inf" || text == "infinity" || text == "Inf") {
        return kInfinity;
    }
    const auto values = parse_number_list(text);
    require(values.size() == 1, ErrorCode::InvalidConfig, std::string(what) + " must be a single number");
    return values.front();
}

LoadSharingParams parse_gamma(const std::string& text)
{
    require(!text.empty(), ErrorCode::InvalidParams, "--gamma is required for this mode");
    return LoadSharingParams(parse_number_list(text));
}

PsiMeasure parse_psi(const std::string& text)
{
    if (text == "hazard") {
        return PsiMeasure::hazard;
    }
    require(text == "lebesgue", ErrorCode::InvalidConfig, "--psi must be hazard or lebesgue");
    return PsiMeasure::lebesgue;
}

McConfig mc_config(const Options& o)
{
    McConfig c;
    c.n_reps = o.reps;
    c.grid_size = o.grid;
    c.grid_refine = o.grid_refine;
    c.z_max = o.z_max;
    c.seed = o.seed;
    c.tolerance = o.tolerance;
    c.validate();
    return c;
}

nlohmann::json config_key(const McConfig& c)
{
    return {{"n_reps", c.n_reps},   {"grid_size", c.grid_size}, {"grid_refine", c.grid_refine},
            {"z_max", c.z_max},     {"seed", c.seed},           {"tolerance", c.tolerance}};
}

QuantileEstimate cached(nlohmann::json key, const std::function<QuantileEstimate()>& compute)
{
    key["format"] = 1;
    const auto cache = CalibrationCache::from_env();
    if (cache) {
        if (auto hit = cache->lookup(key)) {
            return *hit;
        }
    }
    QuantileEstimate est = compute();
    if (cache) {
        cache->store(key, est);
    }
    return est;
}

QuantileEstimate calibrate_c(const LoadSharingParams& gamma, std::size_t M, double q, const McConfig& c)
{
    nlohmann::json key = {{"statistic", "K_gamma"},
                          {"gamma", std::vector<double>(gamma.values().begin(), gamma.values().end())},
                          {"M", M},
                          {"H", "unit"},
                          {"q", q},
                          {"config", config_key(c)}};
    return cached(key, [&] { return quantile_kgamma(gamma, M, KsWeight::unit(), q, c); });
}

QuantileEstimate calibrate_d(const WeightFn& g, double q, const McConfig& c)
{
    nlohmann::json key = {{"statistic", "d"}, {"g", g.describe()}, {"q", q}, {"config", config_key(c)}};
    return cached(key, [&] { return quantile_d(g, q, c); });
}

QuantileEstimate calibrate_e(const LoadSharingParams& gamma, const WeightFn& g, double q, PsiMeasure psi,
                             const McConfig& c)
{
    nlohmann::json key = {{"statistic", "e"},
                          {"gamma", std::vector<double>(gamma.values().begin(), gamma.values().end())},
                          {"g", g.describe()},
                          {"q", q},
                          {"psi_measure", to_string(psi)},
                          {"config", config_key(c)}};
    QuantileEOptions opts;
    opts.measure = psi;
    return cached(key, [&] { return quantile_e(gamma, g, q, c, opts); });
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}

    std::ostream& stream() { return path_.empty() ? fallback_ : buffer_; }

    void finish()
    {
        if (!path_.empty()) {
            write_text_file(path_, buffer_.str());
        }
    }

private:
    std::string path_;
    std::ostream& fallback_;
    std::ostringstream buffer_;
};

void run_simulate(const Options& o, std::ostream& out)
{
    const auto gamma = parse_gamma(o.gamma);
    const Baseline baseline = Baseline::parse(o.baseline);
    const SampleSet data = sample_gos(gamma, baseline, o.M, o.seed);
    Output sink(o.out, out);
    write_samples_csv(sink.stream(), data);
    sink.finish();
}

void run_fit(const Options& o, std::ostream& out)
{
    const SampleSet data = ingest_csv(o.in);
    McConfig c;
    c.tolerance = o.tolerance;
    const GammaEstimate fit = fit_gamma(data, o.gamma1, parse_real(o.t_star, "--t-star"), c);
    Output sink(o.out, out);
    sink.stream() << fit_to_json(fit).dump(2) << '\n';
    sink.finish();
}

void run_band(const Options& o, std::ostream& out)
{
    const SampleSet data = ingest_csv(o.in);
    const McConfig c = mc_config(o);
    const double R = parse_real(o.R, "--R");
    Band band;
    if (o.mode == "exact") {
        const auto gamma = parse_gamma(o.gamma);
        if (o.quantile) {
            band = exact_band(data, gamma, o.q, *o.quantile);
        } else {
            band = exact_band(data, gamma, calibrate_c(gamma, data.M(), o.q, c));
        }
    } else if (o.mode == "asym-known") {
        const auto gamma = parse_gamma(o.gamma);
        const WeightFn g = WeightFn::parse(o.g);
        const double d = o.quantile ? *o.quantile : calibrate_d(g, o.q, c).value;
        band = asymptotic_band_known(data, gamma, o.q, g, d, R);
        band.seed = o.seed;
    } else if (o.mode == "asym-unknown") {
        require(o.gamma1 > 0.0, ErrorCode::InvalidParams, "--gamma1 is required for asym-unknown");
        const WeightFn g = WeightFn::parse(o.g);
        require(data.M() >= 2, ErrorCode::DegenerateSample, "M = 1: gamma is not estimable from a single system");
        band = asymptotic_band_unknown(data, o.gamma1, o.q, g, c, R, parse_psi(o.psi)).band;
    } else if (o.mode == "quantile-fn") {
        const auto gamma = parse_gamma(o.gamma);
        const WeightFn g = WeightFn::parse(o.g);
        const double d = o.quantile ? *o.quantile : calibrate_d(g, o.q, c).value;
        band = quantile_band(data, gamma, o.q, g, o.p, d, o.grid_points);
        band.seed = o.seed;
    } else {
        fail(ErrorCode::InvalidConfig, "--mode must be exact, asym-known, asym-unknown or quantile-fn");
    }
    Output sink(o.out, out);
    write_band_csv(sink.stream(), band);
    sink.finish();
    if (!o.json_out.empty()) {
        write_text_file(o.json_out, band_to_json(band).dump(2) + "\n");
    }
    if (!o.svg_out.empty()) {
        write_text_file(o.svg_out, band_to_svg(band));
    }
}

void run_quantiles(const Options& o, std::ostream& out)
{
    const McConfig c = mc_config(o);
    QuantileEstimate est;
    if (o.kind == "c") {
        require(o.M >= 1, ErrorCode::EmptyRequest, "--M is required for c");
        est = calibrate_c(parse_gamma(o.gamma), o.M, o.q, c);
    } else if (o.kind == "d") {
        est = calibrate_d(WeightFn::parse(o.g), o.q, c);
    } else if (o.kind == "e") {
        est = calibrate_e(parse_gamma(o.gamma), WeightFn::parse(o.g), o.q, parse_psi(o.psi), c);
    } else {
        fail(ErrorCode::InvalidConfig, "--kind must be c, d or e");
    }
    Output sink(o.out, out);
    sink.stream() << quantile_to_json(est).dump(2) << '\n';
    sink.finish();
}

void run_coverage(const Options& o, std::ostream& out)
{
    CoverageScenario s;
    s.baseline = Baseline::parse(o.baseline);
    s.gamma = parse_gamma(o.gamma);
    s.M = o.M;
    s.q = o.q;
    s.measure = parse_psi(o.psi);
    if (o.mode == "exact") {
        s.kind = BandKind::exact_known_gamma;
    } else if (o.mode == "asym-known") {
        s.kind = BandKind::asymptotic_known_gamma;
    } else if (o.mode == "asym-unknown") {
        s.kind = BandKind::asymptotic_unknown_gamma;
    } else if (o.mode == "quantile-fn") {
        s.kind = BandKind::quantile_function;
    } else {
        fail(ErrorCode::InvalidConfig, "--mode must be exact, asym-known, asym-unknown or quantile-fn");
    }
    if (s.kind != BandKind::exact_known_gamma) {
        s.g = WeightFn::parse(o.g);
    }
    if (s.kind == BandKind::quantile_function) {
        s.R = o.p;
    } else if (o.R_level > 0.0) {
        require(o.R_level < 1.0, ErrorCode::DomainError, "--R-level must lie in (0,1)");
        s.R = s.baseline.quantile(o.R_level);
    } else {
        s.R = parse_real(o.R, "--R");
    }
    Options calib = o;
    calib.reps = o.calib_reps;
    s.calibration = mc_config(calib);
    s.calibration.seed = stream_key(o.seed, 0, 99);
    McConfig runs;
    runs.n_reps = o.reps;
    runs.seed = o.seed;
    runs.validate();
    const CoverageReport report = coverage_experiment(s, runs);
    nlohmann::json j = {{"n_reps", report.n_reps},
                        {"covered", report.covered},
                        {"failures", report.failures},
                        {"empirical_level", report.empirical_level},
                        {"std_error", report.std_error},
                        {"quantile_used", report.quantile_used},
                        {"config", report.config}};
    Output sink(o.out, out);
    sink.stream() << j.dump(2) << '\n';
    sink.finish();
}

void add_mc_options(CLI::App* app, Options& o)
{
    app->add_option("--reps", o.reps, "Monte Carlo replications")->check(CLI::PositiveNumber);
    app->add_option("--grid", o.grid, "base grid points for Brownian suprema")->check(CLI::Range(2, 1 << 24));
    app->add_option("--grid-refine", o.grid_refine, "extra points per grid interval");
    app->add_option("--z-max", o.z_max, "Brownian horizon (0 = automatic)")->check(CLI::NonNegativeNumber);
    app->add_option("--tolerance", o.tolerance, "quadrature and Newton tolerance")->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Confidence bands for load-sharing systems from sequential order statistics", "seqband"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "read options from a TOML/INI file ([band], [fit], ... sections)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.add_option("--seed", o.seed, "seed for all randomness");
    app.add_option("--threads", o.threads, "worker threads (results do not depend on it)")
        ->check(CLI::NonNegativeNumber);

    auto* simulate = app.add_subcommand("simulate", "draw GOS failure data as CSV");
    simulate->add_option("--gamma", o.gamma, "load-sharing parameters, e.g. 10,9,11,13")->required();
    simulate->add_option("--baseline", o.baseline, "exp[:rate] | uniform | weibull:k[,s]");
    simulate->add_option("--M", o.M, "number of systems")->required();
    simulate->add_option("--out", o.out, "output CSV (default stdout)");

    auto* fit = app.add_subcommand("fit", "profile-likelihood estimate of gamma");
    fit->add_option("--in", o.in, "input CSV")->required();
    fit->add_option("--gamma1", o.gamma1, "fixed value of gamma_1")->required()->check(CLI::PositiveNumber);
    fit->add_option("--t-star", o.t_star, "censoring horizon (default inf)");
    fit->add_option("--tolerance", o.tolerance, "score tolerance")->check(CLI::PositiveNumber);
    fit->add_option("--out", o.out, "output JSON (default stdout)");

    auto* band = app.add_subcommand("band", "confidence band for the baseline cdf or its quantile function");
    band->add_option("--mode", o.mode, "exact | asym-known | asym-unknown | quantile-fn")->required();
    band->add_option("--in", o.in, "input CSV")->required();
    band->add_option("--gamma", o.gamma, "known load-sharing parameters");
    band->add_option("--gamma1", o.gamma1, "fixed gamma_1 (asym-unknown)");
    band->add_option("--q", o.q, "level")->check(CLI::Range(0.0, 1.0));
    band->add_option("--g", o.g, "weight power:a,b | sqrtlog:c");
    band->add_option("--R", o.R, "coverage horizon recorded with the band (default inf)");
    band->add_option("--p", o.p, "upper end of the u-range (quantile-fn)");
    band->add_option("--grid-points", o.grid_points, "u-grid size (quantile-fn)")->check(CLI::PositiveNumber);
    band->add_option("--quantile", o.quantile, "use this calibration quantile instead of simulating");
    band->add_option("--psi", o.psi, "Psi measure: hazard | lebesgue");
    band->add_option("--out", o.out, "band CSV (default stdout)");
    band->add_option("--json", o.json_out, "band JSON");
    band->add_option("--svg", o.svg_out, "band SVG");
    add_mc_options(band, o);

    auto* quantiles = app.add_subcommand("quantiles", "calibrate c, d or e (cached in $SEQBAND_CACHE_DIR)");
    quantiles->add_option("--kind", o.kind, "c | d | e")->required();
    quantiles->add_option("--gamma", o.gamma, "load-sharing parameters (c, e)");
    quantiles->add_option("--M", o.M, "systems per data set (c)");
    quantiles->add_option("--g", o.g, "weight (d, e)");
    quantiles->add_option("--q", o.q, "level")->check(CLI::Range(0.0, 1.0));
    quantiles->add_option("--psi", o.psi, "Psi measure: hazard | lebesgue");
    quantiles->add_option("--out", o.out, "output JSON (default stdout)");
    add_mc_options(quantiles, o);

    auto* coverage = app.add_subcommand("coverage", "empirical coverage of a band by simulation");
    coverage->add_option("--mode", o.mode, "exact | asym-known | asym-unknown | quantile-fn")->required();
    coverage->add_option("--gamma", o.gamma, "true load-sharing parameters")->required();
    coverage->add_option("--baseline", o.baseline, "true baseline");
    coverage->add_option("--M", o.M, "systems per data set")->required();
    coverage->add_option("--q", o.q, "level")->check(CLI::Range(0.0, 1.0));
    coverage->add_option("--g", o.g, "weight power:a,b | sqrtlog:c");
    coverage->add_option("--R", o.R, "horizon on the time axis");
    coverage->add_option("--R-level", o.R_level, "horizon as a baseline quantile level, e.g. 0.95");
    coverage->add_option("--p", o.p, "u-range end (quantile-fn)");
    coverage->add_option("--psi", o.psi, "Psi measure: hazard | lebesgue");
    coverage->add_option("--calib-reps", o.calib_reps, "replications per calibration")
        ->check(CLI::PositiveNumber);
    coverage->add_option("--out", o.out, "output JSON (default stdout)");
    add_mc_options(coverage, o);
    o.reps = 10000;

    std::vector<const char*> argv;
    argv.push_back("seqband");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        set_thread_count(o.threads);
        if (*simulate) {
            run_simulate(o, out);
        } else if (*fit) {
            run_fit(o, out);
        } else if (*band) {
            run_band(o, out);
        } else if (*quantiles) {
            run_quantiles(o, out);
        } else if (*coverage) {
            run_coverage(o, out);
        }
    } catch (const Error& e) {
        err << "seqband: " << e.what() << '\n';
        return is_numerical(e.code()) ? 3 : 2;
    } catch (const std::exception& e) {
        err << "seqband: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

int run_cli(int argc, const char* const* argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace seqband
