#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqband/cli.hpp"
#include "seqband/error.hpp"
#include "seqband/gos.hpp"
#include "seqband/io.hpp"
#include "seqband/weight.hpp"

using namespace seqband;
namespace fs = std::filesystem;

namespace {

ErrorCode parse_code(const std::string& text)
{
    try {
        parse_samples_csv(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected seqband::Error");
    return ErrorCode::NumericalError;
}

struct CliResult {
    int status;
    std::string out;
    std::string err;
};

CliResult cli(const std::vector<std::string>& args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int status = run_cli(args, out, err);
    return {status, out.str(), err.str()};
}

fs::path scratch_dir()
{
    const fs::path dir = fs::temp_directory_path() / "seqband_io_tests";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("CSV ingestion")
{
    const auto a = parse_samples_csv("1.0,2.0\n0.5,3.1\n");
    CHECK(a.M() == 2);
    CHECK(a.r() == 2);
    CHECK(a(1, 0) == 0.5);
    CHECK(a(1, 1) == 3.1);

    const auto h = parse_samples_csv("t1,t2\n1,2\n# comment\n\n3,4\n");
    CHECK(h.M() == 2);
    CHECK(h(1, 1) == 4.0);
    CHECK(parse_samples_csv(" 1 , 2 \r\n").r() == 2);

    CHECK(parse_code("2.0,1.0\n") == ErrorCode::NonMonotoneRow);
    try {
        parse_samples_csv("1,2\n2.0,1.0\n");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
    CHECK(parse_code("1,2\n1,2,3\n") == ErrorCode::RaggedRow);
    CHECK(parse_code("0,1\n") == ErrorCode::NonPositiveEntry);
    CHECK(parse_code("-1,1\n") == ErrorCode::NonPositiveEntry);
    CHECK(parse_code("") == ErrorCode::EmptyFile);
    CHECK(parse_code("t1,t2\n") == ErrorCode::EmptyFile);
    CHECK(parse_code("1,2\n3,abc\n") == ErrorCode::InvalidSample);

    try {
        ingest_csv(scratch_dir() / "missing.csv");
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoError);
    }
}

TEST_CASE("CSV round trip is exact")
{
    const auto data = sample_gos(LoadSharingParams({10.0, 9.0, 11.0, 13.0}), Baseline::weibull(1.3, 2.0), 100, 5);
    std::ostringstream out;
    write_samples_csv(out, data);
    CHECK(parse_samples_csv(out.str()) == data);

    const fs::path path = scratch_dir() / "round.csv";
    write_text_file(path, out.str());
    CHECK(ingest_csv(path) == data);
}

TEST_CASE("number formatting and lists")
{
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(parse_number_list("10, 9,11 ,13") == std::vector<double>{10, 9, 11, 13});
    CHECK_THROWS_AS(parse_number_list("1,,2"), Error);
}

TEST_CASE("weight specs")
{
    CHECK(WeightFn::parse("power:0.75,0.5") == WeightFn::power_plus(0.75, 0.5));
    CHECK(WeightFn::parse("sqrtlog:1") == WeightFn::sqrt_log_plus(1.0));
    CHECK(WeightFn::parse("power:0.75,0.5")(16.0) == doctest::Approx(8.5));
    CHECK(WeightFn::parse("sqrtlog:1")(0.0) == 1.0);
    const auto g = WeightFn::power_plus(0.6, 2.0);
    CHECK(WeightFn::parse(g.describe()) == g);
    for (const char* bad : {"power:0.5,1", "power:0.75,0", "power:0.75", "sqrtlog:0", "sqrtlog:-1", "exp:1", "power"}) {
        CAPTURE(bad);
        try {
            WeightFn::parse(bad);
            FAIL("expected InvalidWeight");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidWeight);
        }
    }
}

TEST_CASE("fit and quantile JSON")
{
    GammaEstimate fit;
    fit.gamma_hat = LoadSharingParams({10.0, 9.0, 11.0});
    fit.converged = true;
    fit.iterations = 4;
    fit.score_norm = 1e-12;
    const auto j = fit_to_json(fit);
    CHECK(j["gamma_hat"] == nlohmann::json({10.0, 9.0, 11.0}));
    CHECK(j["alpha_hat"][2].get<double>() == doctest::Approx(11.0 / 8.0));
    CHECK(j["t_star"].is_null());
    CHECK(j["iterations"] == 4);

    QuantileEstimate q{1.7, 0.9, 1000, 0.01, {{"statistic", "d"}, {"g", "power:0.75,0.5"}}};
    const auto back = quantile_from_json(quantile_to_json(q));
    CHECK(back.value == q.value);
    CHECK(back.std_error == q.std_error);
    CHECK(back.n_reps == q.n_reps);
    CHECK(back.metadata == q.metadata);
}

TEST_CASE("calibration cache")
{
    const fs::path dir = scratch_dir() / "cache";
    fs::remove_all(dir);
    const CalibrationCache cache(dir);
    const nlohmann::json key = {{"kind", "d"}, {"g", "power:0.75,0.5"}, {"q", 0.9}};
    CHECK_FALSE(cache.lookup(key).has_value());
    QuantileEstimate est{1.72, 0.9, 100, 0.02, {{"statistic", "d"}}};
    cache.store(key, est);
    const auto hit = cache.lookup(key);
    REQUIRE(hit.has_value());
    CHECK(hit->value == 1.72);
    nlohmann::json other = key;
    other["q"] = 0.95;
    CHECK_FALSE(cache.lookup(other).has_value());
    CHECK(cache.path_for(key) != cache.path_for(other));
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("band exports")
{
    const LoadSharingParams params({10.0, 9.0, 11.0, 13.0});
    const auto data = sample_gos(params, Baseline::exponential(), 40, 2024);
    const auto band = asymptotic_band_known(data, params, 0.9, WeightFn::power_plus(0.75, 0.5), 1.7);
    std::ostringstream csv;
    write_band_csv(csv, band);
    const std::string text = csv.str();
    CHECK(text.find("# kind=AsymptoticKnownGamma") != std::string::npos);
    CHECK(text.find("x,lower,upper,fhat") != std::string::npos);
    const auto j = band_to_json(band);
    CHECK(j["M"] == 40);
    CHECK(j["g"] == "power:0.75,0.5");
    CHECK(j["q"] == 0.9);
    const auto svg = band_to_svg(band);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("command line: simulate, fit and band")
{
    const fs::path dir = scratch_dir();
    const std::string sim = (dir / "sim.csv").string();
    auto r = cli({"simulate", "--gamma", "3,2.62,1.25", "--M", "5000", "--seed", "7", "--out", sim});
    REQUIRE(r.status == 0);
    CHECK(ingest_csv(sim) == sample_gos(LoadSharingParams({3.0, 2.62, 1.25}), Baseline::exponential(), 5000, 7));

    r = cli({"fit", "--gamma1", "3", "--in", sim});
    REQUIRE(r.status == 0);
    const auto fit = nlohmann::json::parse(r.out);
    CHECK(fit["converged"] == true);
    CHECK(std::abs(fit["gamma_hat"][1].get<double>() - 2.62) < 0.25);
    CHECK(std::abs(fit["gamma_hat"][2].get<double>() - 1.25) < 0.25);

    const std::string fig = (dir / "fig.csv").string();
    REQUIRE(cli({"simulate", "--gamma", "10,9,11,13", "--M", "40", "--seed", "2024", "--out", fig}).status == 0);
    const std::string svg = (dir / "band.svg").string();
    r = cli({"band", "--mode", "asym-known", "--gamma", "10,9,11,13", "--q", "0.9", "--g", "power:0.75,0.5", "--in",
             fig, "--quantile", "1.7259", "--svg", svg});
    REQUIRE(r.status == 0);
    CHECK(r.out.find("# kind=AsymptoticKnownGamma") != std::string::npos);
    CHECK(r.out.find("# g=power:0.75,0.5") != std::string::npos);
    CHECK(r.out.find("# M=40") != std::string::npos);
    CHECK(fs::exists(svg));

    r = cli({"band", "--mode", "exact", "--gamma", "10,9,11,13", "--q", "0.9", "--in", fig, "--reps", "300"});
    CHECK(r.status == 0);
    r = cli({"band", "--mode", "quantile-fn", "--gamma", "10,9,11,13", "--q", "0.9", "--g", "power:0.75,0.5",
             "--p", "0.9", "--in", fig, "--quantile", "1.7"});
    CHECK(r.status == 0);
}

TEST_CASE("command line errors")
{
    const fs::path dir = scratch_dir();
    const std::string one = (dir / "one.csv").string();
    write_text_file(one, "1.0,2.0,3.0,4.0\n");
    auto r = cli({"band", "--mode", "asym-unknown", "--gamma1", "10", "--q", "0.9", "--g", "power:0.75,0.5", "--in",
                  one});
    CHECK(r.status == 2);
    CHECK(r.err.find("DegenerateSample") != std::string::npos);

    r = cli({"band", "--mode", "asym-known", "--gamma", "10,9,11,13", "--g", "power:0.4,1", "--in", one,
             "--quantile", "1"});
    CHECK(r.status == 2);
    CHECK(r.err.find("InvalidWeight") != std::string::npos);

    r = cli({"fit", "--gamma1", "3", "--in", (dir / "nope.csv").string()});
    CHECK(r.status == 2);

    r = cli({"frobnicate"});
    CHECK(r.status == 2);
    r = cli({"simulate", "--gamma", "1,0", "--M", "3"});
    CHECK(r.status == 2);
    CHECK(r.err.find("InvalidParams") != std::string::npos);
    r = cli({"--help"});
    CHECK(r.status == 0);

    const std::string bad_config = (dir / "bad.toml").string();
    write_text_file(bad_config, "[fit]\ngamma1 = 3\nunknown_key = 1\n");
    r = cli({"--config", bad_config, "fit", "--in", one});
    CHECK(r.status == 2);
}

TEST_CASE("command line output is reproducible and thread-count independent")
{
    const std::vector<std::string> d = {"quantiles", "--kind", "d", "--g", "power:0.75,0.5", "--q", "0.9",
                                        "--reps", "400", "--grid", "256", "--seed", "11"};
    auto with_threads = [&](const char* t) {
        auto args = d;
        args.insert(args.begin(), {"--threads", t});
        return cli(args);
    };
    const auto a = with_threads("1");
    const auto b = with_threads("4");
    const auto c = with_threads("1");
    REQUIRE(a.status == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);

    const fs::path dir = scratch_dir();
    const std::string sim = (dir / "golden.csv").string();
    REQUIRE(cli({"simulate", "--gamma", "2,1", "--M", "30", "--seed", "3", "--out", sim}).status == 0);
    const auto first = read_text_file(sim);
    REQUIRE(cli({"simulate", "--gamma", "2,1", "--M", "30", "--seed", "3", "--out", sim}).status == 0);
    CHECK(read_text_file(sim) == first);

    const std::vector<std::string> cov = {"coverage", "--mode", "exact", "--gamma", "2,1", "--M", "5", "--reps",
                                          "200", "--calib-reps", "500", "--seed", "4"};
    auto c1 = cov;
    c1.insert(c1.begin(), {"--threads", "1"});
    auto c4 = cov;
    c4.insert(c4.begin(), {"--threads", "4"});
    const auto r1 = cli(c1);
    const auto r4 = cli(c4);
    REQUIRE(r1.status == 0);
    CHECK(r1.out == r4.out);
}
