#include "seqband/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "seqband/error.hpp"

namespace seqband {

std::string format_double(double x)
{
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::optional<double> to_number(std::string_view s)
{
    s = trim(s);
    if (s.empty()) {
        return std::nullopt;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

}  // namespace

std::vector<double> parse_number_list(std::string_view text)
{
    std::vector<double> out;
    for (auto field : split(text, ',')) {
        const auto value = to_number(field);
        require(value.has_value(), ErrorCode::InvalidConfig,
                "'" + std::string(trim(field)) + "' is not a number in list '" + std::string(text) + "'");
        out.push_back(*value);
    }
    return out;
}

SampleSet parse_samples_csv(std::string_view text)
{
    std::vector<double> times;
    std::size_t cols = 0;
    std::size_t row = 0;
    bool first_line = true;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        const std::string_view line = trim(text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos));
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto fields = split(line, ',');
        std::vector<std::optional<double>> parsed;
        parsed.reserve(fields.size());
        bool all_numeric = true;
        for (auto f : fields) {
            parsed.push_back(to_number(f));
            all_numeric = all_numeric && parsed.back().has_value();
        }
        if (first_line) {
            first_line = false;
            if (!all_numeric) {
                continue;  // header
            }
        }
        const std::string where = "row " + std::to_string(row);
        if (cols == 0) {
            cols = fields.size();
        }
        require(fields.size() == cols, ErrorCode::RaggedRow,
                where + " has " + std::to_string(fields.size()) + " fields, expected " + std::to_string(cols));
        for (std::size_t j = 0; j < cols; ++j) {
            require(parsed[j].has_value(), ErrorCode::InvalidSample,
                    where + ", column " + std::to_string(j) + ": '" + std::string(trim(fields[j])) +
                        "' is not a number");
            const double x = *parsed[j];
            require(std::isfinite(x) && x > 0.0, ErrorCode::NonPositiveEntry,
                    where + ", column " + std::to_string(j) + ": entry " + format_double(x) +
                        " must be finite and positive");
            require(j == 0 || x > *parsed[j - 1], ErrorCode::NonMonotoneRow,
                    where + " is not strictly increasing at column " + std::to_string(j));
            times.push_back(x);
        }
        ++row;
    }
    require(row > 0, ErrorCode::EmptyFile, "no data rows");
    return SampleSet(row, cols, std::move(times));
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << text;
    require(out.good(), ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

SampleSet ingest_csv(const std::filesystem::path& path)
{
    return parse_samples_csv(read_text_file(path));
}

void write_samples_csv(std::ostream& out, const SampleSet& data)
{
    for (std::size_t i = 0; i < data.M(); ++i) {
        for (std::size_t j = 0; j < data.r(); ++j) {
            out << (j ? "," : "") << format_double(data(i, j));
        }
        out << '\n';
    }
}

namespace {

nlohmann::json number_or_null(double x)
{
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

std::vector<double> to_vector(std::span<const double> s)
{
    return {s.begin(), s.end()};
}

}  // namespace

nlohmann::json fit_to_json(const GammaEstimate& fit)
{
    const auto gamma = to_vector(fit.gamma_hat.values());
    nlohmann::json alpha = nlohmann::json::array();
    for (double a : fit.gamma_hat.alphas(gamma.front())) {
        alpha.push_back(number_or_null(a));
    }
    return {{"gamma_hat", gamma},           {"alpha_hat", alpha},
            {"score_norm", fit.score_norm}, {"iterations", fit.iterations},
            {"t_star", number_or_null(fit.t_star)}, {"converged", fit.converged}};
}

nlohmann::json band_metadata(const Band& band)
{
    return {{"kind", to_string(band.kind)},
            {"q", band.level},
            {"quantile_used", band.quantile_used},
            {"gamma", to_vector(band.gamma.values())},
            {"M", band.M},
            {"g", band.weight},
            {"horizon", number_or_null(band.horizon)},
            {"seed", band.seed}};
}

void write_band_csv(std::ostream& out, const Band& band)
{
    const auto meta = band_metadata(band);
    for (const auto& [key, value] : meta.items()) {
        out << "# " << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
    }
    const auto knots = band.lower.knots();
    const auto lower = band.lower.values();
    const auto upper = band.upper.values();
    if (band.kind == BandKind::quantile_function) {
        out << "u,z_lower,z_upper,fhat_at_z_lower\n";
        for (std::size_t k = 0; k < knots.size(); ++k) {
            out << format_double(knots[k]) << ',' << format_double(lower[k]) << ',' << format_double(upper[k]) << ','
                << format_double(std::isfinite(lower[k]) ? band.fhat(lower[k]) : 1.0) << '\n';
        }
        return;
    }
    out << "x,lower,upper,fhat\n";
    out << "0," << format_double(band.lower.initial_value()) << ',' << format_double(band.upper.initial_value())
        << ',' << format_double(band.fhat.initial_value()) << '\n';
    for (std::size_t k = 0; k < knots.size(); ++k) {
        out << format_double(knots[k]) << ',' << format_double(lower[k]) << ',' << format_double(upper[k]) << ','
            << format_double(band.fhat.values()[k]) << '\n';
    }
}

nlohmann::json band_to_json(const Band& band)
{
    nlohmann::json j = band_metadata(band);
    j["x"] = to_vector(band.lower.knots());
    nlohmann::json lower = nlohmann::json::array();
    nlohmann::json upper = nlohmann::json::array();
    for (double v : band.lower.values()) {
        lower.push_back(number_or_null(v));
    }
    for (double v : band.upper.values()) {
        upper.push_back(number_or_null(v));
    }
    j["lower"] = lower;
    j["upper"] = upper;
    if (band.kind == BandKind::quantile_function) {
        j["fhat_knots"] = to_vector(band.fhat.knots());
        j["fhat_values"] = to_vector(band.fhat.values());
    } else {
        j["fhat"] = to_vector(band.fhat.values());
        j["initial"] = {{"lower", band.lower.initial_value()}, {"upper", band.upper.initial_value()}};
    }
    return j;
}

namespace {

struct Plot {
    double x_max;
    double y_max;
    static constexpr double width = 640;
    static constexpr double height = 400;
    static constexpr double margin = 50;

    double px(double x) const { return margin + (width - 2 * margin) * x / x_max; }
    double py(double y) const { return height - margin - (height - 2 * margin) * std::min(y, y_max) / y_max; }
};

std::string step_polyline(const Plot& plot, std::span<const double> knots, std::span<const double> values,
                          double initial, double x_end, const char* colour, const char* dash)
{
    std::ostringstream s;
    s << std::setprecision(6);
    s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"";
    if (*dash) {
        s << " stroke-dasharray=\"" << dash << '"';
    }
    s << " points=\"";
    double y = initial;
    s << plot.px(0) << ',' << plot.py(y);
    for (std::size_t k = 0; k < knots.size() && knots[k] <= x_end; ++k) {
        s << ' ' << plot.px(knots[k]) << ',' << plot.py(y);
        y = values[k];
        s << ' ' << plot.px(knots[k]) << ',' << plot.py(y);
    }
    s << ' ' << plot.px(x_end) << ',' << plot.py(y) << "\"/>\n";
    return s.str();
}

}  // namespace

std::string band_to_svg(const Band& band)
{
    const bool quantile = band.kind == BandKind::quantile_function;
    const auto knots = band.lower.knots();
    double x_end = 1.0;
    double y_max = 1.0;
    if (quantile) {
        x_end = band.horizon;
        y_max = 0.0;
        for (double v : band.upper.values()) {
            if (std::isfinite(v)) {
                y_max = std::max(y_max, v);
            }
        }
        for (double v : band.lower.values()) {
            if (std::isfinite(v)) {
                y_max = std::max(y_max, v);
            }
        }
        y_max = y_max > 0.0 ? 1.1 * y_max : 1.0;
    } else if (!knots.empty()) {
        x_end = std::isfinite(band.horizon) ? std::min(band.horizon, knots.back()) : knots.back();
        x_end *= 1.05;
    }
    const Plot plot{x_end, y_max};
    std::ostringstream s;
    s << std::setprecision(6);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Plot::width << "\" height=\"" << Plot::height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<line x1=\"" << plot.px(0) << "\" y1=\"" << plot.py(0) << "\" x2=\"" << plot.px(x_end) << "\" y2=\""
      << plot.py(0) << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << plot.px(0) << "\" y1=\"" << plot.py(0) << "\" x2=\"" << plot.px(0) << "\" y2=\""
      << plot.py(y_max) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double x = x_end * i / 4.0;
        const double y = y_max * i / 4.0;
        s << "<text x=\"" << plot.px(x) << "\" y=\"" << plot.py(0) + 16 << "\" text-anchor=\"middle\">"
          << format_double(std::round(x * 1000) / 1000) << "</text>\n";
        s << "<text x=\"" << plot.px(0) - 6 << "\" y=\"" << plot.py(y) + 4 << "\" text-anchor=\"end\">"
          << format_double(std::round(y * 1000) / 1000) << "</text>\n";
    }
    if (quantile) {
        // z-envelopes as functions of u; the estimate drawn as its inverse, i.e. knots against values
        s << step_polyline(plot, knots, band.lower.values(), band.lower.initial_value(), x_end, "#1f5fa8", "");
        s << step_polyline(plot, knots, band.upper.values(), band.upper.initial_value(), x_end, "#1f5fa8", "");
    } else {
        s << step_polyline(plot, knots, band.lower.values(), band.lower.initial_value(), x_end, "#1f5fa8", "4,3");
        s << step_polyline(plot, knots, band.upper.values(), band.upper.initial_value(), x_end, "#1f5fa8", "4,3");
        s << step_polyline(plot, band.fhat.knots(), band.fhat.values(), band.fhat.initial_value(), x_end, "black",
                           "");
    }
    std::string gamma;
    for (double g : band.gamma.values()) {
        gamma += (gamma.empty() ? "" : ", ") + format_double(std::round(g * 1000) / 1000);
    }
    s << "<text x=\"" << Plot::margin << "\" y=\"24\">" << to_string(band.kind) << "  q = " << band.level
      << "  M = " << band.M << "  gamma = (" << gamma << ")</text>\n";
    s << "</svg>\n";
    return s.str();
}

nlohmann::json quantile_to_json(const QuantileEstimate& est)
{
    return {{"value", est.value},
            {"level", est.level},
            {"n_reps", est.n_reps},
            {"std_error", est.std_error},
            {"metadata", est.metadata}};
}

QuantileEstimate quantile_from_json(const nlohmann::json& j)
{
    QuantileEstimate est;
    try {
        est.value = j.at("value").get<double>();
        est.level = j.at("level").get<double>();
        est.n_reps = j.at("n_reps").get<std::size_t>();
        est.std_error = j.at("std_error").get<double>();
        est.metadata = j.at("metadata");
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::IoError, std::string("malformed quantile record: ") + e.what());
    }
    return est;
}

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

CalibrationCache::CalibrationCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::optional<CalibrationCache> CalibrationCache::from_env()
{
    const char* dir = std::getenv("SEQBAND_CACHE_DIR");
    if (dir == nullptr || *dir == '\0') {
        return std::nullopt;
    }
    return CalibrationCache(dir);
}

std::filesystem::path CalibrationCache::path_for(const nlohmann::json& key) const
{
    std::ostringstream name;
    name << std::hex << std::setw(16) << std::setfill('0') << fnv1a(key.dump()) << ".json";
    return dir_ / name.str();
}

std::optional<QuantileEstimate> CalibrationCache::lookup(const nlohmann::json& key) const
{
    const auto path = path_for(key);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
        return std::nullopt;
    }
    nlohmann::json stored;
    try {
        stored = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    if (!stored.contains("key") || stored["key"] != key || !stored.contains("estimate")) {
        return std::nullopt;
    }
    return quantile_from_json(stored["estimate"]);
}

void CalibrationCache::store(const nlohmann::json& key, const QuantileEstimate& est) const
{
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    require(!ec, ErrorCode::IoError, "cannot create cache directory '" + dir_.string() + "'");
    const nlohmann::json record = {{"key", key}, {"estimate", quantile_to_json(est)}};
    write_text_file(path_for(key), record.dump(2) + "\n");
}

}  // namespace seqband
