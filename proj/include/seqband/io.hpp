#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seqband/bands.hpp"
#include "seqband/estimators.hpp"
#include "seqband/quantile.hpp"
#include "seqband/types.hpp"

namespace seqband {

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

/// "1,2.5,3" -> {1, 2.5, 3}; whitespace around entries is ignored.
std::vector<double> parse_number_list(std::string_view text);

/// CSV with one system per row. A first row that is not all numeric is taken as a header;
/// blank lines and lines starting with '#' are skipped. Row indices in errors are 0-based
/// and count data rows only.
SampleSet parse_samples_csv(std::string_view text);
SampleSet ingest_csv(const std::filesystem::path& path);

void write_samples_csv(std::ostream& out, const SampleSet& data);

/// {gamma_hat, alpha_hat, score_norm, iterations, t_star, converged}; alpha uses n = gamma_1.
nlohmann::json fit_to_json(const GammaEstimate& fit);

nlohmann::json band_metadata(const Band& band);
/// Rows x, lower, upper, fhat at every knot (u, z_lo, z_hi, fhat(z_lo) for the quantile band),
/// preceded by '#' metadata lines.
void write_band_csv(std::ostream& out, const Band& band);
nlohmann::json band_to_json(const Band& band);
/// Standalone SVG: step polylines for the estimate and both envelopes.
std::string band_to_svg(const Band& band);

nlohmann::json quantile_to_json(const QuantileEstimate& est);
QuantileEstimate quantile_from_json(const nlohmann::json& j);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// On-disk calibration cache: one JSON file per key, named by the FNV-1a hash of the key.
/// A hit requires the stored key to equal the requested one exactly.
class CalibrationCache {
public:
    explicit CalibrationCache(std::filesystem::path dir);

    /// Cache in $SEQBAND_CACHE_DIR, if set.
    static std::optional<CalibrationCache> from_env();

    std::optional<QuantileEstimate> lookup(const nlohmann::json& key) const;
    void store(const nlohmann::json& key, const QuantileEstimate& est) const;
    std::filesystem::path path_for(const nlohmann::json& key) const;

private:
    std::filesystem::path dir_;
};

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace seqband
