#include "seqband/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqband/error.hpp"

namespace seqband {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidBaseline: return "InvalidBaseline";
    case ErrorCode::InvalidSample: return "InvalidSample";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::EmptyRequest: return "EmptyRequest";
    case ErrorCode::EmptyVector: return "EmptyVector";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NearDegenerate: return "NearDegenerate";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::NonIdentifiable: return "NonIdentifiable";
    case ErrorCode::CalibrationMismatch: return "CalibrationMismatch";
    case ErrorCode::NonMonotoneRow: return "NonMonotoneRow";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::NotConverged: return "NotConverged";
    }
    return "Unknown";
}

LoadSharingParams::LoadSharingParams(std::vector<double> gammas, bool gamma1_fixed)
    : gammas_(std::move(gammas)), gamma1_fixed_(gamma1_fixed)
{
    require(!gammas_.empty(), ErrorCode::InvalidParams, "load-sharing vector must have r >= 1");
    for (std::size_t j = 0; j < gammas_.size(); ++j) {
        require(std::isfinite(gammas_[j]) && gammas_[j] > 0.0, ErrorCode::InvalidParams,
                "gamma_" + std::to_string(j + 1) + " must be finite and positive");
    }
}

double LoadSharingParams::max() const
{
    return *std::max_element(gammas_.begin(), gammas_.end());
}

double LoadSharingParams::min() const
{
    return *std::min_element(gammas_.begin(), gammas_.end());
}

double LoadSharingParams::min_gap(std::size_t count) const
{
    count = std::min(count, gammas_.size());
    double gap = kInfinity;
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t k = i + 1; k < count; ++k) {
            gap = std::min(gap, std::abs(gammas_[i] - gammas_[k]));
        }
    }
    return gap;
}

std::vector<double> LoadSharingParams::alphas(double n) const
{
    std::vector<double> out(gammas_.size());
    for (std::size_t j = 0; j < gammas_.size(); ++j) {
        const double remaining = n - static_cast<double>(j);
        out[j] = remaining > 0.0 ? gammas_[j] / remaining : std::nan("");
    }
    return out;
}

SampleSet::SampleSet(std::size_t rows, std::size_t cols, std::vector<double> times)
    : rows_(rows), cols_(cols), times_(std::move(times))
{
    require(rows_ > 0, ErrorCode::EmptyRequest, "sample set has no systems (M = 0)");
    require(cols_ > 0, ErrorCode::InvalidSample, "sample rows must have r >= 1 entries");
    require(times_.size() == rows_ * cols_, ErrorCode::InvalidSample, "sample storage does not match M x r");
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            const double x = times_[i * cols_ + j];
            require(std::isfinite(x) && x > 0.0, ErrorCode::InvalidSample,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) + ") must be finite and positive");
            if (j > 0) {
                require(x > times_[i * cols_ + j - 1], ErrorCode::InvalidSample,
                        "row " + std::to_string(i) + " is not strictly increasing");
            }
        }
    }
}

StepFunction::StepFunction(std::vector<double> knots, std::vector<double> values, double initial_value)
    : knots_(std::move(knots)), values_(std::move(values)), initial_(initial_value)
{
    require(knots_.size() == values_.size(), ErrorCode::InvalidParams, "step function knots/values size mismatch");
    for (std::size_t k = 1; k < knots_.size(); ++k) {
        require(knots_[k] > knots_[k - 1], ErrorCode::InvalidParams, "step function knots must be strictly increasing");
    }
}

double StepFunction::operator()(double t) const
{
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    if (it == knots_.begin()) {
        return initial_;
    }
    return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepFunction::left_limit(double t) const
{
    const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
    if (it == knots_.begin()) {
        return initial_;
    }
    return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

void McConfig::validate() const
{
    require(n_reps >= 1, ErrorCode::InvalidConfig, "n_reps must be >= 1");
    require(grid_size >= 2, ErrorCode::InvalidConfig, "grid_size must be >= 2");
    require(std::isfinite(z_max) && z_max >= 0.0, ErrorCode::InvalidConfig,
            "z_max must be positive (or 0 for the automatic horizon)");
    require(tolerance > 0.0, ErrorCode::InvalidConfig, "tolerance must be positive");
}

}  // namespace seqband
