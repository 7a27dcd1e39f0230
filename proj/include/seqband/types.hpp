#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace seqband {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Load-sharing parameters (gamma_1, ..., gamma_r) of a GOS model.
/// gamma_j is the hazard multiplier active while exactly j-1 components have failed.
class LoadSharingParams {
public:
    LoadSharingParams() = default;
    explicit LoadSharingParams(std::vector<double> gammas, bool gamma1_fixed = false);

    std::size_t r() const noexcept { return gammas_.size(); }
    double operator[](std::size_t j) const { return gammas_[j]; }  // 0-based
    double gamma(std::size_t j) const { return gammas_.at(j - 1); }  // 1-based
    std::span<const double> values() const noexcept { return gammas_; }
    bool gamma1_fixed() const noexcept { return gamma1_fixed_; }
    double max() const;
    double min() const;

    /// Smallest pairwise gap among the first `count` parameters (infinity if count < 2).
    double min_gap(std::size_t count) const;

    /// alpha_j = gamma_j / (n - j + 1); entries with n - j + 1 <= 0 are NaN.
    std::vector<double> alphas(double n) const;

    bool operator==(const LoadSharingParams&) const = default;

private:
    std::vector<double> gammas_;
    bool gamma1_fixed_ = false;
};

/// M ordered failure-time vectors of length r, stored row-major.
class SampleSet {
public:
    SampleSet() = default;
    SampleSet(std::size_t rows, std::size_t cols, std::vector<double> times);

    std::size_t M() const noexcept { return rows_; }
    std::size_t r() const noexcept { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return times_[i * cols_ + j]; }
    std::span<const double> row(std::size_t i) const
    {
        return std::span<const double>(times_).subspan(i * cols_, cols_);
    }
    std::span<const double> data() const noexcept { return times_; }

    /// Applies a strictly increasing map to every entry.
    template <class F>
    SampleSet transformed(F&& f) const
    {
        std::vector<double> out(times_.size());
        for (std::size_t k = 0; k < times_.size(); ++k) {
            out[k] = f(times_[k]);
        }
        return SampleSet(rows_, cols_, std::move(out));
    }

    bool operator==(const SampleSet&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> times_;
};

/// Right-continuous piecewise-constant function.
class StepFunction {
public:
    StepFunction() = default;
    StepFunction(std::vector<double> knots, std::vector<double> values, double initial_value = 0.0);

    double operator()(double t) const;
    /// Value just before t.
    double left_limit(double t) const;

    std::span<const double> knots() const noexcept { return knots_; }
    std::span<const double> values() const noexcept { return values_; }
    double initial_value() const noexcept { return initial_; }
    std::size_t size() const noexcept { return knots_.size(); }
    double final_value() const noexcept { return values_.empty() ? initial_ : values_.back(); }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
    double initial_ = 0.0;
};

struct McConfig {
    std::size_t n_reps = 10000;
    std::size_t grid_size = 4096;
    double z_max = 0.0;  // 0 selects the automatic horizon
    std::uint64_t seed = 20240601;
    double tolerance = 1e-10;
    std::size_t grid_refine = 0;  // extra points inserted per base grid interval

    void validate() const;
};

}  // namespace seqband
