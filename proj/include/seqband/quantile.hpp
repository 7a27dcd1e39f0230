#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace seqband {

/// Monte Carlo quantile with its calibration context.
struct QuantileEstimate {
    double value = 0.0;
    double level = 0.0;
    std::size_t n_reps = 0;
    double std_error = 0.0;
    nlohmann::json metadata;
};

/// Type-1 empirical quantile of `draws` with the binomial (order-statistic) standard error.
/// Sorts `draws` in place.
QuantileEstimate summarize_draws(std::vector<double>& draws, double q, nlohmann::json metadata);

/// Which cdf estimator a statistic or band is built from.
enum class EstimatorFlavor { product, exponential };

const char* to_string(EstimatorFlavor f);

/// Weighting h in H(y, z) = h(y) |y - z|; h must be positive and continuous on [0, 1].
struct KsWeight {
    std::string name = "unit";
    std::function<double(double)> h;

    static KsWeight unit();
    double operator()(double y) const { return h ? h(y) : 1.0; }
};

}  // namespace seqband
