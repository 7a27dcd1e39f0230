#pragma once

#include <functional>
#include <string>
#include <vector>

namespace seqband {

/// Baseline cdf F with support [0, inf). Sampling only needs the map from the
/// cumulative-hazard scale z = -log(1 - F(x)) back to x.
class Baseline {
public:
    enum class Kind { exponential, uniform, weibull, tabulated, custom };

    static Baseline exponential(double rate = 1.0);
    static Baseline uniform();
    static Baseline weibull(double shape, double scale = 1.0);
    /// Piecewise-linear quantile map through (probs[k], quantiles[k]); both strictly increasing.
    static Baseline tabulated(std::vector<double> probs, std::vector<double> quantiles);
    /// Arbitrary quantile map on (0,1); monotonicity is checked on a probe grid.
    static Baseline custom(std::function<double(double)> quantile, std::string label = "custom");
    /// Parses "exp[:rate]", "uniform", "weibull:shape[,scale]".
    static Baseline parse(const std::string& text);

    Kind kind() const noexcept { return kind_; }
    std::string describe() const;

    double quantile(double p) const;
    double cdf(double x) const;
    /// x with -log(1 - F(x)) = z.
    double from_hazard(double z) const;

private:
    Kind kind_ = Kind::exponential;
    double a_ = 1.0;
    double b_ = 1.0;
    std::vector<double> probs_;
    std::vector<double> quantiles_;
    std::function<double(double)> custom_;
    std::string label_;
};

}  // namespace seqband
