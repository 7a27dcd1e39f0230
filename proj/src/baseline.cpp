#include "seqband/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "seqband/error.hpp"

namespace seqband {

Baseline Baseline::exponential(double rate)
{
    require(std::isfinite(rate) && rate > 0.0, ErrorCode::InvalidBaseline, "exponential rate must be positive");
    Baseline b;
    b.kind_ = Kind::exponential;
    b.a_ = rate;
    return b;
}

Baseline Baseline::uniform()
{
    Baseline b;
    b.kind_ = Kind::uniform;
    return b;
}

Baseline Baseline::weibull(double shape, double scale)
{
    require(std::isfinite(shape) && shape > 0.0 && std::isfinite(scale) && scale > 0.0,
            ErrorCode::InvalidBaseline, "weibull shape and scale must be positive");
    Baseline b;
    b.kind_ = Kind::weibull;
    b.a_ = shape;
    b.b_ = scale;
    return b;
}

Baseline Baseline::tabulated(std::vector<double> probs, std::vector<double> quantiles)
{
    require(probs.size() == quantiles.size() && probs.size() >= 2, ErrorCode::InvalidBaseline,
            "tabulated quantile map needs matching probability/quantile vectors of length >= 2");
    require(probs.front() == 0.0 && probs.back() == 1.0, ErrorCode::InvalidBaseline,
            "tabulated quantile map must cover probabilities [0, 1]");
    require(quantiles.front() >= 0.0, ErrorCode::InvalidBaseline, "baseline support must lie in [0, inf)");
    for (std::size_t k = 1; k < probs.size(); ++k) {
        require(probs[k] > probs[k - 1], ErrorCode::InvalidBaseline, "tabulated probabilities must be strictly increasing");
        require(quantiles[k] > quantiles[k - 1], ErrorCode::InvalidBaseline,
                "tabulated quantile map is not strictly increasing at entry " + std::to_string(k));
    }
    Baseline b;
    b.kind_ = Kind::tabulated;
    b.probs_ = std::move(probs);
    b.quantiles_ = std::move(quantiles);
    return b;
}

Baseline Baseline::custom(std::function<double(double)> quantile, std::string label)
{
    require(static_cast<bool>(quantile), ErrorCode::InvalidBaseline, "custom quantile map is empty");
    constexpr int probes = 1024;
    double previous = -1.0;
    for (int k = 1; k < probes; ++k) {
        const double p = static_cast<double>(k) / probes;
        const double x = quantile(p);
        require(std::isfinite(x) && x >= 0.0, ErrorCode::InvalidBaseline, "custom quantile map left [0, inf) at p = " + std::to_string(p));
        require(x > previous, ErrorCode::InvalidBaseline,
                "custom quantile map is not strictly increasing near p = " + std::to_string(p));
        previous = x;
    }
    Baseline b;
    b.kind_ = Kind::custom;
    b.custom_ = std::move(quantile);
    b.label_ = std::move(label);
    return b;
}

Baseline Baseline::parse(const std::string& text)
{
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                args.push_back(std::stod(item));
            } catch (const std::exception&) {
                fail(ErrorCode::InvalidBaseline, "cannot parse baseline argument '" + item + "'");
            }
        }
    }
    if (name == "exp" || name == "exponential") {
        require(args.size() <= 1, ErrorCode::InvalidBaseline, "exp takes at most one argument (rate)");
        return exponential(args.empty() ? 1.0 : args[0]);
    }
    if (name == "uniform") {
        require(args.empty(), ErrorCode::InvalidBaseline, "uniform takes no arguments");
        return uniform();
    }
    if (name == "weibull") {
        require(args.size() == 1 || args.size() == 2, ErrorCode::InvalidBaseline, "weibull takes shape[,scale]");
        return weibull(args[0], args.size() == 2 ? args[1] : 1.0);
    }
    fail(ErrorCode::InvalidBaseline, "unknown baseline '" + text + "'");
}

std::string Baseline::describe() const
{
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case Kind::exponential: os << "exp:" << a_; break;
    case Kind::uniform: os << "uniform"; break;
    case Kind::weibull: os << "weibull:" << a_ << "," << b_; break;
    case Kind::tabulated: os << "tabulated[" << probs_.size() << "]"; break;
    case Kind::custom: os << label_; break;
    }
    return os.str();
}

double Baseline::quantile(double p) const
{
    require(p >= 0.0 && p <= 1.0, ErrorCode::DomainError, "quantile argument must lie in [0, 1]");
    switch (kind_) {
    case Kind::exponential: return -std::log1p(-p) / a_;
    case Kind::uniform: return p;
    case Kind::weibull: return b_ * std::pow(-std::log1p(-p), 1.0 / a_);
    case Kind::tabulated: {
        const auto it = std::upper_bound(probs_.begin(), probs_.end(), p);
        if (it == probs_.end()) {
            return quantiles_.back();
        }
        const auto k = static_cast<std::size_t>(it - probs_.begin());
        const double w = (p - probs_[k - 1]) / (probs_[k] - probs_[k - 1]);
        return quantiles_[k - 1] + w * (quantiles_[k] - quantiles_[k - 1]);
    }
    case Kind::custom: return custom_(p);
    }
    return 0.0;
}

double Baseline::cdf(double x) const
{
    if (x <= 0.0) {
        return 0.0;
    }
    switch (kind_) {
    case Kind::exponential: return -std::expm1(-a_ * x);
    case Kind::uniform: return std::min(x, 1.0);
    case Kind::weibull: return -std::expm1(-std::pow(x / b_, a_));
    case Kind::tabulated: {
        const auto it = std::upper_bound(quantiles_.begin(), quantiles_.end(), x);
        if (it == quantiles_.begin()) {
            return 0.0;
        }
        if (it == quantiles_.end()) {
            return 1.0;
        }
        const auto k = static_cast<std::size_t>(it - quantiles_.begin());
        const double w = (x - quantiles_[k - 1]) / (quantiles_[k] - quantiles_[k - 1]);
        return probs_[k - 1] + w * (probs_[k] - probs_[k - 1]);
    }
    case Kind::custom: {
        double lo = 0.0;
        double hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
            const double mid = 0.5 * (lo + hi);
            (custom_(mid) <= x ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
    }
    return 0.0;
}

double Baseline::from_hazard(double z) const
{
    switch (kind_) {
    case Kind::exponential: return z / a_;
    case Kind::uniform: return -std::expm1(-z);
    case Kind::weibull: return b_ * std::pow(z, 1.0 / a_);
    case Kind::tabulated:
    case Kind::custom: return quantile(-std::expm1(-z));
    }
    return 0.0;
}

}  // namespace seqband
