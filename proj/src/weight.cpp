#include "seqband/weight.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "seqband/error.hpp"
#include "seqband/io.hpp"

namespace seqband {

WeightFn WeightFn::power_plus(double a, double b)
{
    require(std::isfinite(a) && a > 0.5, ErrorCode::InvalidWeight, "power weight needs a > 1/2");
    require(std::isfinite(b) && b > 0.0, ErrorCode::InvalidWeight, "power weight needs b > 0");
    return WeightFn(Form::power_plus, a, b);
}

WeightFn WeightFn::sqrt_log_plus(double c)
{
    require(std::isfinite(c) && c > 0.0, ErrorCode::InvalidWeight, "sqrtlog weight needs c > 0");
    return WeightFn(Form::sqrt_log_plus, c, 0.0);
}

WeightFn WeightFn::parse(const std::string& text)
{
    const auto colon = text.find(':');
    require(colon != std::string::npos, ErrorCode::InvalidWeight,
            "weight '" + text + "' must be power:a,b or sqrtlog:c");
    const std::string name = text.substr(0, colon);
    std::vector<double> args;
    try {
        args = parse_number_list(text.substr(colon + 1));
    } catch (const Error&) {
        fail(ErrorCode::InvalidWeight, "weight '" + text + "' has malformed numbers");
    }
    if (name == "power") {
        require(args.size() == 2, ErrorCode::InvalidWeight, "power weight takes two numbers: power:a,b");
        return power_plus(args[0], args[1]);
    }
    if (name == "sqrtlog") {
        require(args.size() == 1, ErrorCode::InvalidWeight, "sqrtlog weight takes one number: sqrtlog:c");
        return sqrt_log_plus(args[0]);
    }
    fail(ErrorCode::InvalidWeight, "unknown weight family '" + name + "'");
}

double WeightFn::operator()(double x) const
{
    if (form_ == Form::power_plus) {
        return std::pow(x, a_) + b_;
    }
    return std::sqrt(x * std::log1p(x)) + a_;
}

std::string WeightFn::describe() const
{
    if (form_ == Form::power_plus) {
        return "power:" + format_double(a_) + "," + format_double(b_);
    }
    return "sqrtlog:" + format_double(a_);
}

}  // namespace seqband
