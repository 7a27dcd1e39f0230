#pragma once

#include <string>

namespace seqband {

/// Weight g for the asymptotic bands: g(x) = x^a + b (a > 1/2, b > 0) or
/// g(x) = sqrt(x log(x + 1)) + c (c > 0). Both grow without bound, so both are
/// admissible for the unknown-gamma band as well.
class WeightFn {
public:
    enum class Form { power_plus, sqrt_log_plus };

    static WeightFn power_plus(double a, double b);
    static WeightFn sqrt_log_plus(double c);
    /// "power:a,b" or "sqrtlog:c".
    static WeightFn parse(const std::string& text);

    Form form() const noexcept { return form_; }
    bool for_unknown_gamma() const noexcept { return true; }
    double operator()(double x) const;
    /// Lower bound of g on [0, inf), attained at 0.
    double floor() const noexcept { return form_ == Form::power_plus ? b_ : a_; }
    /// Canonical text form; parse(describe()) reproduces the weight.
    std::string describe() const;

    bool operator==(const WeightFn&) const = default;

private:
    WeightFn(Form form, double a, double b) : form_(form), a_(a), b_(b) {}

    Form form_;
    double a_;
    double b_;
};

}  // namespace seqband
