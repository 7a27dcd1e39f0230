#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "seqband/error.hpp"

namespace seqband::quadrature {

struct Tolerance {
    double abs = 1e-12;
    double rel = 1e-12;
};

namespace detail {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

struct Piece {
    double est = 0.0;
    double err = 0.0;
    double l1 = 0.0;
};

template <class F>
Piece rule(F& f, double a, double b)
{
    Piece p;
    p.est = GK::integrate(f, a, b, 0, 0.0, &p.err, &p.l1);
    return p;
}

template <class F>
double adaptive(F& f, double a, double b, const Piece& piece, double abs_tol, int depth)
{
    // below the rounding floor further bisection cannot help
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * piece.l1;
    if (depth == 0 || piece.err <= abs_tol || piece.err <= floor) {
        return piece.est;
    }
    const double mid = 0.5 * (a + b);
    const auto left = rule(f, a, mid);
    const auto right = rule(f, mid, b);
    if (left.err + right.err >= piece.err) {
        // no progress from bisection: the estimate is noise-limited
        return left.est + right.est;
    }
    return adaptive(f, a, mid, left, 0.5 * abs_tol, depth - 1) + adaptive(f, mid, b, right, 0.5 * abs_tol, depth - 1);
}

}  // namespace detail

/// Adaptive 15-point Gauss-Kronrod on [a, b], split into `panels` equal panels.
/// The error budget per panel is max(abs, rel * |first estimate|), halved on each bisection.
template <class F>
double integrate(F&& f, double a, double b, Tolerance tol = {}, int panels = 1)
{
    if (!(b > a)) {
        return 0.0;
    }
    panels = std::max(panels, 1);
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double hi = p + 1 == panels ? b : lo + width;
        const auto piece = detail::rule(f, lo, hi);
        const double budget = std::max(tol.abs / panels, tol.rel * std::abs(piece.est));
        total += detail::adaptive(f, lo, hi, piece, budget, 20);
    }
    require(std::isfinite(total), ErrorCode::NumericalError, "non-finite quadrature result");
    return total;
}

}  // namespace seqband::quadrature
