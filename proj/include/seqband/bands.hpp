#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqband/estimators.hpp"
#include "seqband/quantile.hpp"
#include "seqband/theory.hpp"
#include "seqband/types.hpp"
#include "seqband/weight.hpp"

namespace seqband {

enum class BandKind { exact_known_gamma, asymptotic_known_gamma, asymptotic_unknown_gamma, quantile_function };

const char* to_string(BandKind kind);

inline constexpr double kUpperClip = 1.0 - 1e-12;

/// Envelope pair. For cdf bands lower/upper are functions of x sharing the knots of fhat.
/// For the quantile-function band they are functions of u in (0, p] on `u_grid`,
/// and upper may be +inf where the cross-section is unbounded.
struct Band {
    BandKind kind = BandKind::exact_known_gamma;
    StepFunction lower;
    StepFunction upper;
    StepFunction fhat;
    double quantile_used = 0.0;
    double level = 0.0;
    double horizon = kInfinity;  // R for asymptotic cdf bands, p for the quantile band
    LoadSharingParams gamma;     // gamma used (gamma-hat for the unknown-gamma band)
    std::size_t M = 0;
    std::string weight;          // g or h description
    std::uint64_t seed = 0;
    std::vector<double> u_grid;
};

Band exact_band(const SampleSet& data, const LoadSharingParams& params, double q, double c_quantile,
                const KsWeight& h = KsWeight::unit(), EstimatorFlavor flavor = EstimatorFlavor::product);

/// Checks that the calibration was produced for the same gamma, M, H and estimator flavor.
Band exact_band(const SampleSet& data, const LoadSharingParams& params, const QuantileEstimate& c_quantile,
                const KsWeight& h = KsWeight::unit(), EstimatorFlavor flavor = EstimatorFlavor::product);

Band asymptotic_band_known(const SampleSet& data, const LoadSharingParams& params, double q, const WeightFn& g,
                           double d_quantile, double horizon = kInfinity);

struct UnknownBandResult {
    Band band;
    GammaEstimate fit;
    QuantileEstimate e_quantile;
};

/// Fit gamma (t_star = inf), plug in, calibrate e at gamma-hat and build the band.
UnknownBandResult asymptotic_band_unknown(const SampleSet& data, double gamma1, double q, const WeightFn& g,
                                          const McConfig& config, double horizon = kInfinity,
                                          PsiMeasure measure = PsiMeasure::hazard,
                                          Execution exec = Execution::parallel);

/// Envelope half-width factor * g(v(Fhat)) * (1 - Fhat) / sqrt(M) around Fhat = 1 - exp(-Lambda-hat).
Band asymptotic_envelope(const BaselineEstimate& estimate, const PopulationQuantities& pq, const WeightFn& g,
                         double factor);

/// Band for F^{-1} on a uniform u-grid of `grid_points` points in (0, p].
Band quantile_band(const SampleSet& data, const LoadSharingParams& params, double q, const WeightFn& g, double p,
                   double d_quantile, std::size_t grid_points = 512);

/// Raw cross-section {z : |Fhat(z) - u| <= slack} as [lo, hi]; lo == hi marks a jump across the slab.
struct CrossSection {
    double lo;
    double hi;
};
CrossSection quantile_cross_section(const StepFunction& fhat, double u, double slack);

/// Graph of a continuous increasing cdf F on (0, R] inside a cdf band: exact check on every
/// step interval plus a 200-point grid.
bool band_contains_cdf(const Band& band, const std::function<double(double)>& cdf, double R);

/// F^{-1}(u) inside the quantile band at every grid point.
bool band_contains_quantile(const Band& band, const std::function<double(double)>& quantile);

}  // namespace seqband
