#pragma once

#include <span>
#include <string>
#include <vector>

#include "bsv/frames.hpp"
#include "bsv/photon_stats.hpp"

namespace bsv {

/// Result of a nonlinear least-squares fit: named parameters with linearized
/// standard errors. `converged` reflects the relative-step stopping rule;
/// `low_significance` marks fits whose amplitude is consistent with zero.
struct FitResult {
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<double> errors;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    bool low_significance = false;

    double value(const std::string& name) const;
    double error(const std::string& name) const;
};

/// Fit I = I0 sinh^2(kappa sqrt(P)) to (power, intensity) points by damped
/// Gauss-Newton with analytic Jacobian, initialized from the log-linearized
/// high-power tail. Needs >= 3 points with distinct powers.
FitResult fit_gain_curve(std::span<const double> power, std::span<const double> intensity);

/// Parametric gain G = kappa sqrt(P).
double gain_from_power(double kappa, double power);

enum class FeatureKind { Peak, Dip };

/// Fit baseline + amplitude * exp(-4 ln2 (x - center)^2 / fwhm^2) to the
/// samples inside `window_nm` around the feature extremum. Dips are fitted on
/// the negated curve so one code path serves both kinds; the reported
/// amplitude carries the feature sign. Parameters: baseline, amplitude,
/// center, fwhm.
FitResult fit_gaussian_feature(std::span<const double> x, std::span<const double> y,
                               FeatureKind kind, double window_nm);

/// Per-bin empirical statistics with jackknife-over-frames standard errors.
struct ScanEstimateRow {
    double lambda_i_nm = 0.0;
    double nrf = 0.0;
    double nrf_se = 0.0;
    double covariance = 0.0;
    double covariance_se = 0.0;
    double mean_s = 0.0;
    double mean_i = 0.0;
    bool artifact = false;
};

struct ScanEstimate {
    double lambda_s_nm = 0.0;
    std::uint64_t frames_used = 0;
    std::vector<ScanEstimateRow> rows;
};

/// Difference-intensity variance between a fixed bin and every other bin,
/// estimated over frames (unbiased sample moments, NRF normalization).
ScanEstimate empirical_variance_scan(const FrameSet& frames, const SpectralGrid& grid,
                                     std::size_t fixed_bin);

struct EmpiricalCovarianceMap {
    SpectralGrid grid;
    std::vector<double> values;  // bins x bins unbiased sample covariance
    double normalization = 1.0;

    double at(std::size_t i, std::size_t j) const { return values[i * grid.size() + j]; }
};

/// Unbiased sample covariance of the counts for every bin pair; symmetric by
/// construction, optionally normalized to the maximum entry.
EmpiricalCovarianceMap empirical_covariance_map(const FrameSet& frames,
                                                const SpectralGrid& grid,
                                                bool normalize_to_max = false);

}  // namespace bsv
