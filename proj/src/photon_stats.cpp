#include "bsv/photon_stats.hpp"

#include <algorithm>
#include <cmath>

#include "bsv/constants.hpp"

namespace bsv {

namespace {

double gauss(double x, double fwhm) {
    const double u = x / fwhm;
    return std::exp(-kFourLn2 * u * u);
}

}  // namespace

void CorrelationKernel::validate() const {
    if (n_per_mode.size() != grid.size() || modes_per_bin.size() != grid.size())
        throw ConfigError("kernel: per-bin arrays must match the grid");
    if (!(fwhm_auto > 0) || !(fwhm_cross > 0))
        throw ConfigError("kernel: correlation widths must be > 0");
    if (!(pulses_per_frame >= 1)) throw ConfigError("kernel: pulses_per_frame must be >= 1");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(n_per_mode[i] > 0))
            throw ConfigError("kernel: photon number per mode must be > 0 on every bin "
                              "(restrict the grid to the central spectral lobe)");
        if (!(modes_per_bin[i] > 0)) throw ConfigError("kernel: mode count must be > 0");
    }
}

CorrelationKernel make_kernel(const SpectralGrid& grid, const GainPoint& gain,
                              const DetectionGeometry& geom, const PumpConfig& pump,
                              double pulses_per_frame, double fwhm_auto,
                              double fwhm_cross) {
    CorrelationKernel k{grid, gain.n_per_mode, {}, pulses_per_frame,
                        omega_from_nm(pump.wavelength_nm), fwhm_auto, fwhm_cross,
                        pump.degenerate_nm()};
    k.modes_per_bin.reserve(grid.size());
    for (double lam : grid.centers())
        k.modes_per_bin.push_back(mode_count(geom, lam, grid.bin_width(), geom.solid_angle_sr));
    k.validate();
    return k;
}

double g2_auto(const CorrelationKernel& k, double lambda_nm, double lambda_prime_nm) {
    const double d = omega_from_nm(lambda_nm) - omega_from_nm(lambda_prime_nm);
    return 1.0 + gauss(d, k.fwhm_auto);
}

double g2_cross(const CorrelationKernel& k, double lambda_s_nm, double lambda_i_nm) {
    const double ns = k.n_per_mode[k.grid.bin_of(lambda_s_nm)];
    const double ni = k.n_per_mode[k.grid.bin_of(lambda_i_nm)];
    const double nbar = std::sqrt(ns * ni);
    const double x = omega_from_nm(lambda_s_nm) + omega_from_nm(lambda_i_nm) - k.omega_pump;
    return 1.0 + (1.0 + 1.0 / nbar) * gauss(x, 2.0 * k.fwhm_cross);
}

double g2_degenerate(double n_per_mode) {
    if (!(n_per_mode > 0)) throw DomainError("g2_degenerate: photon number must be > 0");
    return 3.0 + 1.0 / n_per_mode;
}

double excess_correlation(const CorrelationKernel& k, double lambda_nm,
                          double lambda_prime_nm) {
    return (g2_auto(k, lambda_nm, lambda_prime_nm) - 1.0) +
           (g2_cross(k, lambda_nm, lambda_prime_nm) - 1.0);
}

double variance_difference(double ns, double ni, double g2ss, double g2ii, double g2si,
                           double m) {
    if (ns < 0 || ni < 0) throw DomainError("variance_difference: means must be >= 0");
    if (!(m >= 1.0)) throw DomainError("variance_difference: mode count must be >= 1");
    const double eps = 1e-9;
    if (g2ss < 1.0 - eps || g2ii < 1.0 - eps || g2si < 1.0 - eps)
        throw DomainError("variance_difference: g2 values must be >= 1");
    const double excess = (g2ss - 1.0) / m * ns * ns + (g2ii - 1.0) / m * ni * ni -
                          2.0 * (g2si - 1.0) / m * ns * ni;
    const double shot = ns + ni;
    const double var = excess + shot;
    const double scale = (g2ss - 1.0) / m * ns * ns + (g2ii - 1.0) / m * ni * ni + shot;
    if (var < -1e-9 * std::max(scale, 1.0))
        throw NumericError("variance_difference: negative variance; inputs violate "
                           "Cauchy-Schwarz");
    return std::max(var, 0.0);
}

namespace {

struct BinTerms {
    double mean;       // lossy photons per frame
    double modes;      // frame-integrated mode count
    double n;          // per-mode photon number (lossless)
};

BinTerms bin_terms(const CorrelationKernel& k, std::size_t b, double eta) {
    const double m = k.modes_per_bin[b] * k.pulses_per_frame;
    return {eta * m * k.n_per_mode[b], m, k.n_per_mode[b]};
}

}  // namespace

double covariance(const CorrelationKernel& k, double lambda_s_nm, double lambda_i_nm,
                  double eta) {
    apply_loss(1.0, eta, StatKind::Mean);  // validates eta
    const auto s = bin_terms(k, k.grid.bin_of(lambda_s_nm), eta);
    const auto i = bin_terms(k, k.grid.bin_of(lambda_i_nm), eta);
    const double m = std::sqrt(s.modes * i.modes);
    return excess_correlation(k, lambda_s_nm, lambda_i_nm) / m * s.mean * i.mean;
}

ScanCurve variance_scan(const CorrelationKernel& k, double lambda_s_nm, double eta,
                        ScanNormalization norm) {
    apply_loss(1.0, eta, StatKind::Mean);
    const std::size_t bs = k.grid.bin_of(lambda_s_nm);  // throws if off grid
    const double ls = k.grid.center(bs);
    const auto s = bin_terms(k, bs, eta);

    ScanCurve curve;
    curve.lambda_s_nm = ls;
    curve.normalization = norm;
    curve.rows.reserve(k.bins());

    const double g2ss = 1.0 + excess_correlation(k, ls, ls);
    for (std::size_t b = 0; b < k.bins(); ++b) {
        const double li = k.grid.center(b);
        ScanRow row;
        row.lambda_i_nm = li;
        const auto i = bin_terms(k, b, eta);
        row.mean_s = s.mean;
        row.mean_i = i.mean;
        if (b == bs) {
            // A pixel subtracted from itself: identically zero, an artifact
            // of the measurement rather than a correlation feature.
            row.artifact = true;
            row.var_diff = 0.0;
            row.nrf = 0.0;
            curve.rows.push_back(row);
            continue;
        }
        const double g2ii = 1.0 + excess_correlation(k, li, li);
        const double g2si = 1.0 + excess_correlation(k, ls, li);
        // Fold the per-bin mode numbers into the correlation factors so the
        // single-m contract of variance_difference applies bin by bin.
        const double eff_ss = 1.0 + (g2ss - 1.0) / s.modes;
        const double eff_ii = 1.0 + (g2ii - 1.0) / i.modes;
        const double eff_si = 1.0 + (g2si - 1.0) / std::sqrt(s.modes * i.modes);
        row.var_diff = variance_difference(s.mean, i.mean, eff_ss, eff_ii, eff_si, 1.0);
        const double denom = s.mean + i.mean;
        row.nrf = denom > 0 ? row.var_diff / denom : 0.0;
        curve.rows.push_back(row);
    }

    if (norm == ScanNormalization::MaxValue) {
        double vmax = 0.0;
        for (const auto& r : curve.rows)
            if (!r.artifact) vmax = std::max(vmax, r.var_diff);
        if (vmax > 0)
            for (auto& r : curve.rows) r.nrf = r.var_diff / vmax;
    }
    return curve;
}

CovarianceMapResult covariance_map(const CorrelationKernel& k, double eta,
                                   bool normalize_to_max) {
    apply_loss(1.0, eta, StatKind::Mean);
    const std::size_t n = k.bins();
    CovarianceMapResult map{k.grid, std::vector<double>(n * n, 0.0), 1.0};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double c = covariance(k, k.grid.center(i), k.grid.center(j), eta);
            map.values[i * n + j] = c;
            map.values[j * n + i] = c;
        }
    }
    if (normalize_to_max) {
        const double vmax = *std::max_element(map.values.begin(), map.values.end());
        if (vmax > 0) {
            for (auto& v : map.values) v /= vmax;
            map.normalization = vmax;
        }
    }
    return map;
}

double apply_loss(double value, double eta, StatKind kind) {
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("apply_loss: eta must be in (0, 1]");
    switch (kind) {
        case StatKind::Mean:
        case StatKind::ShotTerm:
            return eta * value;
        case StatKind::ExcessCorrelation:
            return value;
    }
    return value;
}

}  // namespace bsv
