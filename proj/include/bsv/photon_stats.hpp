#pragma once

#include <cstddef>
#include <vector>

#include "bsv/gain_model.hpp"
#include "bsv/grid.hpp"

namespace bsv {

/// Gaussian correlation kernels over a spectral grid, together with the
/// per-bin mode populations they act on. `fwhm_auto` is the FWHM (rad/s) of
/// the mutual-coherence kernel in (omega - omega'); `fwhm_cross` is the
/// per-arm FWHM of the conjugate-pair correlation, so the envelope in the
/// sum frequency (omega_s + omega_i - omega_p) carries FWHM 2 * fwhm_cross.
struct CorrelationKernel {
    SpectralGrid grid;
    std::vector<double> n_per_mode;     // photon number per mode, per bin
    std::vector<double> modes_per_bin;  // detected modes per pulse, per bin
    double pulses_per_frame = 1.0;
    double omega_pump = 0.0;   // rad/s
    double fwhm_auto = 0.0;    // rad/s
    double fwhm_cross = 0.0;   // rad/s
    double lambda_degenerate_nm = 0.0;

    void validate() const;
    std::size_t bins() const { return grid.size(); }
};

/// Assemble a kernel from the dispersion model: per-bin populations from the
/// gain point, per-bin mode counts from the detection geometry, kernel widths
/// in rad/s (pass omega_fwhm_from_nm(...) values for widths given in nm).
CorrelationKernel make_kernel(const SpectralGrid& grid, const GainPoint& gain,
                              const DetectionGeometry& geom, const PumpConfig& pump,
                              double pulses_per_frame, double fwhm_auto,
                              double fwhm_cross);

/// Second-order auto-correlation between two wavelengths of the same beam:
/// 1 + exp(-4 ln2 (omega - omega')^2 / fwhm_auto^2); 2 on the diagonal.
double g2_auto(const CorrelationKernel& k, double lambda_nm, double lambda_prime_nm);

/// Signal-idler cross-correlation: 1 + (1 + 1/Nbar) * envelope(omega_s +
/// omega_i - omega_p), Nbar the geometric mean of the two bins' per-mode
/// populations; peaks at 2 + 1/Nbar for exactly conjugate wavelengths.
double g2_cross(const CorrelationKernel& k, double lambda_s_nm, double lambda_i_nm);

/// Degenerate (single-mode squeezed vacuum) auto-correlation 3 + 1/N.
double g2_degenerate(double n_per_mode);

/// Total excess correlation g2(lambda, lambda') - 1 as the sum of the auto
/// and cross contributions. Reduces to g2_degenerate - 1 at the degenerate
/// diagonal point and to the thermal value 1 on the rest of the diagonal.
double excess_correlation(const CorrelationKernel& k, double lambda_nm,
                          double lambda_prime_nm);

/// Photon-number difference variance for two beams with m equivalent modes:
///   Var = (g2ss-1)/m Ns^2 + (g2ii-1)/m Ni^2 - 2 (g2si-1)/m Ns Ni + Ns + Ni,
/// with Ns, Ni the total (frame-integrated) means. Throws NumericError when
/// the inputs produce a negative variance beyond rounding.
double variance_difference(double ns, double ni, double g2ss, double g2ii, double g2si,
                           double m);

/// Pairwise covariance Cov(Ns, Ni) = (g2(ls,li) - 1) / m * <Ns><Ni> with the
/// means thinned by the quantum efficiency.
double covariance(const CorrelationKernel& k, double lambda_s_nm, double lambda_i_nm,
                  double eta);

enum class ScanNormalization { ShotNoise, MaxValue };

struct ScanRow {
    double lambda_i_nm = 0.0;
    double nrf = 0.0;       // normalized variance (shot-noise units by default)
    double var_diff = 0.0;  // photons^2 per frame
    double mean_s = 0.0;
    double mean_i = 0.0;
    bool artifact = false;  // self-pixel subtraction point
};

struct ScanCurve {
    double lambda_s_nm = 0.0;
    ScanNormalization normalization = ScanNormalization::ShotNoise;
    std::vector<ScanRow> rows;
};

/// Difference-intensity variance against every grid bin for a fixed signal
/// wavelength; the analytic counterpart of the frame-based measurement.
ScanCurve variance_scan(const CorrelationKernel& k, double lambda_s_nm, double eta,
                        ScanNormalization norm = ScanNormalization::ShotNoise);

struct CovarianceMapResult {
    SpectralGrid grid;
    std::vector<double> values;  // bins x bins, row-major
    double normalization = 1.0;  // divisor applied to the stored values

    double at(std::size_t i, std::size_t j) const { return values[i * grid.size() + j]; }
};

/// Two-dimensional covariance distribution over all bin pairs; optionally
/// normalized to its maximum value.
CovarianceMapResult covariance_map(const CorrelationKernel& k, double eta,
                                   bool normalize_to_max);

enum class StatKind { Mean, ExcessCorrelation, ShotTerm };

/// Binomial detection-loss transform: means and shot terms scale by eta,
/// normalized excess correlations g2 - 1 are invariant.
double apply_loss(double value, double eta, StatKind kind);

}  // namespace bsv
