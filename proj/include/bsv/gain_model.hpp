#pragma once

#include <span>
#include <vector>

#include "bsv/dispersion.hpp"
#include "bsv/grid.hpp"

namespace bsv {

/// Detection solid angle, bandwidth and volume, plus the quantum efficiency.
/// Defaults correspond to the far-field aperture (0.17 deg full angle), the
/// focused pump spot and the pulse-length gate.
struct DetectionGeometry {
    double solid_angle_sr = 6.9e-6;
    double acceptance_nm = 0.2;    // wavelength interval per detection bin
    double beam_area_m2 = 5.6e-8;  // transverse detection area
    double gate_time_s = 18e-12;   // temporal gate (one pump pulse)
    double eta = 0.2;              // quantum efficiency
    double shape_spatial = 1.0;    // order-unity coherence-area constant a_s
    double shape_temporal = 1.0;   // order-unity coherence-time constant a_t

    void validate() const;
};

/// Parametric gain together with the per-bin mean photon number per mode.
struct GainPoint {
    double gain = 0.0;
    std::vector<double> n_per_mode;  // aligned with the grid it was built on
};

/// Mean photon number of one down-converted mode at parametric gain `gain`
/// and dimensionless half-mismatch `delta` = dk * L / 2:
///   N = | G sinh(tau)/tau |^2,  tau = sqrt(G^2 - delta^2),
/// continued through tau^2 < 0 as sin(|tau|)/|tau|. Total and non-negative.
double mode_photon_number(double gain, double delta);

/// Per-bin N(lambda) = mode_photon_number(G, dk(lambda) L / 2) over the grid.
GainPoint spectrum(const SpectralGrid& grid, double gain, const DispersionTable& table,
                   const CrystalConfig& crystal, const PumpConfig& pump);

/// Full width at half maximum of a sampled curve, with linear interpolation
/// between samples and the curve minimum as baseline. Throws NumericError if
/// the maximum sits on an edge or a side never falls to half depth.
double fwhm(std::span<const double> x, std::span<const double> y);

/// Undo the lambda^-4 scaling of the collected mode number: multiplies each
/// value by (lambda / lambda_ref)^4.
std::vector<double> mode_density_correction(std::span<const double> lambda_nm,
                                            std::span<const double> raw,
                                            double lambda_ref_nm);

/// Number of detected modes m = V_det / V_coh with
///   V_coh = S_coh c t_coh,  S_coh = a_s lambda^2 / dOmega,
///   t_coh = a_t lambda^2 / (c dLambda),
/// so m scales as dOmega * dLambda / lambda^4.
double mode_count(const DetectionGeometry& geom, double lambda_nm, double dlambda_nm,
                  double solid_angle_sr);

}  // namespace bsv
