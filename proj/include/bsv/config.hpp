#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bsv/dispersion.hpp"
#include "bsv/gain_model.hpp"
#include "bsv/grid.hpp"
#include "bsv/photon_stats.hpp"

namespace bsv {

/// Crystal section as written in a config file; the cut angle may be left
/// "auto" and solved from the dispersion table at scenario setup.
struct CrystalSettings {
    double length_mm = 2.0;
    std::optional<double> cut_angle_deg;  // absent = solve for phase matching
    double orientation_offset_deg = 0.0025;
    std::string material_table = "bbo_eimerl_1987";

    bool operator==(const CrystalSettings&) const = default;

    /// Concrete crystal: explicit cut angle, or the phase-matched one.
    CrystalConfig resolve(const DispersionTable& table, const PumpConfig& pump) const;
};

struct GridSettings {
    std::optional<double> min_nm;  // absent = scenario default
    std::optional<double> max_nm;
    double bin_nm = 0.2;

    bool operator==(const GridSettings&) const = default;

    SpectralGrid resolve(double default_min, double default_max,
                         double bin_scale = 1.0) const;
};

struct RunSettings {
    std::uint64_t frames = 10000;
    std::uint32_t pulses_per_frame = 1000;
    int modes_per_pair = 10;
    std::uint64_t seed = 12345;
    double weight_floor = 1e-3;

    bool operator==(const RunSettings&) const = default;
};

struct AnalysisSettings {
    ScanNormalization normalization = ScanNormalization::ShotNoise;
    double fixed_wavelength_nm = 702.4;
    double fit_window_nm = 2.0;
    std::optional<double> auto_width_nm;   // absent = from pump spectral width
    std::optional<double> cross_width_nm;  // absent = from pump spectral width
    double gain = 6.5;
    double gain_min = 3.9;
    double gain_max = 6.5;
    double gain_step = 0.1;
    double gainfit_kappa = 0.65;
    double gainfit_i0 = 1.0;
    int gainfit_points = 20;
    double gainfit_noise = 0.0;

    bool operator==(const AnalysisSettings&) const = default;
};

/// Full experiment description; defaults mirror the measured apparatus
/// (354.7 nm pump, 2 mm crystal, 0.2 nm resolution, eta = 0.2, 1.25 THz pump
/// width, 10000 frames of 1000 pulses).
struct ExperimentConfig {
    CrystalSettings crystal;
    PumpConfig pump;
    DetectionGeometry detection;
    GridSettings grid;
    RunSettings run;
    AnalysisSettings analysis;

    bool operator==(const ExperimentConfig&) const = default;

    void validate() const;
    /// Correlation-kernel widths in rad/s: explicit nm values converted at the
    /// degenerate wavelength, otherwise the pump spectral width.
    double kernel_fwhm_auto() const;
    double kernel_fwhm_cross() const;
};

/// Strict parse: unknown sections or keys are errors, every diagnostic names
/// the offending key path. A missing file is an error; an empty file yields
/// the all-defaults config.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

/// Canonical text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a hash of the canonical form, as fixed-width hex.
std::string config_digest(const ExperimentConfig& cfg);

}  // namespace bsv
