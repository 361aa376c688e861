#pragma once

#include <string>

#include "bsv/errors.hpp"

namespace bsv {

/// Pump laser parameters. Defaults are the 3rd-harmonic Nd:YAG source:
/// 354.7 nm, 18 ps pulses, 5 ps coherence time, 1.25 THz spectral width
/// (FWHM, angular frequency).
struct PumpConfig {
    double wavelength_nm = 354.7;
    double pulse_duration_ps = 18.0;
    double coherence_time_ps = 5.0;
    double spectral_width_thz = 1.25;  // FWHM of the pump spectrum, rad/s * 1e12

    void validate() const;
    /// Frequency-degenerate down-conversion wavelength, 2 * lambda_p.
    double degenerate_nm() const { return 2.0 * wavelength_nm; }
};

/// Uniaxial crystal geometry for type-I collinear phase matching.
/// `cut_angle_deg` is the angle between the optic axis and the pump
/// propagation direction; the effective angle used in phase matching is
/// cut_angle_deg + orientation_offset_deg.
struct CrystalConfig {
    double length_m = 2e-3;
    double cut_angle_deg = 32.9448;          // near degenerate phase matching for 354.7 nm
    double orientation_offset_deg = 0.0025;  // residual misorientation of the mount
    std::string material_table = "bbo_eimerl_1987";

    void validate() const;
    double effective_angle_deg() const { return cut_angle_deg + orientation_offset_deg; }
};

/// One polarization branch of the dispersion formula
/// n^2(lambda) = a + b / (lambda^2 - c) - d * lambda^2  (lambda in um).
struct DispersionCoefficients {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    double n_squared(double lambda_um) const {
        return a + b / (lambda_um * lambda_um - c) - d * lambda_um * lambda_um;
    }
};

/// Sellmeier-style dispersion data for one uniaxial material, loaded from a
/// plain-text table (see data/). Evaluation outside [valid_lo_nm, valid_hi_nm]
/// throws RangeError.
class DispersionTable {
public:
    /// Load from an explicit path, or resolve a bare table identifier against
    /// $BSVSIM_DATA_DIR and the compiled-in data directory.
    static DispersionTable load(const std::string& path_or_id);

    /// Ordinary-ray index n_o(lambda).
    double n_ordinary(double lambda_nm) const;
    /// Principal extraordinary index n_e(lambda) (propagation at 90 deg).
    double n_extraordinary(double lambda_nm) const;
    /// Index of the extraordinary ray propagating at `theta_deg` to the
    /// optic axis: 1/n^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2.
    double n_extraordinary_at(double lambda_nm, double theta_deg) const;

    double valid_lo_nm() const { return valid_lo_nm_; }
    double valid_hi_nm() const { return valid_hi_nm_; }
    const std::string& source() const { return source_; }

private:
    void check_range(double lambda_nm) const;

    std::string source_;
    double valid_lo_nm_ = 0.0, valid_hi_nm_ = 0.0;
    DispersionCoefficients ordinary_, extraordinary_;
};

/// Idler wavelength conjugate to `lambda_s_nm` under energy conservation
/// 1/lambda_s + 1/lambda_i = 1/lambda_p. Requires lambda_s > lambda_p.
double conjugate_wavelength(double lambda_s_nm, double lambda_p_nm);

/// Collinear type-I phase mismatch dk = k_p - k_s - k_i in 1/m, evaluated at
/// the crystal's effective cut angle. Symmetric in signal <-> idler.
double phase_mismatch(double lambda_s_nm, const DispersionTable& table,
                      const CrystalConfig& crystal, const PumpConfig& pump);

/// Cut angle (degrees) at which the frequency-degenerate mismatch vanishes,
/// found by bracketing on a coarse grid and bisection to 1e-6 deg. The
/// returned angle already accounts for the crystal's orientation offset, so
/// plugging it back as cut_angle_deg gives phase_mismatch(2*lambda_p) = 0.
double find_phasematching_angle(const DispersionTable& table,
                                const CrystalConfig& crystal, const PumpConfig& pump);

}  // namespace bsv
