#pragma once

#include <cmath>

namespace bsv {

inline constexpr double kSpeedOfLight = 299792458.0;               // m/s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFourLn2 = 2.77258872223978123767;         // 4 ln 2

/// Angular frequency (rad/s) of a vacuum wavelength given in nanometres.
inline double omega_from_nm(double lambda_nm) {
    return 2.0 * kPi * kSpeedOfLight / (lambda_nm * 1e-9);
}

/// FWHM in angular frequency (rad/s) equivalent to a wavelength FWHM
/// `dlambda_nm` taken at carrier wavelength `lambda_nm`.
inline double omega_fwhm_from_nm(double dlambda_nm, double lambda_nm) {
    const double lam = lambda_nm * 1e-9;
    return 2.0 * kPi * kSpeedOfLight * (dlambda_nm * 1e-9) / (lam * lam);
}

/// Inverse of omega_fwhm_from_nm.
inline double nm_fwhm_from_omega(double domega, double lambda_nm) {
    const double lam = lambda_nm * 1e-9;
    return domega * lam * lam / (2.0 * kPi * kSpeedOfLight) * 1e9;
}

}  // namespace bsv
