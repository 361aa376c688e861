#include "bsv/gain_model.hpp"

#include <algorithm>
#include <cmath>

#include "bsv/constants.hpp"

namespace bsv {

void DetectionGeometry::validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("detection.eta: must be in (0, 1]");
    if (!(solid_angle_sr > 0)) throw ConfigError("detection.solid_angle_sr: must be > 0");
    if (!(acceptance_nm > 0)) throw ConfigError("detection.acceptance_nm: must be > 0");
    if (!(beam_area_m2 > 0)) throw ConfigError("detection.beam_area_m2: must be > 0");
    if (!(gate_time_s > 0)) throw ConfigError("detection.gate_time_s: must be > 0");
    if (!(shape_spatial > 0) || !(shape_temporal > 0))
        throw ConfigError("detection shape constants must be > 0");
}

double mode_photon_number(double gain, double delta) {
    if (gain < 0.0) throw DomainError("mode_photon_number: gain must be >= 0");
    const double t2 = gain * gain - delta * delta;
    // sinh(x)/x and sin(x)/x are both 1 + t2/6 + t2^2/120 + ... in t2 = x^2;
    // use the series near the boundary to keep the function smooth there.
    double s;
    if (std::abs(t2) < 1e-8) {
        s = 1.0 + t2 / 6.0 + t2 * t2 / 120.0;
    } else if (t2 > 0.0) {
        const double t = std::sqrt(t2);
        s = std::sinh(t) / t;
    } else {
        const double t = std::sqrt(-t2);
        s = std::sin(t) / t;
    }
    const double amp = gain * s;
    return amp * amp;
}

GainPoint spectrum(const SpectralGrid& grid, double gain, const DispersionTable& table,
                   const CrystalConfig& crystal, const PumpConfig& pump) {
    GainPoint gp;
    gp.gain = gain;
    gp.n_per_mode.reserve(grid.size());
    const double half_length = 0.5 * crystal.length_m;
    for (double lam : grid.centers()) {
        const double delta = phase_mismatch(lam, table, crystal, pump) * half_length;
        gp.n_per_mode.push_back(mode_photon_number(gain, delta));
    }
    return gp;
}

double fwhm(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3)
        throw NumericError("fwhm: need at least 3 aligned samples");
    const auto it = std::max_element(y.begin(), y.end());
    const auto imax = static_cast<std::size_t>(std::distance(y.begin(), it));
    if (imax == 0 || imax == y.size() - 1)
        throw NumericError("fwhm: maximum at the edge of the sampled range");
    const double baseline = *std::min_element(y.begin(), y.end());
    const double half = baseline + 0.5 * (*it - baseline);
    if (!(*it > baseline))
        throw NumericError("fwhm: curve has no resolvable maximum");

    // Walk outwards from the peak to the first half-crossing on each side.
    std::size_t il = imax;
    while (il > 0 && y[il] > half) --il;
    if (y[il] > half) throw NumericError("fwhm: curve never falls to half maximum (left)");
    const double xl = x[il] + (x[il + 1] - x[il]) * (half - y[il]) / (y[il + 1] - y[il]);

    std::size_t ir = imax;
    while (ir < y.size() - 1 && y[ir] > half) ++ir;
    if (y[ir] > half) throw NumericError("fwhm: curve never falls to half maximum (right)");
    const double xr = x[ir - 1] + (x[ir] - x[ir - 1]) * (half - y[ir - 1]) / (y[ir] - y[ir - 1]);
    return xr - xl;
}

std::vector<double> mode_density_correction(std::span<const double> lambda_nm,
                                            std::span<const double> raw,
                                            double lambda_ref_nm) {
    if (lambda_nm.size() != raw.size())
        throw NumericError("mode_density_correction: size mismatch");
    std::vector<double> out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double r = lambda_nm[i] / lambda_ref_nm;
        out.push_back(raw[i] * r * r * r * r);
    }
    return out;
}

double mode_count(const DetectionGeometry& geom, double lambda_nm, double dlambda_nm,
                  double solid_angle_sr) {
    const double lam = lambda_nm * 1e-9;
    const double v_det = geom.beam_area_m2 * kSpeedOfLight * geom.gate_time_s;
    const double s_coh = geom.shape_spatial * lam * lam / solid_angle_sr;
    const double t_coh = geom.shape_temporal * lam * lam / (kSpeedOfLight * dlambda_nm * 1e-9);
    const double v_coh = s_coh * kSpeedOfLight * t_coh;
    return v_det / v_coh;
}

}  // namespace bsv
