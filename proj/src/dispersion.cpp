#include "bsv/dispersion.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bsv/constants.hpp"

namespace bsv {

void PumpConfig::validate() const {
    if (!(wavelength_nm > 0)) throw ConfigError("pump.wavelength_nm: must be > 0");
    if (!(pulse_duration_ps > 0)) throw ConfigError("pump.pulse_duration_ps: must be > 0");
    if (!(coherence_time_ps > 0) || coherence_time_ps > pulse_duration_ps)
        throw ConfigError("pump.coherence_time_ps: must be in (0, pulse_duration_ps]");
    if (!(spectral_width_thz > 0)) throw ConfigError("pump.spectral_width_thz: must be > 0");
}

void CrystalConfig::validate() const {
    if (!(length_m > 0)) throw ConfigError("crystal.length_mm: must be > 0");
    if (!(cut_angle_deg > 0 && cut_angle_deg < 90))
        throw ConfigError("crystal.cut_angle_deg: must be in (0, 90)");
    if (material_table.empty()) throw ConfigError("crystal.material_table: must be set");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::filesystem::path resolve_table_path(const std::string& path_or_id) {
    namespace fs = std::filesystem;
    if (fs::exists(path_or_id)) return path_or_id;
    const std::string fname =
        path_or_id.find('.') == std::string::npos ? path_or_id + ".dat" : path_or_id;
    if (const char* env = std::getenv("BSVSIM_DATA_DIR")) {
        fs::path p = fs::path(env) / fname;
        if (fs::exists(p)) return p;
    }
#ifdef BSV_DATA_DIR
    {
        fs::path p = fs::path(BSV_DATA_DIR) / fname;
        if (fs::exists(p)) return p;
    }
#endif
    throw ConfigError("crystal.material_table: cannot resolve dispersion table '" +
                      path_or_id + "'");
}

}  // namespace

DispersionTable DispersionTable::load(const std::string& path_or_id) {
    const auto path = resolve_table_path(path_or_id);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dispersion table: " + path.string());

    DispersionTable t;
    DispersionCoefficients* section = nullptr;
    bool have_validity = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[' && s.back() == ']') {
            const std::string name = trim(s.substr(1, s.size() - 2));
            if (name == "ordinary") section = &t.ordinary_;
            else if (name == "extraordinary") section = &t.extraordinary_;
            else throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                                   ": unknown polarization section [" + name + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key == "source") {
            t.source_ = val;
        } else if (key == "validity_nm") {
            std::istringstream iss(val);
            char comma = 0;
            if (!(iss >> t.valid_lo_nm_ >> comma >> t.valid_hi_nm_) || comma != ',' ||
                !(t.valid_lo_nm_ > 0) || !(t.valid_hi_nm_ > t.valid_lo_nm_))
                throw ConfigError(path.string() + ": bad validity_nm line");
            have_validity = true;
        } else if (section) {
            double* dst = nullptr;
            if (key == "a") dst = &section->a;
            else if (key == "b") dst = &section->b;
            else if (key == "c") dst = &section->c;
            else if (key == "d") dst = &section->d;
            if (!dst)
                throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                                  ": unknown coefficient '" + key + "'");
            *dst = std::stod(val);
        } else {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": key '" + key + "' outside a polarization section");
        }
    }
    if (!have_validity)
        throw ConfigError(path.string() + ": mandatory validity_nm line missing");

    // Physical sanity over the stated range.
    for (double lam = t.valid_lo_nm_; lam <= t.valid_hi_nm_; lam += 1.0) {
        if (!(t.ordinary_.n_squared(lam * 1e-3) > 1.0) ||
            !(t.extraordinary_.n_squared(lam * 1e-3) > 1.0))
            throw ConfigError(path.string() + ": n(lambda) <= 1 inside validity range at " +
                              std::to_string(lam) + " nm");
    }
    return t;
}

void DispersionTable::check_range(double lambda_nm) const {
    if (!(lambda_nm >= valid_lo_nm_ && lambda_nm <= valid_hi_nm_)) {
        std::ostringstream oss;
        oss << "wavelength " << lambda_nm << " nm outside dispersion validity ["
            << valid_lo_nm_ << ", " << valid_hi_nm_ << "] nm";
        throw RangeError(oss.str());
    }
}

double DispersionTable::n_ordinary(double lambda_nm) const {
    check_range(lambda_nm);
    return std::sqrt(ordinary_.n_squared(lambda_nm * 1e-3));
}

double DispersionTable::n_extraordinary(double lambda_nm) const {
    check_range(lambda_nm);
    return std::sqrt(extraordinary_.n_squared(lambda_nm * 1e-3));
}

double DispersionTable::n_extraordinary_at(double lambda_nm, double theta_deg) const {
    if (!(theta_deg >= 0.0 && theta_deg <= 90.0))
        throw DomainError("extraordinary ray angle must be in [0, 90] degrees");
    check_range(lambda_nm);
    const double lam_um = lambda_nm * 1e-3;
    const double no2 = ordinary_.n_squared(lam_um);
    const double ne2 = extraordinary_.n_squared(lam_um);
    const double th = theta_deg * kPi / 180.0;
    const double c = std::cos(th), s = std::sin(th);
    return 1.0 / std::sqrt(c * c / no2 + s * s / ne2);
}

double conjugate_wavelength(double lambda_s_nm, double lambda_p_nm) {
    if (!(lambda_s_nm > lambda_p_nm))
        throw DomainError("conjugate_wavelength: signal wavelength must exceed the pump's");
    return 1.0 / (1.0 / lambda_p_nm - 1.0 / lambda_s_nm);
}

double phase_mismatch(double lambda_s_nm, const DispersionTable& table,
                      const CrystalConfig& crystal, const PumpConfig& pump) {
    const double lambda_i_nm = conjugate_wavelength(lambda_s_nm, pump.wavelength_nm);
    const double theta = crystal.effective_angle_deg();
    const double kp = table.n_extraordinary_at(pump.wavelength_nm, theta) /
                      (pump.wavelength_nm * 1e-9);
    const double ks = table.n_ordinary(lambda_s_nm) / (lambda_s_nm * 1e-9);
    const double ki = table.n_ordinary(lambda_i_nm) / (lambda_i_nm * 1e-9);
    return 2.0 * kPi * (kp - ks - ki);
}

double find_phasematching_angle(const DispersionTable& table,
                                const CrystalConfig& crystal, const PumpConfig& pump) {
    const double lambda_deg = pump.degenerate_nm();
    CrystalConfig probe = crystal;
    auto mismatch_at = [&](double cut_deg) {
        probe.cut_angle_deg = cut_deg;
        return phase_mismatch(lambda_deg, table, probe, pump);
    };

    // Coarse bracket over the physical quadrant, then bisection.
    const double step = 0.5;
    double lo = 0.0, hi = 0.0;
    bool found = false;
    double prev_angle = 0.01, prev_val = mismatch_at(prev_angle);
    for (double a = prev_angle + step; a < 90.0 - crystal.orientation_offset_deg; a += step) {
        const double v = mismatch_at(a);
        if (std::signbit(v) != std::signbit(prev_val)) {
            lo = prev_angle;
            hi = a;
            found = true;
            break;
        }
        prev_angle = a;
        prev_val = v;
    }
    if (!found)
        throw NumericError("find_phasematching_angle: no sign change of the degenerate "
                           "mismatch in (0, 90) degrees");

    double flo = mismatch_at(lo);
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = mismatch_at(mid);
        if (std::signbit(fmid) == std::signbit(flo)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace bsv
