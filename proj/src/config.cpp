#include "bsv/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bsv/constants.hpp"

namespace bsv {

CrystalConfig CrystalSettings::resolve(const DispersionTable& table,
                                       const PumpConfig& pump) const {
    CrystalConfig c;
    c.length_m = length_mm * 1e-3;
    c.orientation_offset_deg = orientation_offset_deg;
    c.material_table = material_table;
    if (cut_angle_deg) {
        c.cut_angle_deg = *cut_angle_deg;
    } else {
        c.cut_angle_deg = find_phasematching_angle(table, c, pump);
    }
    c.validate();
    return c;
}

SpectralGrid GridSettings::resolve(double default_min, double default_max,
                                   double bin_scale) const {
    return SpectralGrid(min_nm.value_or(default_min), max_nm.value_or(default_max),
                        bin_nm * bin_scale);
}

void ExperimentConfig::validate() const {
    if (!(crystal.length_mm > 0)) throw ConfigError("crystal.length_mm: must be > 0");
    if (crystal.cut_angle_deg && !(*crystal.cut_angle_deg > 0 && *crystal.cut_angle_deg < 90))
        throw ConfigError("crystal.cut_angle_deg: must be in (0, 90) or auto");
    if (crystal.material_table.empty())
        throw ConfigError("crystal.material_table: must be set");
    pump.validate();
    detection.validate();
    if (!(grid.bin_nm > 0)) throw ConfigError("grid.bin_nm: must be > 0");
    if (grid.min_nm && grid.max_nm && !(*grid.min_nm < *grid.max_nm))
        throw ConfigError("grid.min_nm: must be below grid.max_nm");
    if (run.frames < 1) throw ConfigError("run.frames: must be >= 1");
    if (run.pulses_per_frame < 1) throw ConfigError("run.pulses_per_frame: must be >= 1");
    if (run.modes_per_pair < 1) throw ConfigError("run.modes_per_pair: must be >= 1");
    if (!(run.weight_floor >= 0 && run.weight_floor < 1))
        throw ConfigError("run.weight_floor: must be in [0, 1)");
    if (!(analysis.fixed_wavelength_nm > 0))
        throw ConfigError("analysis.fixed_wavelength_nm: must be > 0");
    if (!(analysis.fit_window_nm > 0))
        throw ConfigError("analysis.fit_window_nm: must be > 0");
    if (analysis.auto_width_nm && !(*analysis.auto_width_nm > 0))
        throw ConfigError("analysis.auto_width_nm: must be > 0 or auto");
    if (analysis.cross_width_nm && !(*analysis.cross_width_nm > 0))
        throw ConfigError("analysis.cross_width_nm: must be > 0 or auto");
    if (!(analysis.gain > 0)) throw ConfigError("analysis.gain: must be > 0");
    if (!(analysis.gain_min > 0) || !(analysis.gain_max >= analysis.gain_min))
        throw ConfigError("analysis.gain_min/gain_max: need 0 < min <= max");
    if (!(analysis.gain_step > 0)) throw ConfigError("analysis.gain_step: must be > 0");
    if (analysis.gainfit_points < 3)
        throw ConfigError("analysis.gainfit_points: must be >= 3");
    if (!(analysis.gainfit_kappa > 0))
        throw ConfigError("analysis.gainfit_kappa: must be > 0");
    if (!(analysis.gainfit_i0 > 0)) throw ConfigError("analysis.gainfit_i0: must be > 0");
    if (analysis.gainfit_noise < 0)
        throw ConfigError("analysis.gainfit_noise: must be >= 0");
}

double ExperimentConfig::kernel_fwhm_auto() const {
    if (analysis.auto_width_nm)
        return omega_fwhm_from_nm(*analysis.auto_width_nm, pump.degenerate_nm());
    return pump.spectral_width_thz * 1e12;
}

double ExperimentConfig::kernel_fwhm_cross() const {
    if (analysis.cross_width_nm)
        return omega_fwhm_from_nm(*analysis.cross_width_nm, pump.degenerate_nm());
    return pump.spectral_width_thz * 1e12;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& val) {
    try {
        std::size_t used = 0;
        const double v = std::stod(val, &used);
        if (used != val.size()) throw std::invalid_argument(val);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + val + "'");
    }
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& val) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(val, &used);
        if (used != val.size()) throw std::invalid_argument(val);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + val + "'");
    }
}

std::optional<double> parse_auto_number(const std::string& key, const std::string& val) {
    if (val == "auto") return std::nullopt;
    return parse_number(key, val);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "auto"; }

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        const std::string s = trim(line);
        if (s.empty()) continue;
        if (s.front() == '[' && s.back() == ']') {
            section = trim(s.substr(1, s.size() - 2));
            if (section != "crystal" && section != "pump" && section != "detection" &&
                section != "grid" && section != "run" && section != "analysis")
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        const std::string path = section.empty() ? key : section + "." + key;

        if (section == "crystal") {
            if (key == "length_mm") cfg.crystal.length_mm = parse_number(path, val);
            else if (key == "cut_angle_deg") cfg.crystal.cut_angle_deg = parse_auto_number(path, val);
            else if (key == "orientation_offset_deg") cfg.crystal.orientation_offset_deg = parse_number(path, val);
            else if (key == "material_table") cfg.crystal.material_table = val;
            else throw ConfigError(origin + ": unknown key: " + path);
        } else if (section == "pump") {
            if (key == "wavelength_nm") cfg.pump.wavelength_nm = parse_number(path, val);
            else if (key == "pulse_duration_ps") cfg.pump.pulse_duration_ps = parse_number(path, val);
            else if (key == "coherence_time_ps") cfg.pump.coherence_time_ps = parse_number(path, val);
            else if (key == "spectral_width_thz") cfg.pump.spectral_width_thz = parse_number(path, val);
            else throw ConfigError(origin + ": unknown key: " + path);
        } else if (section == "detection") {
            if (key == "eta") cfg.detection.eta = parse_number(path, val);
            else if (key == "solid_angle_sr") cfg.detection.solid_angle_sr = parse_number(path, val);
            else if (key == "acceptance_nm") cfg.detection.acceptance_nm = parse_number(path, val);
            else if (key == "beam_area_m2") cfg.detection.beam_area_m2 = parse_number(path, val);
            else if (key == "gate_time_ps") cfg.detection.gate_time_s = parse_number(path, val) * 1e-12;
            else throw ConfigError(origin + ": unknown key: " + path);
        } else if (section == "grid") {
            if (key == "min_nm") cfg.grid.min_nm = parse_auto_number(path, val);
            else if (key == "max_nm") cfg.grid.max_nm = parse_auto_number(path, val);
            else if (key == "bin_nm") cfg.grid.bin_nm = parse_number(path, val);
            else throw ConfigError(origin + ": unknown key: " + path);
        } else if (section == "run") {
            if (key == "frames") cfg.run.frames = parse_unsigned(path, val);
            else if (key == "pulses_per_frame") cfg.run.pulses_per_frame = std::uint32_t(parse_unsigned(path, val));
            else if (key == "modes_per_pair") cfg.run.modes_per_pair = int(parse_unsigned(path, val));
            else if (key == "seed") cfg.run.seed = parse_unsigned(path, val);
            else if (key == "weight_floor") cfg.run.weight_floor = parse_number(path, val);
            else throw ConfigError(origin + ": unknown key: " + path);
        } else if (section == "analysis") {
            if (key == "normalization") {
                if (val == "shot") cfg.analysis.normalization = ScanNormalization::ShotNoise;
                else if (val == "max") cfg.analysis.normalization = ScanNormalization::MaxValue;
                else throw ConfigError(path + ": expected 'shot' or 'max'");
            }
            else if (key == "fixed_wavelength_nm") cfg.analysis.fixed_wavelength_nm = parse_number(path, val);
            else if (key == "fit_window_nm") cfg.analysis.fit_window_nm = parse_number(path, val);
            else if (key == "auto_width_nm") cfg.analysis.auto_width_nm = parse_auto_number(path, val);
            else if (key == "cross_width_nm") cfg.analysis.cross_width_nm = parse_auto_number(path, val);
            else if (key == "gain") cfg.analysis.gain = parse_number(path, val);
            else if (key == "gain_min") cfg.analysis.gain_min = parse_number(path, val);
            else if (key == "gain_max") cfg.analysis.gain_max = parse_number(path, val);
            else if (key == "gain_step") cfg.analysis.gain_step = parse_number(path, val);
            else if (key == "gainfit_kappa") cfg.analysis.gainfit_kappa = parse_number(path, val);
            else if (key == "gainfit_i0") cfg.analysis.gainfit_i0 = parse_number(path, val);
            else if (key == "gainfit_points") cfg.analysis.gainfit_points = int(parse_unsigned(path, val));
            else if (key == "gainfit_noise") cfg.analysis.gainfit_noise = parse_number(path, val);
            else throw ConfigError(origin + ": unknown key: " + path);
        } else {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": key '" + key +
                              "' outside any section");
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream o;
    o << "[crystal]\n";
    o << "length_mm = " << fmt(cfg.crystal.length_mm) << "\n";
    o << "cut_angle_deg = " << fmt(cfg.crystal.cut_angle_deg) << "\n";
    o << "orientation_offset_deg = " << fmt(cfg.crystal.orientation_offset_deg) << "\n";
    o << "material_table = " << cfg.crystal.material_table << "\n\n";
    o << "[pump]\n";
    o << "wavelength_nm = " << fmt(cfg.pump.wavelength_nm) << "\n";
    o << "pulse_duration_ps = " << fmt(cfg.pump.pulse_duration_ps) << "\n";
    o << "coherence_time_ps = " << fmt(cfg.pump.coherence_time_ps) << "\n";
    o << "spectral_width_thz = " << fmt(cfg.pump.spectral_width_thz) << "\n\n";
    o << "[detection]\n";
    o << "eta = " << fmt(cfg.detection.eta) << "\n";
    o << "solid_angle_sr = " << fmt(cfg.detection.solid_angle_sr) << "\n";
    o << "acceptance_nm = " << fmt(cfg.detection.acceptance_nm) << "\n";
    o << "beam_area_m2 = " << fmt(cfg.detection.beam_area_m2) << "\n";
    o << "gate_time_ps = " << fmt(cfg.detection.gate_time_s * 1e12) << "\n\n";
    o << "[grid]\n";
    o << "min_nm = " << fmt(cfg.grid.min_nm) << "\n";
    o << "max_nm = " << fmt(cfg.grid.max_nm) << "\n";
    o << "bin_nm = " << fmt(cfg.grid.bin_nm) << "\n\n";
    o << "[run]\n";
    o << "frames = " << cfg.run.frames << "\n";
    o << "pulses_per_frame = " << cfg.run.pulses_per_frame << "\n";
    o << "modes_per_pair = " << cfg.run.modes_per_pair << "\n";
    o << "seed = " << cfg.run.seed << "\n";
    o << "weight_floor = " << fmt(cfg.run.weight_floor) << "\n\n";
    o << "[analysis]\n";
    o << "normalization = "
      << (cfg.analysis.normalization == ScanNormalization::ShotNoise ? "shot" : "max") << "\n";
    o << "fixed_wavelength_nm = " << fmt(cfg.analysis.fixed_wavelength_nm) << "\n";
    o << "fit_window_nm = " << fmt(cfg.analysis.fit_window_nm) << "\n";
    o << "auto_width_nm = " << fmt(cfg.analysis.auto_width_nm) << "\n";
    o << "cross_width_nm = " << fmt(cfg.analysis.cross_width_nm) << "\n";
    o << "gain = " << fmt(cfg.analysis.gain) << "\n";
    o << "gain_min = " << fmt(cfg.analysis.gain_min) << "\n";
    o << "gain_max = " << fmt(cfg.analysis.gain_max) << "\n";
    o << "gain_step = " << fmt(cfg.analysis.gain_step) << "\n";
    o << "gainfit_kappa = " << fmt(cfg.analysis.gainfit_kappa) << "\n";
    o << "gainfit_i0 = " << fmt(cfg.analysis.gainfit_i0) << "\n";
    o << "gainfit_points = " << cfg.analysis.gainfit_points << "\n";
    o << "gainfit_noise = " << fmt(cfg.analysis.gainfit_noise) << "\n";
    return o.str();
}

std::string config_digest(const ExperimentConfig& cfg) {
    const std::string text = serialize_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace bsv
