#include "bsv/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "bsv/constants.hpp"
#include "bsv/csv.hpp"
#include "bsv/estimation.hpp"
#include "bsv/frames.hpp"
#include "bsv/pairing.hpp"
#include "bsv/rng.hpp"
#include "bsv/version.hpp"

namespace bsv {

namespace {

using nlohmann::json;

struct Scenario {
    const ExperimentConfig& cfg;
    RunOptions opts;
    std::filesystem::path out;
    DispersionTable table;
    CrystalConfig crystal;
    std::uint64_t seed;

    Scenario(const ExperimentConfig& c, const RunOptions& o, const std::string& out_dir)
        : cfg(c), opts(o), out(out_dir), table(DispersionTable::load(c.crystal.material_table)),
          crystal(c.crystal.resolve(table, c.pump)),
          seed(o.seed.value_or(c.run.seed)) {
        std::filesystem::create_directories(out);
    }

    std::filesystem::path path(const std::string& name) const { return out / name; }

    void write_manifest(const std::string& scenario_name) const {
        ExperimentConfig effective = cfg;
        effective.run.seed = seed;
        std::ofstream m(path("manifest.txt"));
        if (!m) throw NumericError("cannot write manifest in " + out.string());
        m << "# bsvsim manifest\n";
        m << "# version = " << kVersion << "\n";
        m << "# scenario = " << scenario_name << "\n";
        m << "# seed = " << seed << "\n";
        m << "# config_digest = " << config_digest(effective) << "\n";
        m << serialize_config(effective);
    }

    void write_summary(const json& j) const {
        std::ofstream s(path("summary.json"));
        if (!s) throw NumericError("cannot write summary in " + out.string());
        s << j.dump(2) << "\n";
    }

    CorrelationKernel kernel(const SpectralGrid& grid, const GainPoint& gp) const {
        return make_kernel(grid, gp, cfg.detection, cfg.pump, double(cfg.run.pulses_per_frame),
                           cfg.kernel_fwhm_auto(), cfg.kernel_fwhm_cross());
    }
};

json fit_to_json(const FitResult& fit) {
    json j;
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        j["parameters"][fit.names[i]] = fit.values[i];
        j["errors"][fit.names[i]] = fit.errors[i];
    }
    j["residual_norm"] = fit.residual_norm;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["low_significance"] = fit.low_significance;
    return j;
}

// ---------------------------------------------------------------- spectrum

int scenario_spectrum(Scenario& sc) {
    const SpectralGrid grid = sc.cfg.grid.resolve(640.0, 790.0);
    const double lam_ref = sc.cfg.pump.degenerate_nm();
    const GainPoint gp = spectrum(grid, sc.cfg.analysis.gain, sc.table, sc.crystal, sc.cfg.pump);

    // What the spectrometer records is N(lambda) times the collected mode
    // number, which scales as lambda^-4; the corrected column undoes that.
    std::vector<double> raw(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = lam_ref / grid.center(i);
        raw[i] = gp.n_per_mode[i] * r * r * r * r;
    }
    const std::vector<double> corrected =
        mode_density_correction(grid.centers(), raw, lam_ref);

    CsvWriter csv(sc.path("spectrum.csv").string());
    csv.header("lambda_nm,n_per_mode,n_corrected");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        csv.field(grid.center(i)).field(raw[i]).field(corrected[i]);
        csv.endrow();
    }

    json j;
    j["gain"] = sc.cfg.analysis.gain;
    j["lambda_reference_nm"] = lam_ref;
    j["fwhm_raw_nm"] = fwhm(grid.centers(), raw);
    j["fwhm_corrected_nm"] = fwhm(grid.centers(), corrected);
    const auto imax = std::size_t(std::distance(
        corrected.begin(), std::max_element(corrected.begin(), corrected.end())));
    j["peak_lambda_nm"] = grid.center(imax);
    sc.write_summary(j);
    sc.write_manifest("spectrum");
    return kExitOk;
}

// ----------------------------------------------------------- width-vs-gain

int scenario_width_vs_gain(Scenario& sc) {
    const SpectralGrid grid = sc.cfg.grid.resolve(640.0, 790.0);
    const auto& an = sc.cfg.analysis;

    CsvWriter csv(sc.path("width_vs_gain.csv").string());
    csv.header("gain,fwhm_nm");

    // The low-gain limit of |G sinh(tau)/tau|^2 is G^2 sinc^2(delta); its
    // width no longer depends on G, so a tiny gain stands in for G -> 0.
    const GainPoint low = spectrum(grid, 1e-3, sc.table, sc.crystal, sc.cfg.pump);
    const double fwhm_low = fwhm(grid.centers(), low.n_per_mode);
    csv.field(0.0).field(fwhm_low);
    csv.endrow();

    double fwhm_min = 0.0, fwhm_max = 0.0;
    for (double g = an.gain_min; g <= an.gain_max + 1e-9; g += an.gain_step) {
        const GainPoint gp = spectrum(grid, g, sc.table, sc.crystal, sc.cfg.pump);
        const double w = fwhm(grid.centers(), gp.n_per_mode);
        if (g == an.gain_min) fwhm_min = w;
        fwhm_max = w;
        csv.field(g).field(w);
        csv.endrow();
    }

    json j;
    j["fwhm_lowgain_nm"] = fwhm_low;
    j["fwhm_at_gain_min_nm"] = fwhm_min;
    j["fwhm_at_gain_max_nm"] = fwhm_max;
    j["ratio_gain_max_over_min"] = fwhm_max / fwhm_min;
    j["ratio_gain_max_over_lowgain"] = fwhm_max / fwhm_low;
    j["gain_min"] = an.gain_min;
    j["gain_max"] = an.gain_max;
    sc.write_summary(j);
    sc.write_manifest("width-vs-gain");
    return kExitOk;
}

// ----------------------------------------------------------- variance-scan

json fit_scan_feature(const ScanCurve& curve, double center_nm, FeatureKind kind,
                      double window_nm) {
    // The self-pixel artifact is excluded from fits.
    std::vector<double> xs, ys;
    for (const auto& r : curve.rows) {
        if (r.artifact) continue;
        if (std::abs(r.lambda_i_nm - center_nm) <= window_nm) {
            xs.push_back(r.lambda_i_nm);
            ys.push_back(r.nrf);
        }
    }
    const FitResult fit = fit_gaussian_feature(xs, ys, kind, window_nm);
    json j = fit_to_json(fit);
    j["expected_center_nm"] = center_nm;
    return j;
}

int scenario_variance_scan(Scenario& sc) {
    const SpectralGrid grid = sc.cfg.grid.resolve(700.0, 720.0);
    const auto& an = sc.cfg.analysis;
    const GainPoint gp = spectrum(grid, an.gain, sc.table, sc.crystal, sc.cfg.pump);
    const CorrelationKernel k = sc.kernel(grid, gp);
    const ScanCurve curve =
        variance_scan(k, an.fixed_wavelength_nm, sc.cfg.detection.eta, an.normalization);

    CsvWriter csv(sc.path("variance_scan.csv").string());
    csv.header("lambda_i_nm,nrf,var_diff,mean_s,mean_i,artifact_flag");
    for (const auto& r : curve.rows) {
        csv.field(r.lambda_i_nm).field(r.nrf).field(r.var_diff).field(r.mean_s)
            .field(r.mean_i).field(int(r.artifact));
        csv.endrow();
    }

    const double lam_conj =
        conjugate_wavelength(curve.lambda_s_nm, sc.cfg.pump.wavelength_nm);
    const double lam_deg = sc.cfg.pump.degenerate_nm();

    json j;
    j["lambda_s_nm"] = curve.lambda_s_nm;
    j["lambda_conjugate_nm"] = lam_conj;
    j["lambda_degenerate_nm"] = lam_deg;
    j["gain"] = an.gain;
    json fits;
    fits["peak"] = fit_scan_feature(curve, lam_deg, FeatureKind::Peak, an.fit_window_nm);
    fits["auto_dip"] =
        fit_scan_feature(curve, curve.lambda_s_nm, FeatureKind::Dip, an.fit_window_nm);
    fits["cross_dip"] = fit_scan_feature(curve, lam_conj, FeatureKind::Dip, an.fit_window_nm);
    const double wpeak = fits["peak"]["parameters"]["fwhm"].get<double>();
    const double wcross = fits["cross_dip"]["parameters"]["fwhm"].get<double>();
    fits["peak_to_cross_width_ratio"] = wpeak / wcross;
    j["fits"] = fits;
    sc.write_summary(j);
    sc.write_manifest("variance-scan");
    return kExitOk;
}

// ---------------------------------------------------------- covariance-map

int scenario_covariance_map(Scenario& sc) {
    const double bin_scale = sc.opts.coarse ? 10.0 : 1.0;
    const SpectralGrid grid = sc.cfg.grid.resolve(650.0, 760.0, bin_scale);
    const GainPoint gp = spectrum(grid, sc.cfg.analysis.gain, sc.table, sc.crystal, sc.cfg.pump);
    const CorrelationKernel k = sc.kernel(grid, gp);
    const CovarianceMapResult map = covariance_map(k, sc.cfg.detection.eta, true);

    CsvWriter csv(sc.path("covariance_map.csv").string());
    {
        std::string head = "lambda_nm";
        char buf[64];
        for (std::size_t i = 0; i < grid.size(); ++i) {
            std::snprintf(buf, sizeof buf, ",%.12g", grid.center(i));
            head += buf;
        }
        csv.header(head);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        csv.field(grid.center(i));
        for (std::size_t jcol = 0; jcol < grid.size(); ++jcol) csv.field(map.at(i, jcol));
        csv.endrow();
    }

    json j;
    j["gain"] = sc.cfg.analysis.gain;
    j["bins"] = grid.size();
    j["normalized_to_max"] = true;
    j["normalization_value"] = map.normalization;
    sc.write_summary(j);
    sc.write_manifest("covariance-map");
    return kExitOk;
}

// --------------------------------------------------------------- gain-fit

int scenario_gain_fit(Scenario& sc) {
    const auto& an = sc.cfg.analysis;
    const double p_min = std::pow(an.gain_min / an.gainfit_kappa, 2.0);
    const double p_max = std::pow(an.gain_max / an.gainfit_kappa, 2.0);
    const int n = an.gainfit_points;

    std::vector<double> power(n), intensity(n);
    Rng rng = make_substream(sc.seed, 0xf17, 0x9a1);
    std::normal_distribution<double> gauss01(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        const double sq = std::sqrt(p_min) +
                          (std::sqrt(p_max) - std::sqrt(p_min)) * double(i) / double(n - 1);
        power[i] = sq * sq;
        double y = an.gainfit_i0 * std::pow(std::sinh(an.gainfit_kappa * sq), 2.0);
        if (an.gainfit_noise > 0) y *= std::max(0.0, 1.0 + an.gainfit_noise * gauss01(rng));
        intensity[i] = y;
    }

    const FitResult fit = fit_gain_curve(power, intensity);

    CsvWriter csv(sc.path("gain_fit.csv").string());
    csv.header("power,intensity,intensity_fit");
    for (int i = 0; i < n; ++i) {
        const double ifit = fit.converged
            ? fit.value("I0") * std::pow(std::sinh(fit.value("kappa") * std::sqrt(power[i])), 2.0)
            : 0.0;
        csv.field(power[i]).field(intensity[i]).field(ifit);
        csv.endrow();
    }

    json j = fit_to_json(fit);
    j["true"]["I0"] = an.gainfit_i0;
    j["true"]["kappa"] = an.gainfit_kappa;
    j["noise"] = an.gainfit_noise;
    if (fit.converged) {
        j["gain_at_p_min"] = gain_from_power(fit.value("kappa"), p_min);
        j["gain_at_p_max"] = gain_from_power(fit.value("kappa"), p_max);
    }
    sc.write_summary(j);
    sc.write_manifest("gain-fit");
    return fit.converged ? kExitOk : kExitRuntimeError;
}

// --------------------------------------------------------------- validate

struct ZTally {
    std::size_t pass = 0, total = 0;
    void add(double emp, double ana, double se) {
        ++total;
        if (se > 0) {
            if (std::abs(emp - ana) <= 3.0 * se) ++pass;
        } else {
            if (std::abs(emp - ana) <= 1e-9 * std::max(1.0, std::abs(ana))) ++pass;
        }
    }
    double fraction() const { return total ? double(pass) / double(total) : 1.0; }
};

int scenario_validate(Scenario& sc) {
    // Fixed self-check protocol: coarse map grid, 2000 frames of 200 pulses.
    const SpectralGrid grid = sc.cfg.grid.resolve(650.0, 760.0, 10.0);
    constexpr std::uint64_t kFrames = 2000;
    constexpr std::uint32_t kPulses = 200;
    const double eta = sc.cfg.detection.eta;

    const GainPoint gp = spectrum(grid, sc.cfg.analysis.gain, sc.table, sc.crystal, sc.cfg.pump);
    CorrelationKernel k = make_kernel(grid, gp, sc.cfg.detection, sc.cfg.pump,
                                      double(kPulses), sc.cfg.kernel_fwhm_auto(),
                                      sc.cfg.kernel_fwhm_cross());
    const PairingPlan plan =
        build_pairing_plan(grid, k, gp, sc.cfg.run.modes_per_pair, sc.cfg.run.weight_floor);

    FrameSet fs = simulate_frames(plan, kPulses, kFrames, eta, sc.seed, sc.opts.workers);
    fs.save(sc.path("frames.bsvf").string());
    fs.export_csv(sc.path("frames.csv").string(), grid);
    {
        const FrameSet reread = FrameSet::load(sc.path("frames.bsvf").string());
        if (reread.counts != fs.counts || reread.plan_digest != fs.plan_digest)
            throw NumericError("validate: frame container round trip failed");
    }

    const PlanMoments moments = analytic_from_plan(plan, kPulses, eta);
    const std::size_t fixed_bin = grid.bin_of(sc.cfg.analysis.fixed_wavelength_nm);

    // --- difference-variance scan, empirical vs exact moments
    const ScanEstimate emp_scan = empirical_variance_scan(fs, grid, fixed_bin);
    const ScanCurve ana_scan = moments.variance_scan(fixed_bin);
    ZTally scan_tally;
    CsvWriter scan_csv(sc.path("validate_scan.csv").string());
    scan_csv.header("lambda_i_nm,nrf_empirical,nrf_se,nrf_analytic,z,artifact_flag");
    for (std::size_t b = 0; b < grid.size(); ++b) {
        const auto& er = emp_scan.rows[b];
        const auto& ar = ana_scan.rows[b];
        double z = 0.0;
        if (!er.artifact) {
            scan_tally.add(er.nrf, ar.nrf, er.nrf_se);
            z = er.nrf_se > 0 ? (er.nrf - ar.nrf) / er.nrf_se : 0.0;
        }
        scan_csv.field(er.lambda_i_nm).field(er.nrf).field(er.nrf_se).field(ar.nrf)
            .field(z).field(int(er.artifact));
        scan_csv.endrow();
    }

    // --- covariance map, empirical vs exact moments (jackknife errors)
    const EmpiricalCovarianceMap emp_map = empirical_covariance_map(fs, grid, false);
    const std::uint64_t F = fs.frames;
    std::vector<double> dev(std::size_t(fs.bins) * F);
    for (std::uint32_t b = 0; b < fs.bins; ++b) {
        double mean = 0.0;
        for (std::uint64_t f = 0; f < F; ++f) mean += double(fs.at(f, b));
        mean /= double(F);
        for (std::uint64_t f = 0; f < F; ++f)
            dev[std::size_t(b) * F + f] = double(fs.at(f, b)) - mean;
    }
    ZTally map_tally;
    std::vector<double> loo(F);
    for (std::uint32_t i = 0; i < fs.bins; ++i) {
        const double* di = &dev[std::size_t(i) * F];
        for (std::uint32_t jc = i; jc < fs.bins; ++jc) {
            const double* dj = &dev[std::size_t(jc) * F];
            double sab = 0.0;
            for (std::uint64_t f = 0; f < F; ++f) sab += di[f] * dj[f];
            for (std::uint64_t f = 0; f < F; ++f) {
                const double ab = di[f] * dj[f];
                loo[f] = ((sab - ab) - ab / double(F - 1)) / double(F - 2);
            }
            double mean_loo = 0.0;
            for (double v : loo) mean_loo += v;
            mean_loo /= double(F);
            double ssq = 0.0;
            for (double v : loo) ssq += (v - mean_loo) * (v - mean_loo);
            const double se = std::sqrt(double(F - 1) / double(F) * ssq);
            map_tally.add(emp_map.at(i, jc), moments.cov_at(i, jc), se);
        }
    }

    // --- loss model: a perfectly paired plan gives NRF = 1 - eta
    json nrf_checks = json::array();
    bool nrf_ok = true;
    {
        const std::size_t bi = grid.bin_of(702.4), bj = grid.bin_of(716.54);
        PairingPlan pair_plan{grid, {PlanEntry{std::uint32_t(bi), std::uint32_t(bj), 5, 20.0,
                                               SqueezeKind::Tmsv}}};
        int idx = 0;
        for (double eta_test : {0.2, 0.5, 1.0}) {
            const FrameSet pfs = simulate_frames(pair_plan, 50, 1000, eta_test,
                                                 sc.seed + 17 + std::uint64_t(idx++),
                                                 sc.opts.workers);
            const ScanEstimate se = empirical_variance_scan(pfs, grid, bi);
            const auto& row = se.rows[bj];
            const double expected = 1.0 - eta_test;
            bool ok;
            if (eta_test == 1.0)
                ok = row.nrf == 0.0;
            else
                ok = std::abs(row.nrf - expected) <= 3.0 * row.nrf_se;
            nrf_ok = nrf_ok && ok;
            json item;
            item["eta"] = eta_test;
            item["nrf"] = row.nrf;
            item["nrf_se"] = row.nrf_se;
            item["expected"] = expected;
            item["ok"] = ok;
            nrf_checks.push_back(item);
        }
    }

    const bool scan_ok = scan_tally.fraction() >= 0.99;
    const bool map_ok = map_tally.fraction() >= 0.99;
    const bool overall = scan_ok && map_ok && nrf_ok;

    json j;
    j["protocol"]["frames"] = kFrames;
    j["protocol"]["pulses_per_frame"] = kPulses;
    j["protocol"]["bins"] = grid.size();
    j["protocol"]["plan_entries"] = plan.entries.size();
    j["protocol"]["plan_digest"] = plan.digest();
    j["scan"]["pass_fraction"] = scan_tally.fraction();
    j["scan"]["bins_checked"] = scan_tally.total;
    j["scan"]["ok"] = scan_ok;
    j["map"]["pass_fraction"] = map_tally.fraction();
    j["map"]["pairs_checked"] = map_tally.total;
    j["map"]["ok"] = map_ok;
    j["nrf_loss"] = nrf_checks;
    j["overall_ok"] = overall;
    sc.write_summary(j);
    sc.write_manifest("validate");

    if (!overall) {
        std::cerr << "validate: Monte Carlo vs analytic agreement FAILED (scan "
                  << scan_tally.fraction() << ", map " << map_tally.fraction() << ")\n";
        return kExitValidationFailure;
    }
    return kExitOk;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {
        "spectrum", "width-vs-gain", "variance-scan", "covariance-map", "gain-fit",
        "validate"};
    return names;
}

int run_scenario(const std::string& name, const ExperimentConfig& cfg,
                 const std::string& out_dir, const RunOptions& opts) {
    try {
        cfg.validate();
        Scenario sc(cfg, opts, out_dir);
        if (name == "spectrum") return scenario_spectrum(sc);
        if (name == "width-vs-gain") return scenario_width_vs_gain(sc);
        if (name == "variance-scan") return scenario_variance_scan(sc);
        if (name == "covariance-map") return scenario_covariance_map(sc);
        if (name == "gain-fit") return scenario_gain_fit(sc);
        if (name == "validate") return scenario_validate(sc);
        std::cerr << "unknown scenario '" << name << "'; available:";
        for (const auto& n : scenario_names()) std::cerr << ' ' << n;
        std::cerr << "\n";
        return kExitConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
}

}  // namespace bsv
