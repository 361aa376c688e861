#include "bsv/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "bsv/constants.hpp"

namespace bsv {

double FitResult::value(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values[i];
    throw DomainError("FitResult: unknown parameter " + name);
}

double FitResult::error(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return errors[i];
    throw DomainError("FitResult: unknown parameter " + name);
}

namespace {

/// Solve A x = b for a small dense symmetric system (Gaussian elimination
/// with partial pivoting). Returns false on (near) singularity.
bool solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n,
                 std::vector<double>& x) {
    std::vector<std::size_t> piv(n);
    std::iota(piv.begin(), piv.end(), 0);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[best * n + col])) best = r;
        if (std::abs(a[best * n + col]) < 1e-300) return false;
        if (best != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[best * n + c]);
            std::swap(b[col], b[best]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * x[c];
        x[ri] = s / a[ri * n + ri];
    }
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

struct GnProblem {
    // Fills residuals r (model - data) and the Jacobian (row-major, n x p).
    std::function<bool(const std::vector<double>&, std::vector<double>&,
                       std::vector<double>&)> eval;
    std::function<bool(const std::vector<double>&)> feasible;  // parameter bounds
    std::size_t n_data = 0;
    std::size_t n_par = 0;
};

struct GnOutcome {
    std::vector<double> par;
    std::vector<double> se;
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;
};

double rss_of(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
}

/// Damped Gauss-Newton: full step first, then step halving until the residual
/// norm decreases. Stops on relative parameter change < 1e-10 or 200 rounds.
GnOutcome gauss_newton(const GnProblem& prob, std::vector<double> par) {
    GnOutcome out;
    const std::size_t p = prob.n_par;
    std::vector<double> r, jac, rtry, jtry;
    if (!prob.eval(par, r, jac)) {
        out.par = std::move(par);
        return out;
    }
    double rss = rss_of(r);

    for (int iter = 0; iter < 200; ++iter) {
        out.iterations = iter + 1;
        // Normal equations J^T J d = -J^T r.
        std::vector<double> jtj(p * p, 0.0), jtr(p, 0.0);
        for (std::size_t k = 0; k < prob.n_data; ++k) {
            for (std::size_t a = 0; a < p; ++a) {
                jtr[a] += jac[k * p + a] * r[k];
                for (std::size_t b = a; b < p; ++b)
                    jtj[a * p + b] += jac[k * p + a] * jac[k * p + b];
            }
        }
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < a; ++b) jtj[a * p + b] = jtj[b * p + a];
        std::vector<double> step;
        std::vector<double> rhs(p);
        for (std::size_t a = 0; a < p; ++a) rhs[a] = -jtr[a];
        if (!solve_dense(jtj, rhs, p, step)) break;

        double lambda = 1.0;
        bool improved = false;
        std::vector<double> trial(p);
        for (int half = 0; half < 40; ++half, lambda *= 0.5) {
            for (std::size_t a = 0; a < p; ++a) trial[a] = par[a] + lambda * step[a];
            if (prob.feasible && !prob.feasible(trial)) continue;
            if (!prob.eval(trial, rtry, jtry)) continue;
            const double rss_try = rss_of(rtry);
            if (rss_try <= rss) {
                improved = true;
                break;
            }
        }
        if (!improved) break;

        double rel = 0.0;
        for (std::size_t a = 0; a < p; ++a) {
            const double scale = std::max(std::abs(par[a]), 1e-30);
            rel = std::max(rel, std::abs(lambda * step[a]) / scale);
        }
        par = trial;
        r = rtry;
        jac = jtry;
        rss = rss_of(r);
        if (rel < 1e-10) {
            out.converged = true;
            break;
        }
    }

    out.par = par;
    out.rss = rss;
    // Linearized covariance sigma^2 (J^T J)^-1 at the optimum.
    out.se.assign(p, 0.0);
    if (prob.n_data > p) {
        const double sigma2 = rss / double(prob.n_data - p);
        std::vector<double> jtj(p * p, 0.0);
        for (std::size_t k = 0; k < prob.n_data; ++k)
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = 0; b < p; ++b)
                    jtj[a * p + b] += jac[k * p + a] * jac[k * p + b];
        // Invert column by column.
        bool ok = true;
        std::vector<double> inv_col, unit(p, 0.0);
        std::vector<double> cov_diag(p, 0.0);
        for (std::size_t c = 0; c < p && ok; ++c) {
            std::fill(unit.begin(), unit.end(), 0.0);
            unit[c] = 1.0;
            ok = solve_dense(jtj, unit, p, inv_col);
            if (ok) cov_diag[c] = inv_col[c];
        }
        if (ok)
            for (std::size_t a = 0; a < p; ++a)
                out.se[a] = cov_diag[a] > 0 ? std::sqrt(sigma2 * cov_diag[a]) : 0.0;
    }
    return out;
}

}  // namespace

FitResult fit_gain_curve(std::span<const double> power, std::span<const double> intensity) {
    if (power.size() != intensity.size() || power.size() < 3)
        throw DomainError("fit_gain_curve: need at least 3 (P, I) points");
    std::vector<std::size_t> order(power.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return power[a] < power[b]; });
    for (std::size_t k = 1; k < order.size(); ++k)
        if (power[order[k]] == power[order[k - 1]])
            throw DomainError("fit_gain_curve: powers must be distinct");
    for (std::size_t k = 0; k < power.size(); ++k)
        if (power[k] < 0 || intensity[k] < 0)
            throw DomainError("fit_gain_curve: powers and intensities must be >= 0");

    FitResult res;
    res.names = {"I0", "kappa"};
    res.values = {0.0, 0.0};
    res.errors = {0.0, 0.0};

    // Initialize from the high-power tail: ln I ~ ln(I0/4) + 2 kappa sqrt(P).
    std::vector<std::size_t> tail;
    for (std::size_t k = order.size() / 2; k < order.size(); ++k)
        if (intensity[order[k]] > 0) tail.push_back(order[k]);
    if (tail.size() < 2) {
        for (std::size_t k : order)
            if (intensity[k] > 0) tail.push_back(k);
    }
    std::sort(tail.begin(), tail.end());
    tail.erase(std::unique(tail.begin(), tail.end()), tail.end());
    if (tail.size() < 2) return res;  // kappa unidentifiable (e.g. all-zero data)

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k : tail) {
        const double xv = std::sqrt(power[k]);
        const double yv = std::log(intensity[k]);
        sx += xv;
        sy += yv;
        sxx += xv * xv;
        sxy += xv * yv;
    }
    const double nt = double(tail.size());
    const double det = nt * sxx - sx * sx;
    if (std::abs(det) < 1e-30) return res;
    const double slope = (nt * sxy - sx * sy) / det;
    const double icept = (sy * sxx - sx * sxy) / det;
    double kappa0 = std::max(slope / 2.0, 1e-6);
    double i00 = std::max(4.0 * std::exp(icept), 1e-300);

    GnProblem prob;
    prob.n_data = power.size();
    prob.n_par = 2;
    prob.feasible = [](const std::vector<double>& q) { return q[0] > 0 && q[1] > 0; };
    prob.eval = [&](const std::vector<double>& q, std::vector<double>& r,
                    std::vector<double>& jac) {
        const double i0 = q[0], kap = q[1];
        r.resize(power.size());
        jac.resize(power.size() * 2);
        for (std::size_t k = 0; k < power.size(); ++k) {
            const double sq = std::sqrt(power[k]);
            const double sh = std::sinh(kap * sq);
            if (!std::isfinite(sh)) return false;
            r[k] = i0 * sh * sh - intensity[k];
            jac[k * 2 + 0] = sh * sh;
            jac[k * 2 + 1] = i0 * std::sinh(2.0 * kap * sq) * sq;
        }
        return true;
    };

    const auto out = gauss_newton(prob, {i00, kappa0});
    res.values = out.par;
    res.errors = out.se;
    res.residual_norm = std::sqrt(out.rss);
    res.iterations = out.iterations;
    res.converged = out.converged;
    return res;
}

double gain_from_power(double kappa, double power) {
    if (kappa < 0 || power < 0)
        throw DomainError("gain_from_power: kappa and power must be >= 0");
    return kappa * std::sqrt(power);
}

FitResult fit_gaussian_feature(std::span<const double> x, std::span<const double> y,
                               FeatureKind kind, double window_nm) {
    if (x.size() != y.size() || x.size() < 5)
        throw DomainError("fit_gaussian_feature: need aligned samples (>= 5)");

    std::size_t ext = 0;
    for (std::size_t k = 1; k < y.size(); ++k) {
        if (kind == FeatureKind::Peak ? y[k] > y[ext] : y[k] < y[ext]) ext = k;
    }
    const double half_window = window_nm / 2.0;
    std::size_t lo = ext, hi = ext;
    while (lo > 0 && x[ext] - x[lo - 1] <= half_window) --lo;
    while (hi + 1 < x.size() && x[hi + 1] - x[ext] <= half_window) ++hi;
    const std::size_t nwin = hi - lo + 1;
    if (nwin < 5)
        throw ConfigError("fit_gaussian_feature: window must contain at least 5 bins");
    if (ext == lo || ext == hi)
        throw ConfigError("fit_gaussian_feature: feature extremum on the window edge");

    // Work on the negated curve for dips: one code path for both kinds.
    const double sign = kind == FeatureKind::Dip ? -1.0 : 1.0;
    std::vector<double> xs(x.begin() + long(lo), x.begin() + long(hi + 1));
    std::vector<double> ws(nwin);
    for (std::size_t k = 0; k < nwin; ++k) ws[k] = sign * y[lo + k];

    const std::size_t eloc = ext - lo;
    double b0 = 0.5 * (ws.front() + ws.back());
    double a0 = ws[eloc] - b0;
    if (a0 <= 0) a0 = std::max(1e-12, 0.1 * std::abs(b0));
    const double half = b0 + 0.5 * a0;
    double xl = xs.front(), xr = xs.back();
    for (std::size_t k = eloc; k-- > 0;)
        if (ws[k] <= half) {
            xl = xs[k] + (xs[k + 1] - xs[k]) * (half - ws[k]) / (ws[k + 1] - ws[k]);
            break;
        }
    for (std::size_t k = eloc + 1; k < nwin; ++k)
        if (ws[k] <= half) {
            xr = xs[k - 1] + (xs[k] - xs[k - 1]) * (half - ws[k - 1]) / (ws[k] - ws[k - 1]);
            break;
        }
    double f0 = xr - xl;
    if (!(f0 > 0)) f0 = (xs.back() - xs.front()) / 3.0;

    GnProblem prob;
    prob.n_data = nwin;
    prob.n_par = 4;
    prob.feasible = [](const std::vector<double>& q) { return q[3] > 0; };
    prob.eval = [&](const std::vector<double>& q, std::vector<double>& r,
                    std::vector<double>& jac) {
        const double b = q[0], a = q[1], c = q[2], f = q[3];
        r.resize(nwin);
        jac.resize(nwin * 4);
        for (std::size_t k = 0; k < nwin; ++k) {
            const double u = (xs[k] - c) / f;
            const double g = std::exp(-kFourLn2 * u * u);
            r[k] = b + a * g - ws[k];
            jac[k * 4 + 0] = 1.0;
            jac[k * 4 + 1] = g;
            jac[k * 4 + 2] = a * g * 2.0 * kFourLn2 * u / f;
            jac[k * 4 + 3] = a * g * 2.0 * kFourLn2 * u * u / f;
        }
        return true;
    };

    const auto out = gauss_newton(prob, {b0, a0, xs[eloc], f0});

    FitResult res;
    res.names = {"baseline", "amplitude", "center", "fwhm"};
    res.values = {sign * out.par[0], sign * out.par[1], out.par[2], std::abs(out.par[3])};
    res.errors = out.se;
    res.residual_norm = std::sqrt(out.rss);
    res.iterations = out.iterations;
    res.converged = out.converged;
    res.low_significance = out.se[1] > 0 && std::abs(out.par[1]) < 2.0 * out.se[1];
    return res;
}

namespace {

struct JackknifeAccumulator {
    // Centered second-moment sums for one bin pair over frames.
    std::vector<double> a;  // deviations of the fixed bin
    std::vector<double> b;  // deviations of the scanned bin
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    double mean_a = 0.0, mean_b = 0.0;
};

double jackknife_se(const std::vector<double>& loo) {
    const double f = double(loo.size());
    double mean = 0.0;
    for (double v : loo) mean += v;
    mean /= f;
    double s = 0.0;
    for (double v : loo) s += (v - mean) * (v - mean);
    return std::sqrt((f - 1.0) / f * s);
}

}  // namespace

ScanEstimate empirical_variance_scan(const FrameSet& frames, const SpectralGrid& grid,
                                     std::size_t fixed_bin) {
    if (grid.size() != frames.bins)
        throw DomainError("empirical_variance_scan: grid does not match the frame set");
    if (fixed_bin >= frames.bins)
        throw DomainError("empirical_variance_scan: fixed bin outside the frame set");
    if (frames.frames < 2)
        throw NumericError("empirical_variance_scan: need at least 2 frames");

    const std::uint64_t F = frames.frames;
    const double fd = double(F);

    std::vector<double> s(F);
    double mean_s = 0.0;
    for (std::uint64_t f = 0; f < F; ++f) {
        s[f] = double(frames.at(f, std::uint32_t(fixed_bin)));
        mean_s += s[f];
    }
    mean_s /= fd;

    ScanEstimate est;
    est.lambda_s_nm = grid.center(fixed_bin);
    est.frames_used = F;
    est.rows.reserve(frames.bins);

    std::vector<double> loo_nrf(F), loo_cov(F), c(F), d(F);
    for (std::uint32_t bb = 0; bb < frames.bins; ++bb) {
        ScanEstimateRow row;
        row.lambda_i_nm = grid.center(bb);
        row.mean_s = mean_s;

        double mean_c = 0.0;
        for (std::uint64_t f = 0; f < F; ++f) {
            c[f] = double(frames.at(f, bb));
            mean_c += c[f];
        }
        mean_c /= fd;
        row.mean_i = mean_c;

        // Centered sums (two-pass; difference taken per frame so the
        // squeezed-dip cancellation happens before any squaring).
        double sdd = 0.0, sac = 0.0, saa = 0.0, scc = 0.0, sum_d = 0.0;
        for (std::uint64_t f = 0; f < F; ++f) {
            const double av = s[f] - mean_s;
            const double cv = c[f] - mean_c;
            d[f] = av - cv;
            sum_d += d[f];
            sdd += d[f] * d[f];
            sac += av * cv;
            saa += av * av;
            scc += cv * cv;
        }
        (void)saa;
        (void)scc;

        const bool self = bb == fixed_bin;
        row.artifact = self;
        row.covariance = sac / (fd - 1.0);
        const double var_d = sdd / (fd - 1.0);
        const double denom = mean_s + mean_c;
        row.nrf = self ? 0.0 : (denom > 0 ? var_d / denom : 0.0);

        // Jackknife over frames for both statistics.
        for (std::uint64_t f = 0; f < F; ++f) {
            const double av = s[f] - mean_s;
            const double cv = c[f] - mean_c;
            const double cov_loo =
                ((sac - av * cv) - av * cv / (fd - 1.0)) / (fd - 2.0);
            loo_cov[f] = cov_loo;
            if (self) {
                loo_nrf[f] = 0.0;
                continue;
            }
            const double dv = d[f];
            const double var_loo =
                ((sdd - dv * dv) - dv * dv / (fd - 1.0)) / (fd - 2.0);
            const double ms_loo = (mean_s * fd - s[f]) / (fd - 1.0);
            const double mc_loo = (mean_c * fd - c[f]) / (fd - 1.0);
            const double den_loo = ms_loo + mc_loo;
            loo_nrf[f] = den_loo > 0 ? var_loo / den_loo : 0.0;
        }
        row.nrf_se = self ? 0.0 : jackknife_se(loo_nrf);
        row.covariance_se = jackknife_se(loo_cov);
        est.rows.push_back(row);
    }
    return est;
}

EmpiricalCovarianceMap empirical_covariance_map(const FrameSet& frames,
                                                const SpectralGrid& grid,
                                                bool normalize_to_max) {
    if (grid.size() != frames.bins)
        throw DomainError("empirical_covariance_map: grid does not match the frame set");
    if (frames.frames < 2)
        throw NumericError("empirical_covariance_map: need at least 2 frames");

    const std::uint64_t F = frames.frames;
    const std::uint32_t B = frames.bins;

    // Transposed, centered copy: one contiguous run of frames per bin.
    std::vector<double> dev(std::size_t(B) * F);
    for (std::uint32_t b = 0; b < B; ++b) {
        double mean = 0.0;
        for (std::uint64_t f = 0; f < F; ++f) mean += double(frames.at(f, b));
        mean /= double(F);
        for (std::uint64_t f = 0; f < F; ++f)
            dev[std::size_t(b) * F + f] = double(frames.at(f, b)) - mean;
    }

    EmpiricalCovarianceMap map{grid, std::vector<double>(std::size_t(B) * B, 0.0), 1.0};
    for (std::uint32_t i = 0; i < B; ++i) {
        const double* di = &dev[std::size_t(i) * F];
        for (std::uint32_t j = i; j < B; ++j) {
            const double* dj = &dev[std::size_t(j) * F];
            double sum = 0.0;
            for (std::uint64_t f = 0; f < F; ++f) sum += di[f] * dj[f];
            const double covv = sum / double(F - 1);
            map.values[std::size_t(i) * B + j] = covv;
            map.values[std::size_t(j) * B + i] = covv;
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

}  // namespace bsv
