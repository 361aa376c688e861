#include "bsv/frames.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <thread>

#include "bsv/rng.hpp"
#include "bsv/sampling.hpp"

namespace bsv {

namespace {

constexpr char kMagic[4] = {'B', 'S', 'V', 'F'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint64_t entry_key(const PlanEntry& e) {
    std::uint64_t s = (std::uint64_t(e.bin_i) << 34) ^ (std::uint64_t(e.bin_j) << 4) ^
                      std::uint64_t(e.kind);
    return splitmix64(s);
}

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void FrameSet::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericError("FrameSet::save: cannot open " + path);
    out.write(kMagic, 4);
    write_pod(out, kFormatVersion);
    write_pod(out, frames);
    write_pod(out, std::uint64_t(bins));
    write_pod(out, pulses_per_frame);
    write_pod(out, seed);
    write_pod(out, plan_digest);
    out.write(reinterpret_cast<const char*>(counts.data()),
              std::streamsize(counts.size() * sizeof(std::uint32_t)));
    if (!out) throw NumericError("FrameSet::save: write failed for " + path);
}

FrameSet FrameSet::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NumericError("FrameSet::load: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw NumericError("FrameSet::load: bad magic in " + path);
    std::uint32_t version = 0;
    read_pod(in, version);
    if (version != kFormatVersion)
        throw NumericError("FrameSet::load: unsupported format version");
    FrameSet fs;
    std::uint64_t bins64 = 0;
    read_pod(in, fs.frames);
    read_pod(in, bins64);
    read_pod(in, fs.pulses_per_frame);
    read_pod(in, fs.seed);
    read_pod(in, fs.plan_digest);
    fs.bins = std::uint32_t(bins64);
    fs.counts.resize(fs.frames * fs.bins);
    in.read(reinterpret_cast<char*>(fs.counts.data()),
            std::streamsize(fs.counts.size() * sizeof(std::uint32_t)));
    if (!in) throw NumericError("FrameSet::load: truncated file " + path);
    return fs;
}

void FrameSet::export_csv(const std::string& path, const SpectralGrid& grid) const {
    if (grid.size() != bins) throw NumericError("FrameSet::export_csv: grid mismatch");
    std::ofstream out(path);
    if (!out) throw NumericError("FrameSet::export_csv: cannot open " + path);
    out << "frame";
    char buf[64];
    for (std::uint32_t b = 0; b < bins; ++b) {
        std::snprintf(buf, sizeof buf, ",%.6g", grid.center(b));
        out << buf;
    }
    out << "\n";
    for (std::uint64_t f = 0; f < frames; ++f) {
        out << f;
        for (std::uint32_t b = 0; b < bins; ++b) out << ',' << at(f, b);
        out << "\n";
    }
}

FrameSet simulate_frames(const PairingPlan& plan, std::uint32_t pulses_per_frame,
                         std::uint64_t frames, double eta, std::uint64_t seed,
                         unsigned workers) {
    if (frames < 1 || pulses_per_frame < 1)
        throw ConfigError("simulate_frames: frames and pulses_per_frame must be >= 1");
    if (!(eta > 0.0 && eta <= 1.0))
        throw ConfigError("simulate_frames: eta must be in (0, 1]");
    if (workers < 1) workers = 1;

    const std::size_t nbins = plan.grid.size();
    FrameSet fs;
    fs.frames = frames;
    fs.bins = std::uint32_t(nbins);
    fs.pulses_per_frame = pulses_per_frame;
    fs.seed = seed;
    fs.plan_digest = plan.digest();
    fs.counts.assign(frames * nbins, 0);

    // SMSV tables are immutable after construction and shared across workers.
    std::vector<SmsvSampler> smsv;
    std::vector<std::size_t> smsv_index(plan.entries.size(), SIZE_MAX);
    for (std::size_t e = 0; e < plan.entries.size(); ++e) {
        if (plan.entries[e].kind == SqueezeKind::Smsv) {
            smsv_index[e] = smsv.size();
            smsv.emplace_back(plan.entries[e].n_per_mode);
        }
    }
    std::vector<std::uint64_t> keys(plan.entries.size());
    for (std::size_t e = 0; e < plan.entries.size(); ++e) keys[e] = entry_key(plan.entries[e]);

    constexpr std::uint64_t kMaxCount = std::numeric_limits<std::uint32_t>::max();

    auto run_frames = [&](std::uint64_t f_lo, std::uint64_t f_hi) {
        std::vector<std::uint64_t> acc(nbins);
        for (std::uint64_t f = f_lo; f < f_hi; ++f) {
            std::fill(acc.begin(), acc.end(), 0);
            for (std::size_t e = 0; e < plan.entries.size(); ++e) {
                const auto& entry = plan.entries[e];
                Rng rng = make_substream(seed, f, keys[e]);
                const std::uint64_t draws =
                    std::uint64_t(pulses_per_frame) * entry.multiplicity;
                if (entry.kind == SqueezeKind::Tmsv) {
                    for (std::uint64_t d = 0; d < draws; ++d) {
                        const auto [ns, ni] = sample_tmsv(entry.n_per_mode, rng);
                        acc[entry.bin_i] += std::uint64_t(thin(ns, eta, rng));
                        acc[entry.bin_j] += std::uint64_t(thin(ni, eta, rng));
                    }
                } else {
                    const auto& sampler = smsv[smsv_index[e]];
                    for (std::uint64_t d = 0; d < draws; ++d) {
                        const std::int64_t n = sampler(rng);
                        acc[entry.bin_i] += std::uint64_t(thin(n, eta, rng));
                    }
                }
            }
            for (std::size_t b = 0; b < nbins; ++b) {
                if (acc[b] > kMaxCount)
                    throw NumericError("simulate_frames: bin count overflows the 32-bit "
                                       "frame container");
                fs.counts[f * nbins + b] = std::uint32_t(acc[b]);
            }
        }
    };

    if (workers == 1 || frames < 2 * workers) {
        run_frames(0, frames);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::uint64_t chunk = (frames + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t lo = std::min<std::uint64_t>(w * chunk, frames);
            const std::uint64_t hi = std::min<std::uint64_t>(lo + chunk, frames);
            pool.emplace_back([&, lo, hi, w] {
                try {
                    run_frames(lo, hi);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);
    }
    return fs;
}

PlanMoments analytic_from_plan(const PairingPlan& plan, std::uint32_t pulses_per_frame,
                               double eta) {
    if (!(eta > 0.0 && eta <= 1.0))
        throw ConfigError("analytic_from_plan: eta must be in (0, 1]");
    const std::size_t n = plan.grid.size();
    PlanMoments m{plan.grid, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                  std::vector<double>(n * n, 0.0)};

    for (const auto& e : plan.entries) {
        const double c = double(e.multiplicity) * double(pulses_per_frame);
        const double N = e.n_per_mode;
        if (e.kind == SqueezeKind::Tmsv) {
            // Thermal marginal per arm: Var = eta N + eta^2 N^2;
            // cross-arm covariance survives thinning as eta^2 (N^2 + N).
            const double mean = eta * N;
            const double var = eta * N + eta * eta * N * N;
            const double cov = eta * eta * (N * N + N);
            m.mean[e.bin_i] += c * mean;
            m.mean[e.bin_j] += c * mean;
            m.variance[e.bin_i] += c * var;
            m.variance[e.bin_j] += c * var;
            m.cov[e.bin_i * n + e.bin_j] += c * cov;
            m.cov[e.bin_j * n + e.bin_i] += c * cov;
        } else {
            // SMSV: Var(n) = 2N^2 + 2N before loss, so after thinning
            // Var = eta(1-eta) N + eta^2 (2N^2 + 2N) = eta N + eta^2 (2N^2 + N).
            m.mean[e.bin_i] += c * eta * N;
            m.variance[e.bin_i] += c * (eta * N + eta * eta * (2.0 * N * N + N));
        }
    }
    for (std::size_t b = 0; b < n; ++b) m.cov[b * n + b] = m.variance[b];
    return m;
}

ScanCurve PlanMoments::variance_scan(std::size_t fixed_bin, ScanNormalization norm) const {
    const std::size_t n = grid.size();
    if (fixed_bin >= n) throw DomainError("variance_scan: fixed bin outside the grid");
    ScanCurve curve;
    curve.lambda_s_nm = grid.center(fixed_bin);
    curve.normalization = norm;
    curve.rows.reserve(n);
    const double ms = mean[fixed_bin];
    for (std::size_t b = 0; b < n; ++b) {
        ScanRow row;
        row.lambda_i_nm = grid.center(b);
        row.mean_s = ms;
        row.mean_i = mean[b];
        if (b == fixed_bin) {
            row.artifact = true;
        } else if (ms > 0.0 && mean[b] > 0.0) {
            // Express the plan moments as effective correlation factors and
            // route them through the shared Eq.-of-motion for Var(Ns - Ni).
            const double g2ss = 1.0 + (variance[fixed_bin] - ms) / (ms * ms);
            const double g2ii = 1.0 + (variance[b] - mean[b]) / (mean[b] * mean[b]);
            const double g2si = 1.0 + cov_at(fixed_bin, b) / (ms * mean[b]);
            row.var_diff = variance_difference(ms, mean[b], g2ss, g2ii, g2si, 1.0);
            row.nrf = row.var_diff / (ms + mean[b]);
        } else {
            // A bin without modes contributes only the other arm's noise.
            row.var_diff = variance[fixed_bin] + variance[b];
            const double denom = ms + mean[b];
            row.nrf = denom > 0 ? row.var_diff / denom : 0.0;
        }
        curve.rows.push_back(row);
    }
    if (norm == ScanNormalization::MaxValue) {
        double vmax = 0.0;
        for (const auto& r : curve.rows)
            if (!r.artifact) vmax = std::max(vmax, r.var_diff);
        if (vmax > 0)
            for (auto& r : curve.rows) r.nrf = r.var_diff / vmax;
    }
    return curve;
}

}  // namespace bsv
