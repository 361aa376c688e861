#include "bsv/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <utility>

#include "bsv/constants.hpp"
#include "bsv/rng.hpp"

namespace bsv {

void PairingPlan::validate(double lambda_degenerate_nm) const {
    const bool deg_on_grid = grid.contains(lambda_degenerate_nm);
    const std::size_t deg_bin = deg_on_grid ? grid.bin_of(lambda_degenerate_nm) : grid.size();
    for (const auto& e : entries) {
        if (e.bin_i >= grid.size() || e.bin_j >= grid.size())
            throw ConfigError("pairing plan: entry bin index outside the grid");
        if (e.multiplicity < 1) throw ConfigError("pairing plan: multiplicity must be >= 1");
        if (e.n_per_mode < 0) throw ConfigError("pairing plan: negative photon number");
        if (e.kind == SqueezeKind::Smsv && (e.bin_i != e.bin_j || e.bin_i != deg_bin))
            throw ConfigError("pairing plan: SMSV allowed only on the degenerate self-pair");
        if (e.kind == SqueezeKind::Tmsv && e.bin_i == e.bin_j)
            throw ConfigError("pairing plan: TMSV self-pair is forbidden");
    }
}

std::uint64_t PairingPlan::digest() const {
    // Commutative accumulation keeps the digest storage-order independent.
    std::uint64_t acc = 0x42b5e3a51289ULL ^ (std::uint64_t(grid.size()) << 32);
    for (const auto& e : entries) {
        std::uint64_t s = (std::uint64_t(e.bin_i) << 40) ^ (std::uint64_t(e.bin_j) << 16) ^
                          (std::uint64_t(e.multiplicity) << 2) ^ std::uint64_t(e.kind);
        std::uint64_t nbits;
        static_assert(sizeof(double) == sizeof(nbits));
        std::memcpy(&nbits, &e.n_per_mode, sizeof(nbits));
        s ^= nbits * 0x9e3779b97f4a7c15ULL;
        acc += splitmix64(s);
    }
    return acc;
}

std::vector<double> PairingPlan::modes_per_bin() const {
    std::vector<double> m(grid.size(), 0.0);
    for (const auto& e : entries) {
        m[e.bin_i] += e.multiplicity;
        if (e.bin_j != e.bin_i) m[e.bin_j] += e.multiplicity;
    }
    return m;
}

namespace {

/// Mass of a Gaussian (FWHM `fwhm`, centred at `mu`) over [lo, hi].
double gaussian_mass(double lo, double hi, double mu, double fwhm) {
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const double a = (lo - mu) / (std::sqrt(2.0) * sigma);
    const double b = (hi - mu) / (std::sqrt(2.0) * sigma);
    return 0.5 * (std::erf(b) - std::erf(a));
}

}  // namespace

PairingPlan build_pairing_plan(const SpectralGrid& grid, const CorrelationKernel& kernel,
                               const GainPoint& gain, int modes_per_pair,
                               double weight_floor) {
    if (modes_per_pair < 1)
        throw ConfigError("run.modes_per_pair: must be >= 1");
    if (gain.n_per_mode.size() != grid.size())
        throw ConfigError("pairing plan: gain point does not match the grid");
    const double lambda_deg = kernel.lambda_degenerate_nm;
    const double omega_pump = kernel.omega_pump;
    const double envelope_fwhm = 2.0 * kernel.fwhm_cross;  // sum-frequency FWHM

    // weights[{i,j}] accumulates the envelope mass, pairs keyed i <= j.
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> weights;

    constexpr int kQuad = 64;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        // Integrate over the part of bin i below the degeneracy: each pair is
        // counted once, through its short-wavelength leg.
        const double lo = grid.lo_edge(i);
        const double hi = std::min(grid.hi_edge(i), lambda_deg);
        if (hi <= lo) continue;
        const double slice = (hi - lo) / kQuad;
        for (int q = 0; q < kQuad; ++q) {
            const double lam = lo + (q + 0.5) * slice;
            const double mu = omega_pump - omega_from_nm(lam);  // partner frequency
            for (std::size_t j = 0; j < grid.size(); ++j) {
                // Partner bin edges in angular frequency (descending in lambda).
                const double w_hi = omega_from_nm(grid.lo_edge(j));
                const double w_lo = omega_from_nm(grid.hi_edge(j));
                if (mu + 4.0 * envelope_fwhm < w_lo || mu - 4.0 * envelope_fwhm > w_hi)
                    continue;
                const double mass = gaussian_mass(w_lo, w_hi, mu, envelope_fwhm);
                if (mass <= 0.0) continue;
                const auto a = std::uint32_t(std::min(i, j));
                const auto b = std::uint32_t(std::max(i, j));
                weights[{a, b}] += mass * slice / grid.bin_width();
            }
        }
    }

    const bool deg_on_grid = grid.contains(lambda_deg);
    const std::size_t deg_bin = deg_on_grid ? grid.bin_of(lambda_deg) : grid.size();

    PairingPlan plan{grid, {}};
    for (const auto& [key, w] : weights) {
        if (w < weight_floor) continue;
        const auto [a, b] = key;
        PlanEntry e;
        e.bin_i = a;
        e.bin_j = b;
        if (a == b) {
            // Self-pairs other than the degenerate bin are residual envelope
            // tails; the spectral decomposition assigns them no mode family.
            if (a != deg_bin) continue;
            e.kind = SqueezeKind::Smsv;
        } else {
            e.kind = SqueezeKind::Tmsv;
        }
        const auto mult = std::lround(double(modes_per_pair) * w);
        if (mult < 1) continue;
        e.multiplicity = std::uint32_t(mult);
        e.n_per_mode = std::sqrt(gain.n_per_mode[a] * gain.n_per_mode[b]);
        plan.entries.push_back(e);
    }
    if (plan.entries.empty())
        throw ConfigError("pairing plan: no entries above the weight floor; lower "
                          "run.weight_floor or widen the grid");
    plan.validate(lambda_deg);
    return plan;
}

}  // namespace bsv
