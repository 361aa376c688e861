#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsv/pairing.hpp"
#include "bsv/photon_stats.hpp"

namespace bsv {

/// Monte Carlo detector output: per-frame, per-bin integrated photon counts.
/// Regenerating with the same plan, parameters and seed reproduces identical
/// counts regardless of the worker count.
struct FrameSet {
    std::uint64_t frames = 0;
    std::uint32_t bins = 0;
    std::uint32_t pulses_per_frame = 0;
    std::uint64_t seed = 0;
    std::uint64_t plan_digest = 0;
    std::vector<std::uint32_t> counts;  // frames x bins, row-major

    std::uint32_t at(std::uint64_t frame, std::uint32_t bin) const {
        return counts[frame * bins + bin];
    }

    /// Little-endian binary container (magic, version, header, raw counts).
    void save(const std::string& path) const;
    static FrameSet load(const std::string& path);
    /// Sidecar CSV export: frame index column plus one column per bin.
    void export_csv(const std::string& path, const SpectralGrid& grid) const;
};

/// Generate detector frames from the plan: per frame, per pulse, per mode,
/// draw the entry's squeezed-vacuum sampler, thin each arm independently with
/// quantum efficiency eta and accumulate into the bins. The RNG substream of
/// every (frame, entry) pair is derived from the master seed by a counter
/// construction, so results are independent of the number of workers. Counts
/// are accumulated in 64-bit and must fit the 32-bit container per bin.
FrameSet simulate_frames(const PairingPlan& plan, std::uint32_t pulses_per_frame,
                         std::uint64_t frames, double eta, std::uint64_t seed,
                         unsigned workers = 1);

/// Exact per-frame moments implied by a plan: no sampling involved.
struct PlanMoments {
    SpectralGrid grid;
    std::vector<double> mean;      // photons per frame per bin (after loss)
    std::vector<double> variance;  // photons^2 per bin
    std::vector<double> cov;       // bins x bins, diagonal = variance

    double cov_at(std::size_t i, std::size_t j) const { return cov[i * grid.size() + j]; }
    /// Difference-variance scan against a fixed bin, expressed through the
    /// same variance_difference contract the kernel model uses.
    ScanCurve variance_scan(std::size_t fixed_bin,
                            ScanNormalization norm = ScanNormalization::ShotNoise) const;
};

/// Closed-form first and second moments of the frame counts for a plan
/// (geometric / SMSV moments combined with binomial thinning algebra).
PlanMoments analytic_from_plan(const PairingPlan& plan, std::uint32_t pulses_per_frame,
                               double eta);

}  // namespace bsv
