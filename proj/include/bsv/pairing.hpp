#pragma once

#include <cstdint>
#include <vector>

#include "bsv/gain_model.hpp"
#include "bsv/grid.hpp"
#include "bsv/photon_stats.hpp"

namespace bsv {

enum class SqueezeKind : std::uint8_t { Tmsv = 0, Smsv = 1 };

/// One family of identical squeezed modes binding a pair of grid bins.
struct PlanEntry {
    std::uint32_t bin_i = 0;
    std::uint32_t bin_j = 0;
    std::uint32_t multiplicity = 0;  // modes per pulse of this family
    double n_per_mode = 0.0;
    SqueezeKind kind = SqueezeKind::Tmsv;
};

/// The generative model behind the frame simulation: unordered bin pairs,
/// each carrying `multiplicity` independent squeezed modes per pulse. The
/// degenerate self-pair (and only that one) is single-mode squeezed vacuum.
struct PairingPlan {
    SpectralGrid grid;
    std::vector<PlanEntry> entries;

    void validate(double lambda_degenerate_nm) const;
    /// Order-independent content hash (entry identity, not storage order).
    std::uint64_t digest() const;
    /// Modes per pulse landing in each bin (self-pairs count once).
    std::vector<double> modes_per_bin() const;
};

/// Discretize the pump-envelope pairing onto the grid. Every conjugate mode
/// pair is counted once, through its short-wavelength leg: for each bin the
/// sub-degenerate wavelengths are integrated over the bin, and the partner's
/// Gaussian sum-frequency envelope (FWHM = 2 * kernel.fwhm_cross) is resolved
/// into partner-bin masses. multiplicity = round(modes_per_pair * weight);
/// weights below `weight_floor` are dropped. Throws ConfigError for an empty
/// result.
PairingPlan build_pairing_plan(const SpectralGrid& grid, const CorrelationKernel& kernel,
                               const GainPoint& gain, int modes_per_pair,
                               double weight_floor = 1e-3);

}  // namespace bsv
