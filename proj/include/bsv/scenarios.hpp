#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bsv/config.hpp"

namespace bsv {

/// Exit statuses shared by the library entry point and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;
inline constexpr int kExitValidationFailure = 4;

struct RunOptions {
    std::optional<std::uint64_t> seed;  // overrides run.seed
    unsigned workers = 1;
    bool coarse = false;  // decimate map grids x10 for fast runs
};

/// Run one scenario and write its artifacts (CSV/JSON plus manifest.txt) into
/// `out_dir`. Returns one of the kExit* codes; diagnostic text goes to stderr.
/// Scenarios: spectrum, width-vs-gain, variance-scan, covariance-map,
/// gain-fit, validate.
int run_scenario(const std::string& name, const ExperimentConfig& cfg,
                 const std::string& out_dir, const RunOptions& opts = {});

/// The scenario name list, for usage text.
const std::vector<std::string>& scenario_names();

}  // namespace bsv
