#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bsv/errors.hpp"
#include "bsv/rng.hpp"

namespace bsv {

/// One two-mode squeezed vacuum draw: both arms carry the same photon number
/// n, with P(n) = N^n / (1+N)^(n+1) (geometric, mean N).
std::pair<std::int64_t, std::int64_t> sample_tmsv(double n_mean, Rng& rng);

/// Single-mode squeezed vacuum photon numbers ("light with even photon
/// numbers"): P(2k) = (2k)! / (2^k k!)^2 * tanh^{2k}(r) / cosh(r) with
/// r = asinh(sqrt(N)). Sampling is inverse-CDF over a table extended until
/// the cumulative mass reaches 1 - 1e-12.
class SmsvSampler {
public:
    explicit SmsvSampler(double n_mean);

    std::int64_t operator()(Rng& rng) const;

    double mean() const { return n_mean_; }
    /// P(n = 2k); zero for odd arguments by construction.
    double pmf(std::int64_t n) const;
    std::int64_t max_tabulated() const { return 2 * (std::int64_t(cdf_.size()) - 1); }

private:
    double n_mean_;
    std::vector<double> cdf_;  // cdf_[k] = P(n <= 2k)
};

/// Convenience single draw (builds the CDF table; prefer SmsvSampler in loops).
std::int64_t sample_smsv(double n_mean, Rng& rng);

/// Binomial detection loss: keeps each of n photons with probability eta.
std::int64_t thin(std::int64_t n, double eta, Rng& rng);

}  // namespace bsv
