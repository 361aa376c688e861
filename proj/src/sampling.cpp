#include "bsv/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace bsv {

std::pair<std::int64_t, std::int64_t> sample_tmsv(double n_mean, Rng& rng) {
    if (n_mean < 0) throw DomainError("sample_tmsv: mean photon number must be >= 0");
    if (n_mean == 0.0) return {0, 0};
    // P(n) = (1-q) q^n with q = N / (1+N).
    std::geometric_distribution<std::int64_t> geom(1.0 / (1.0 + n_mean));
    const std::int64_t n = geom(rng);
    return {n, n};
}

SmsvSampler::SmsvSampler(double n_mean) : n_mean_(n_mean) {
    if (n_mean < 0) throw DomainError("SmsvSampler: mean photon number must be >= 0");
    if (n_mean == 0.0) {
        cdf_ = {1.0};
        return;
    }
    // tanh^2(r) = N/(N+1) and 1/cosh(r) = 1/sqrt(1+N) for r = asinh(sqrt(N)).
    const double q = n_mean / (n_mean + 1.0);
    double p = 1.0 / std::sqrt(1.0 + n_mean);  // P(0)
    double cum = p;
    cdf_.push_back(cum);
    // P(2k+2) = P(2k) * q * (2k+1) / (2k+2)
    for (std::int64_t k = 0; cum < 1.0 - 1e-12; ++k) {
        p *= q * double(2 * k + 1) / double(2 * k + 2);
        cum += p;
        cdf_.push_back(cum);
        if (cdf_.size() > 200'000'000)
            throw NumericError("SmsvSampler: CDF table would exceed sane bounds");
    }
}

std::int64_t SmsvSampler::operator()(Rng& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double u = uni(rng);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    const auto k = it == cdf_.end() ? cdf_.size() - 1
                                    : std::size_t(std::distance(cdf_.begin(), it));
    return 2 * std::int64_t(k);
}

double SmsvSampler::pmf(std::int64_t n) const {
    if (n < 0 || n % 2 != 0) return 0.0;
    const auto k = std::size_t(n / 2);
    if (k >= cdf_.size()) return 0.0;
    return k == 0 ? cdf_[0] : cdf_[k] - cdf_[k - 1];
}

std::int64_t sample_smsv(double n_mean, Rng& rng) {
    return SmsvSampler(n_mean)(rng);
}

std::int64_t thin(std::int64_t n, double eta, Rng& rng) {
    if (n < 0) throw DomainError("thin: photon number must be >= 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("thin: eta must be in (0, 1]");
    if (n == 0 || eta == 1.0) return n;
    std::binomial_distribution<std::int64_t> bin(n, eta);
    return bin(rng);
}

}  // namespace bsv
