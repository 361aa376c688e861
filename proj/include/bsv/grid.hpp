#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bsv/errors.hpp"

namespace bsv {

/// Uniform wavelength binning. Bin centers are strictly increasing and evenly
/// spaced by `bin_width_nm`; bins are contiguous intervals of that width.
class SpectralGrid {
public:
    SpectralGrid(double lo_nm, double hi_nm, double bin_width_nm) {
        if (!(bin_width_nm > 0)) throw ConfigError("grid.bin_nm: must be > 0");
        if (!(hi_nm > lo_nm)) throw ConfigError("grid: max_nm must exceed min_nm");
        const auto n = static_cast<std::size_t>(std::floor((hi_nm - lo_nm) / bin_width_nm + 1e-9)) + 1;
        if (n < 3) throw ConfigError("grid: needs at least 3 bins");
        width_ = bin_width_nm;
        centers_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) centers_.push_back(lo_nm + double(i) * bin_width_nm);
    }

    std::size_t size() const { return centers_.size(); }
    double center(std::size_t i) const { return centers_[i]; }
    const std::vector<double>& centers() const { return centers_; }
    double bin_width() const { return width_; }
    double lo_edge(std::size_t i) const { return centers_[i] - 0.5 * width_; }
    double hi_edge(std::size_t i) const { return centers_[i] + 0.5 * width_; }

    /// Index of the bin whose interval contains `lambda_nm`.
    std::size_t bin_of(double lambda_nm) const {
        const double x = (lambda_nm - centers_.front()) / width_;
        const auto i = static_cast<long>(std::lround(x));
        if (i < 0 || i >= static_cast<long>(centers_.size()) ||
            std::abs(lambda_nm - centers_[static_cast<std::size_t>(i)]) > 0.5 * width_ + 1e-9)
            throw DomainError("wavelength not covered by the spectral grid");
        return static_cast<std::size_t>(i);
    }

    bool contains(double lambda_nm) const {
        return lambda_nm >= lo_edge(0) - 1e-9 && lambda_nm <= hi_edge(size() - 1) + 1e-9;
    }

private:
    std::vector<double> centers_;
    double width_ = 0.0;
};

}  // namespace bsv
