#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathgibbs {

// A d-dimensional path sampled on a uniform dyadic grid over [t0,t1]:
// 2^level steps, 2^level + 1 points, row-major storage (point-major).
class GridPath {
public:
    GridPath() = default;

    GridPath(double t0, double t1, int level, int dim)
        : t0_(t0), t1_(t1), level_(level), dim_(dim),
          values_((static_cast<std::size_t>(1) << level) * dim + dim, 0.0) {
        if (!(t0 < t1)) throw std::invalid_argument("GridPath: need t0 < t1");
        if (level < 0 || level > 30) throw std::invalid_argument("GridPath: bad level");
        if (dim < 1) throw std::invalid_argument("GridPath: bad dim");
    }

    double t0() const { return t0_; }
    double t1() const { return t1_; }
    int level() const { return level_; }
    int dim() const { return dim_; }
    std::size_t steps() const { return static_cast<std::size_t>(1) << level_; }
    std::size_t points() const { return steps() + 1; }
    double dt() const { return (t1_ - t0_) / static_cast<double>(steps()); }
    double time_at(std::size_t k) const { return t0_ + static_cast<double>(k) * dt(); }

    double& at(std::size_t k, int i) { return values_[k * dim_ + i]; }
    double at(std::size_t k, int i) const { return values_[k * dim_ + i]; }
    const double* point(std::size_t k) const { return values_.data() + k * dim_; }
    double* point(std::size_t k) { return values_.data() + k * dim_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    void check_index(std::size_t k) const {
        if (k >= points()) throw std::out_of_range("GridPath: index out of range");
    }

    // Index of a time on the grid; rejects off-grid times (no interpolation).
    std::size_t index_of_time(double t) const {
        double pos = (t - t0_) / dt();
        double r = std::round(pos);
        if (std::abs(pos - r) > 1e-9 || r < 0 || r > static_cast<double>(steps()))
            throw std::invalid_argument("GridPath: time not on grid");
        return static_cast<std::size_t>(r);
    }

    // Keep every 2^(level-new_level)-th point.
    GridPath subsample(int new_level) const {
        if (new_level < 0 || new_level > level_)
            throw std::invalid_argument("GridPath: bad subsample level");
        GridPath out(t0_, t1_, new_level, dim_);
        std::size_t stride = static_cast<std::size_t>(1) << (level_ - new_level);
        for (std::size_t k = 0; k <= out.steps(); ++k)
            for (int i = 0; i < dim_; ++i)
                out.at(k, i) = at(k * stride, i);
        return out;
    }

    GridPath shifted(const std::vector<double>& a) const {
        if (static_cast<int>(a.size()) != dim_)
            throw std::invalid_argument("GridPath: shift dimension mismatch");
        GridPath out = *this;
        for (std::size_t k = 0; k < points(); ++k)
            for (int i = 0; i < dim_; ++i)
                out.at(k, i) += a[i];
        return out;
    }

    GridPath reversed() const {
        GridPath out(t0_, t1_, level_, dim_);
        for (std::size_t k = 0; k <= steps(); ++k)
            for (int i = 0; i < dim_; ++i)
                out.at(k, i) = at(steps() - k, i);
        return out;
    }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    double t0_ = 0.0;
    double t1_ = 1.0;
    int level_ = 0;
    int dim_ = 1;
    std::vector<double> values_;
};

} // namespace pathgibbs
