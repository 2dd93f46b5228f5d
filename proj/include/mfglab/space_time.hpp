#pragma once

#include "mfglab/torus_grid.hpp"

#include <cstddef>
#include <vector>

namespace mfglab {

/// Samples on (torus grid) x (uniform time grid t_i = i * T / steps, i = 0..steps).
class SpaceTimeField {
public:
    /// Throws ConfigError on an empty slice list, a nonpositive horizon, or mixed grids.
    SpaceTimeField(double horizon, std::vector<PeriodicField> slices);

    template <class F>
    static SpaceTimeField from_function(const Grid& grid, double horizon, std::size_t steps, F&& f)
    {
        std::vector<PeriodicField> slices;
        slices.reserve(steps + 1);
        for (std::size_t i = 0; i <= steps; ++i) {
            const double t = horizon * static_cast<double>(i) / static_cast<double>(steps);
            slices.push_back(PeriodicField::from_function(grid, [&](const Point& x) { return f(x, t); }));
        }
        return SpaceTimeField(horizon, std::move(slices));
    }

    const Grid& grid() const noexcept { return slices_.front().grid(); }
    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return slices_.size() - 1; }
    double dt() const noexcept { return horizon_ / static_cast<double>(steps()); }
    double time(std::size_t i) const noexcept { return dt() * static_cast<double>(i); }
    const PeriodicField& slice(std::size_t i) const { return slices_.at(i); }
    const std::vector<PeriodicField>& slices() const noexcept { return slices_; }

    double min() const;

    /// Same grid, horizon, and step count.
    bool compatible(const SpaceTimeField& other) const;

private:
    double horizon_;
    std::vector<PeriodicField> slices_;
};

SpaceTimeField operator-(const SpaceTimeField& a, const SpaceTimeField& b);
SpaceTimeField operator+(const SpaceTimeField& a, const SpaceTimeField& b);
SpaceTimeField operator*(double s, const SpaceTimeField& a);

} // namespace mfglab
