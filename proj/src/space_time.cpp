#include "mfglab/space_time.hpp"

#include "mfglab/errors.hpp"

#include <algorithm>

namespace mfglab {

SpaceTimeField::SpaceTimeField(double horizon, std::vector<PeriodicField> slices)
    : horizon_(horizon), slices_(std::move(slices))
{
    if (slices_.size() < 2) {
        throw ConfigError("space-time field needs at least two time levels");
    }
    if (!(horizon_ > 0.0)) {
        throw ConfigError("time horizon must be positive");
    }
    for (const auto& s : slices_) {
        require_same_grid(slices_.front().grid(), s.grid(), "space-time field");
    }
}

double SpaceTimeField::min() const
{
    double m = slices_.front().min();
    for (const auto& s : slices_) {
        m = std::min(m, s.min());
    }
    return m;
}

bool SpaceTimeField::compatible(const SpaceTimeField& other) const
{
    return grid() == other.grid() && steps() == other.steps() && horizon() == other.horizon();
}

namespace {

template <class Op>
SpaceTimeField slicewise(const SpaceTimeField& a, const SpaceTimeField& b, Op op)
{
    if (!a.compatible(b)) {
        throw ConfigError("space-time fields live on different space or time grids");
    }
    std::vector<PeriodicField> out;
    out.reserve(a.steps() + 1);
    for (std::size_t i = 0; i <= a.steps(); ++i) {
        out.push_back(op(a.slice(i), b.slice(i)));
    }
    return SpaceTimeField(a.horizon(), std::move(out));
}

} // namespace

SpaceTimeField operator-(const SpaceTimeField& a, const SpaceTimeField& b)
{
    return slicewise(a, b, [](const auto& x, const auto& y) { return x - y; });
}

SpaceTimeField operator+(const SpaceTimeField& a, const SpaceTimeField& b)
{
    return slicewise(a, b, [](const auto& x, const auto& y) { return x + y; });
}

SpaceTimeField operator*(double s, const SpaceTimeField& a)
{
    std::vector<PeriodicField> out;
    for (const auto& sl : a.slices()) {
        out.push_back(s * sl);
    }
    return SpaceTimeField(a.horizon(), std::move(out));
}

} // namespace mfglab
