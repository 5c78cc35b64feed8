#pragma once

#include "merodyn/sphere.hpp"

#include <cstddef>
#include <memory>
#include <vector>

namespace merodyn {

/// Nearest-neighbour queries in the spherical metric over a fixed point set.
class SphereIndex {
public:
    explicit SphereIndex(const std::vector<SpherePoint>& points);
    ~SphereIndex();
    SphereIndex(SphereIndex&&) noexcept;
    SphereIndex& operator=(SphereIndex&&) noexcept;

    std::size_t size() const noexcept { return points_.size(); }
    std::size_t nearest(const SpherePoint& p) const;
    double nearest_distance(const SpherePoint& p) const;
    /// Mean over the set of the distance to the nearest other point.
    double mean_spacing() const;

private:
    struct Impl;
    std::vector<SpherePoint> points_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace merodyn
