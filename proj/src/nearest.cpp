#include "merodyn/nearest.hpp"

#include "merodyn/error.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include <algorithm>
#include <iterator>
#include <limits>

namespace merodyn {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {
using Point3 = bg::model::point<double, 3, bg::cs::cartesian>;
using Entry = std::pair<Point3, std::size_t>;

Point3 to_point(const SpherePoint& p) {
    const auto c = to_sphere_coords(p);
    return Point3(c.x, c.y, c.z);
}
}  // namespace

struct SphereIndex::Impl {
    bgi::rtree<Entry, bgi::rstar<16>> tree;
};

SphereIndex::SphereIndex(const std::vector<SpherePoint>& points) : points_(points), impl_(std::make_unique<Impl>()) {
    if (points_.empty()) throw Error(ErrorCode::InvalidArgument, "empty point set");
    std::vector<Entry> entries;
    entries.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) entries.emplace_back(to_point(points_[i]), i);
    impl_->tree = bgi::rtree<Entry, bgi::rstar<16>>(entries.begin(), entries.end());
}

SphereIndex::~SphereIndex() = default;
SphereIndex::SphereIndex(SphereIndex&&) noexcept = default;
SphereIndex& SphereIndex::operator=(SphereIndex&&) noexcept = default;

std::size_t SphereIndex::nearest(const SpherePoint& p) const {
    std::vector<Entry> hit;
    impl_->tree.query(bgi::nearest(to_point(p), 1), std::back_inserter(hit));
    return hit.front().second;
}

double SphereIndex::nearest_distance(const SpherePoint& p) const {
    return chordal_distance(p, points_[nearest(p)]);
}

double SphereIndex::mean_spacing() const {
    if (points_.size() < 2) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        std::vector<Entry> hit;
        impl_->tree.query(bgi::nearest(to_point(points_[i]), 2), std::back_inserter(hit));
        double best = std::numeric_limits<double>::infinity();
        for (const auto& h : hit)
            if (h.second != i) best = std::min(best, chordal_distance(points_[i], points_[h.second]));
        total += best;
    }
    return total / static_cast<double>(points_.size());
}

}  // namespace merodyn
