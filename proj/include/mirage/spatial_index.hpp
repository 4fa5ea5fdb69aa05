#pragma once

#include "mirage/types.hpp"

#include <cstdint>
#include <vector>

namespace mirage {

/// kd-tree over point positions. Immutable after construction; concurrent
/// queries are safe.
class SpatialIndex {
public:
    SpatialIndex() = default;
    explicit SpatialIndex(const PointCloud& cloud);
    explicit SpatialIndex(const std::vector<Vec3>& positions);

    std::size_t size() const { return positions_.size(); }

    /// Ids with 0 < ||q - p|| <= r, ascending by id. Zero-distance matches
    /// are excluded so that querying at a cloud point does not return the
    /// point itself.
    std::vector<std::uint32_t> radius_query(const Vec3& p, double r) const;

    /// The k nearest points (the query point itself included when p is a
    /// cloud point), ordered by distance with ties broken by insertion order.
    std::vector<std::uint32_t> knn_query(const Vec3& p, std::size_t k) const;

    const Vec3& position(std::uint32_t id) const { return positions_[id]; }

private:
    struct Node {
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t begin = 0;   // leaf range into order_
        std::uint32_t end = 0;
        std::uint8_t axis = 0;
        double split = 0.0;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);

    std::vector<Vec3> positions_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;

    static constexpr std::uint32_t kLeafSize = 16;
};

}  // namespace mirage
