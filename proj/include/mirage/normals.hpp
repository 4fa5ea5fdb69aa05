#pragma once

#include "mirage/spatial_index.hpp"
#include "mirage/types.hpp"

#include <span>
#include <vector>

namespace mirage {

struct NormalEstimate {
    Vec3 normal{0.0, 0.0, 1.0};
    bool degenerate = false;  // neighborhood rank < 2
};

/// Smallest-eigenvector normal of the centered covariance of the given
/// positions. Sign is not canonicalized here.
NormalEstimate estimate_normal(std::span<const Vec3> positions);

/// Same, with the normal flipped to face `toward` (n . (toward - at) >= 0).
NormalEstimate estimate_normal_toward(std::span<const Vec3> positions, const Vec3& at,
                                      const Vec3& toward);

/// Per-point normals from the k nearest neighbors, oriented toward the
/// scanner origin. Computed once and shared by radiometry and descriptors.
class NormalCache {
public:
    NormalCache() = default;
    NormalCache(const PointCloud& cloud, const SpatialIndex& index, std::size_t k,
                unsigned threads = 0);

    const NormalEstimate& at(std::uint32_t id) const { return normals_[id]; }
    std::size_t size() const { return normals_.size(); }

private:
    std::vector<NormalEstimate> normals_;
};

}  // namespace mirage
