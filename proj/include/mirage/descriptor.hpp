#pragma once

#include "mirage/normals.hpp"
#include "mirage/planes.hpp"
#include "mirage/spatial_index.hpp"
#include "mirage/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mirage {

/// Deviation-angle + projected-density sub-histograms, each L1-normalized.
/// Both are all-zero with empty = true when the query has no neighbors.
struct RelsfhDescriptor {
    std::vector<double> angle_hist;
    std::vector<double> density_hist;
    std::size_t neighbor_count = 0;
    bool empty = true;
};

/// Beam geometry of a candidate point behind a reflective plane.
struct ReflectionFrame {
    const Plane* plane = nullptr;
    Vec3 glass_hit{0.0, 0.0, 0.0};
    Vec3 incident_dir{0.0, 0.0, 1.0};   // glass hit -> query, unit
    Vec3 reflected_dir{0.0, 0.0, 1.0};  // incident mirrored about the plane normal
};

struct DescriptorParams {
    // Support must span several beam spacings at the reflected range and
    // the normal neighborhood must be wide enough that position noise does
    // not dominate the deviation-angle histogram on close-range surfaces.
    double radius = 1.0;
    std::size_t normal_k = 40;
    std::size_t angle_bins = 11;
    std::size_t density_bins = 11;
};

/// Mirror image of p across the plane: p - 2 (n.p + d) n.
Vec3 mirror_point(const Vec3& p, const Plane& plane);

/// Mirror image of a direction (no translation part).
Vec3 mirror_direction(const Vec3& dir, const Plane& plane);

/// Frame for a query strictly behind the plane as seen from origin; empty
/// when the origin->query segment does not strictly cross the plane.
std::optional<ReflectionFrame> reflection_frame(const Vec3& query, const Vec3& origin,
                                                const Plane& plane);

/// Histogram of arccos(|axis . n|) over [0, pi/2] for the given neighbor
/// normals, uniform bins, top bin right-closed, L1-normalized.
std::vector<double> deviation_angle_feature(const std::vector<Vec3>& neighbor_normals,
                                            const Vec3& axis, std::size_t bins);

/// Histogram of the distance from each neighbor to the axis line through
/// the query, over [0, r], L1-normalized.
std::vector<double> point_density_feature(const Vec3& query, const Vec3& axis,
                                          const std::vector<Vec3>& neighbors, double r,
                                          std::size_t bins);

/// Both sub-features over the radius-r neighborhood of one cloud point
/// (the point itself excluded), with per-neighbor normals from the cache.
RelsfhDescriptor compute_relsfh(const PointCloud& cloud, const SpatialIndex& index,
                                const NormalCache& normals, std::uint32_t query_id,
                                const Vec3& axis, const DescriptorParams& params);

/// Descriptor at an arbitrary position (used for mirrored locations).
RelsfhDescriptor compute_relsfh_at(const PointCloud& cloud, const SpatialIndex& index,
                                   const NormalCache& normals, const Vec3& query,
                                   const Vec3& axis, const DescriptorParams& params);

/// Debug dump: per record a uint32 id then angle+density float32 bins.
void dump_descriptors(const std::vector<std::pair<std::uint32_t, RelsfhDescriptor>>& descriptors,
                      const std::string& path);

}  // namespace mirage
