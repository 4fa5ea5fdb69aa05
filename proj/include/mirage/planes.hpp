#pragma once

#include "mirage/spatial_index.hpp"
#include "mirage/types.hpp"

#include <string>
#include <vector>

namespace mirage {

struct Cluster {
    std::vector<std::uint32_t> point_ids;
    Vec3 centroid{0.0, 0.0, 0.0};
    Vec3 eigenvalues{0.0, 0.0, 0.0};  // descending: e1 >= e2 >= e3
    double curvature = 0.0;           // e3 / (e1 + e2 + e3)
    double linearity = 0.0;           // (e1 - e2) / e1
    bool degenerate = false;
};

/// Plane n.x + d = 0 with |n| = 1 and n oriented so the scanner origin
/// lies on the positive side (n.o + d > 0).
struct Plane {
    Vec3 normal{0.0, 0.0, 1.0};
    double offset = 0.0;
    std::vector<std::uint32_t> inlier_ids;
    Vec3 centroid{0.0, 0.0, 0.0};

    double signed_distance(const Vec3& p) const { return normal.dot(p) + offset; }
};

using PlaneSet = std::vector<Plane>;

struct PlaneDetectionConfig {
    double dbscan_eps = 0.3;
    std::size_t dbscan_min_pts = 10;
    std::size_t min_cluster_size = 200;
    double max_curvature = 0.02;
    double max_linearity = 0.9;
    double ransac_dist = 0.02;
    std::size_t ransac_iters = 1000;
    double merge_cos = 0.985;
    double merge_dist = 0.1;
    // All detected reflective planes should be comparably bright: a plane
    // whose inliers' median corrected intensity falls below this fraction
    // of the brightest detected plane's is a cluster from the upper noise
    // tail of an ordinary surface and is dropped. 0 disables; skipped when
    // the cloud carries no corrected intensities.
    double min_intensity_ratio = 0.5;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

/// Density clustering over the candidate subset; noise points are dropped.
/// Border points join the cluster of their lowest-id reachable core point,
/// making the result independent of input order.
std::vector<Cluster> dbscan(const std::vector<std::uint32_t>& ids,
                            const std::vector<Vec3>& positions, double eps, std::size_t min_pts);

/// Covariance statistics about the centroid of the member positions.
Cluster cluster_stats(const std::vector<std::uint32_t>& ids, const std::vector<Vec3>& positions);

std::vector<Cluster> filter_reliable(const std::vector<Cluster>& clusters, std::size_t min_size,
                                     double max_curvature, double max_linearity);

/// Seeded 3-point RANSAC with a least-squares refit over the consensus set.
/// Returns false when consensus stays below half the cluster.
bool fit_plane_ransac(const Cluster& cluster, const std::vector<Vec3>& positions,
                      const Vec3& scanner_origin, double dist_thresh, std::size_t max_iters,
                      std::uint64_t seed, Plane& out);

/// Union-find merge of planes with near-parallel normals and matching
/// centroid projections, one refit per group, iterated to a fixpoint.
PlaneSet merge_planes(const PlaneSet& planes, const std::vector<Vec3>& positions,
                      const Vec3& scanner_origin, double cos_thresh, double dist_thresh);

/// dbscan -> stats -> reliability filter -> per-cluster RANSAC -> merge.
PlaneSet detect_reflective_planes(const PointCloud& cloud,
                                  const std::vector<std::uint32_t>& candidates,
                                  const PlaneDetectionConfig& config);

void save_planes_json(const PlaneSet& planes, const std::string& path);
PlaneSet load_planes_json(const std::string& path);

}  // namespace mirage
