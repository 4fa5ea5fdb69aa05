#pragma once

#include "mirage/descriptor.hpp"
#include "mirage/normals.hpp"
#include "mirage/planes.hpp"
#include "mirage/spatial_index.hpp"
#include "mirage/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace mirage {

struct ScoreRecord {
    std::uint32_t point_id = 0;
    std::int32_t plane_id = -1;  // -1: not a candidate of any plane
    double sym_score = 0.0;
    double sim_score = 0.0;
    double virtual_score = 0.0;
    Vec3 predicted_mirror{0.0, 0.0, 0.0};
    std::int64_t matched_neighbor = -1;
    double mirror_gap = 0.0;
    double hausdorff = 0.0;
};

struct ScoringConfig {
    DescriptorParams descriptor;
    double sigma_sym = 0.1;
    double sigma_sim = 0.25;
    double removal_threshold = 0.5;
    /// Minimum distance behind the plane before a point can be scored;
    /// keeps noisy returns on the pane itself from matching their own
    /// mirror image.
    double min_depth = 0.05;
    /// Spatial coherence pass: a geometrically matched point inherits the
    /// median virtual score of same-plane candidates within this radius,
    /// which recovers the rim of a reflected patch where descriptor
    /// neighborhoods are truncated. 0 disables the pass.
    double coherence_radius = 0.5;
    /// Minimum symmetry score before a point may be promoted by coherence.
    double coherence_min_sym = 0.5;
    /// A reflection can only exist if the beam from the scanner to the
    /// candidate crosses the detected plane inside the area actually
    /// covered by pane returns; real surfaces that merely extend past the
    /// pane's edge are skipped.
    bool footprint_filter = true;
    unsigned threads = 0;
};

/// Convex hull of a detected plane's inlier returns, in an orthonormal
/// in-plane basis. Empty footprints (planes without inlier ids) accept
/// every crossing.
struct PlaneFootprint {
    Vec3 e1{1.0, 0.0, 0.0};
    Vec3 e2{0.0, 1.0, 0.0};
    Vec3 origin{0.0, 0.0, 0.0};
    std::vector<std::array<double, 2>> hull;  // counter-clockwise

    bool covers(const Vec3& on_plane) const;
    /// True when the segment from the scanner to the query crosses the
    /// plane inside the footprint.
    bool covers_segment(const Vec3& scanner, const Vec3& query, const Plane& plane) const;
};

std::vector<PlaneFootprint> build_footprints(const PointCloud& cloud, const PlaneSet& planes);

/// Directed Hausdorff distance between two equal-length histograms whose
/// bins are embedded as 2D points (i/(N-1), value_i).
double directed_hausdorff(const std::vector<double>& a, const std::vector<double>& b);

/// Symmetric Hausdorff distance, max of the two directed distances.
double hausdorff(const std::vector<double>& a, const std::vector<double>& b);

/// Mean of the per-sub-histogram Hausdorff distances. Flagged (empty)
/// descriptors yield +infinity so the similarity score collapses to zero.
double feature_distance(const RelsfhDescriptor& a, const RelsfhDescriptor& b);

/// Similarity hook: distance between the query descriptor (incident axis)
/// and the matched mirror neighbor descriptor (reflected axis). The default
/// is RE-LSFH + Hausdorff; tests substitute other descriptor/metric pairs.
using SimilarityFn = std::function<double(const PointCloud&, const SpatialIndex&,
                                          const NormalCache&, std::uint32_t query_id,
                                          std::uint32_t matched_id, const ReflectionFrame&)>;

/// Score one point against every plane that accepts it; the plane with the
/// highest virtual score wins. Non-candidates come back with plane_id -1
/// and a zero score.
ScoreRecord score_point(const PointCloud& cloud, const SpatialIndex& index,
                        const NormalCache& normals, std::uint32_t query_id, const PlaneSet& planes,
                        const ScoringConfig& config,
                        const std::vector<PlaneFootprint>* footprints = nullptr);

ScoreRecord score_point_with(const PointCloud& cloud, const SpatialIndex& index,
                             const NormalCache& normals, std::uint32_t query_id,
                             const PlaneSet& planes, const ScoringConfig& config,
                             const SimilarityFn& similarity,
                             const std::vector<PlaneFootprint>* footprints = nullptr);

/// Scores every cloud point in parallel.
std::vector<ScoreRecord> score_cloud(const PointCloud& cloud, const SpatialIndex& index,
                                     const NormalCache& normals, const PlaneSet& planes,
                                     const ScoringConfig& config,
                                     const SimilarityFn* similarity = nullptr);

/// Sets pred_label on every point (Virtual where score >= threshold) and
/// returns the cloud of kept points.
PointCloud remove_virtual(PointCloud& cloud, const std::vector<ScoreRecord>& scores,
                          double threshold);

void save_scores_csv(const std::vector<ScoreRecord>& scores, const std::string& path);
std::vector<ScoreRecord> load_scores_csv(const std::string& path);

}  // namespace mirage
