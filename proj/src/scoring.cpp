#include "mirage/scoring.hpp"

#include "mirage/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mirage {

double directed_hausdorff(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("directed_hausdorff: histogram lengths differ");
    if (a.empty()) throw std::invalid_argument("directed_hausdorff: empty histograms");
    const std::size_t n = a.size();
    const double dx = n > 1 ? 1.0 / double(n - 1) : 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            const double ddx = (double(i) - double(j)) * dx;
            const double ddy = a[i] - b[j];
            best = std::min(best, std::sqrt(ddx * ddx + ddy * ddy));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

double hausdorff(const std::vector<double>& a, const std::vector<double>& b) {
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double feature_distance(const RelsfhDescriptor& a, const RelsfhDescriptor& b) {
    if (a.empty || b.empty) return std::numeric_limits<double>::infinity();
    return 0.5 * (hausdorff(a.angle_hist, b.angle_hist) +
                  hausdorff(a.density_hist, b.density_hist));
}

namespace {

double default_similarity(const PointCloud& cloud, const SpatialIndex& index,
                          const NormalCache& normals, std::uint32_t query_id,
                          std::uint32_t matched_id, const ReflectionFrame& frame,
                          const DescriptorParams& params) {
    const auto da = compute_relsfh(cloud, index, normals, query_id, frame.incident_dir, params);
    const auto db = compute_relsfh(cloud, index, normals, matched_id, frame.reflected_dir, params);
    return feature_distance(da, db);
}

std::uint64_t footprint_key(double u, double v, double cell) {
    const auto i = static_cast<std::int64_t>(std::floor(u / cell));
    const auto j = static_cast<std::int64_t>(std::floor(v / cell));
    return (static_cast<std::uint64_t>(i + (std::int64_t(1) << 31)) << 32) |
           static_cast<std::uint64_t>(std::uint32_t(j + (std::int64_t(1) << 31)));
}

}  // namespace

bool PlaneFootprint::covers(const Vec3& on_plane) const {
    if (cells.empty()) return true;
    const Vec3 rel = on_plane - origin;
    const double u = rel.dot(e1), v = rel.dot(e2);
    for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj)
            if (cells.count(footprint_key(u + di * cell, v + dj * cell, cell))) return true;
    return false;
}

bool PlaneFootprint::covers_segment(const Vec3& scanner, const Vec3& query,
                                    const Plane& plane) const {
    if (cells.empty()) return true;
    const double so = plane.signed_distance(scanner);
    const double sq = plane.signed_distance(query);
    const double denom = so - sq;
    if (!(denom > 1e-12)) return false;  // segment does not cross the plane
    const double t = so / denom;
    if (t < 0.0 || t > 1.0) return false;
    return covers(scanner + t * (query - scanner));
}

std::vector<PlaneFootprint> build_footprints(const PointCloud& cloud, const PlaneSet& planes,
                                             double cell) {
    std::vector<PlaneFootprint> out(planes.size());
    for (std::size_t pi = 0; pi < planes.size(); ++pi) {
        auto& fp = out[pi];
        const Vec3& n = planes[pi].normal;
        // Deterministic in-plane basis: cross with the axis least aligned
        // with the normal.
        const double ax = std::abs(n.x()), ay = std::abs(n.y()), az = std::abs(n.z());
        Vec3 axis = Vec3::UnitX();
        if (ay <= ax && ay <= az)
            axis = Vec3::UnitY();
        else if (az <= ax && az <= ay)
            axis = Vec3::UnitZ();
        fp.e1 = n.cross(axis).normalized();
        fp.e2 = n.cross(fp.e1);
        fp.origin = -planes[pi].offset * n;
        fp.cell = cell;
        for (std::uint32_t id : planes[pi].inlier_ids) {
            if (id >= cloud.size()) continue;
            const Vec3 rel = cloud[id].position - fp.origin;
            fp.cells.insert(footprint_key(rel.dot(fp.e1), rel.dot(fp.e2), cell));
        }
    }
    return out;
}

ScoreRecord score_point_with(const PointCloud& cloud, const SpatialIndex& index,
                             const NormalCache& normals, std::uint32_t query_id,
                             const PlaneSet& planes, const ScoringConfig& config,
                             const SimilarityFn& similarity,
                             const std::vector<PlaneFootprint>* footprints) {
    ScoreRecord best;
    best.point_id = query_id;
    const Vec3& query = cloud[query_id].position;
    // Beyond this gap the symmetry score is below 1e-6; treat as a miss.
    const double gap_cap = config.sigma_sym * std::log(1e6);

    for (std::size_t pi = 0; pi < planes.size(); ++pi) {
        if (planes[pi].signed_distance(query) > -config.min_depth) continue;
        if (footprints &&
            !(*footprints)[pi].covers_segment(cloud.scanner_origin, query, planes[pi]))
            continue;
        const auto frame = reflection_frame(query, cloud.scanner_origin, planes[pi]);
        if (!frame) continue;

        const Vec3 predicted = mirror_point(query, planes[pi]);
        const auto nn = index.knn_query(predicted, 1);
        ScoreRecord rec;
        rec.point_id = query_id;
        rec.plane_id = static_cast<std::int32_t>(pi);
        rec.predicted_mirror = predicted;
        if (!nn.empty() && nn[0] != query_id) {
            const double gap = (cloud[nn[0]].position - predicted).norm();
            if (gap <= gap_cap) {
                rec.matched_neighbor = nn[0];
                rec.mirror_gap = gap;
                rec.hausdorff = similarity(cloud, index, normals, query_id, nn[0], *frame);
                rec.sym_score = std::exp(-gap / config.sigma_sym);
                rec.sim_score = std::isinf(rec.hausdorff)
                                    ? 0.0
                                    : std::exp(-rec.hausdorff / config.sigma_sim);
                rec.virtual_score = rec.sym_score * rec.sim_score;
            }
        }
        if (rec.plane_id >= 0 && (best.plane_id < 0 || rec.virtual_score > best.virtual_score))
            best = rec;
    }
    return best;
}

ScoreRecord score_point(const PointCloud& cloud, const SpatialIndex& index,
                        const NormalCache& normals, std::uint32_t query_id, const PlaneSet& planes,
                        const ScoringConfig& config,
                        const std::vector<PlaneFootprint>* footprints) {
    const auto sim = [&config](const PointCloud& c, const SpatialIndex& i, const NormalCache& n,
                               std::uint32_t q, std::uint32_t m, const ReflectionFrame& f) {
        return default_similarity(c, i, n, q, m, f, config.descriptor);
    };
    return score_point_with(cloud, index, normals, query_id, planes, config, sim, footprints);
}

std::vector<ScoreRecord> score_cloud(const PointCloud& cloud, const SpatialIndex& index,
                                     const NormalCache& normals, const PlaneSet& planes,
                                     const ScoringConfig& config, const SimilarityFn* similarity) {
    std::vector<PlaneFootprint> fps;
    const std::vector<PlaneFootprint>* footprints = nullptr;
    if (config.footprint_cell > 0.0) {
        fps = build_footprints(cloud, planes, config.footprint_cell);
        footprints = &fps;
    }
    std::vector<ScoreRecord> out(cloud.size());
    parallel_for(cloud.size(), config.threads, [&](std::size_t i) {
        const auto id = static_cast<std::uint32_t>(i);
        out[i] = similarity ? score_point_with(cloud, index, normals, id, planes, config,
                                               *similarity, footprints)
                            : score_point(cloud, index, normals, id, planes, config, footprints);
    });

    if (config.coherence_radius > 0.0) {
        std::vector<double> refined(out.size());
        parallel_for(out.size(), config.threads, [&](std::size_t i) {
            const auto& rec = out[i];
            refined[i] = rec.virtual_score;
            if (rec.plane_id < 0 || rec.sym_score < config.coherence_min_sym) return;
            std::vector<double> vals{rec.virtual_score};
            for (auto j : index.radius_query(cloud[i].position, config.coherence_radius))
                if (out[j].plane_id == rec.plane_id &&
                    out[j].sym_score >= config.coherence_min_sym)
                    vals.push_back(out[j].virtual_score);
            if (vals.size() < 5) return;
            // lower median; deterministic regardless of query order
            std::nth_element(vals.begin(), vals.begin() + (vals.size() - 1) / 2, vals.end());
            refined[i] = std::max(rec.virtual_score, vals[(vals.size() - 1) / 2]);
        });
        for (std::size_t i = 0; i < out.size(); ++i) out[i].virtual_score = refined[i];
    }
    return out;
}

PointCloud remove_virtual(PointCloud& cloud, const std::vector<ScoreRecord>& scores,
                          double threshold) {
    if (scores.size() != cloud.size())
        throw std::invalid_argument("remove_virtual: score table size mismatch");
    PointCloud kept;
    kept.scanner_origin = cloud.scanner_origin;
    kept.has_color = cloud.has_color;
    kept.has_corrected_field = cloud.has_corrected_field;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const bool is_virtual = scores[i].virtual_score >= threshold;
        cloud[i].pred_label = is_virtual ? PredLabel::Virtual : PredLabel::Real;
        if (!is_virtual) kept.points.push_back(cloud[i]);
    }
    return kept;
}

void save_scores_csv(const std::vector<ScoreRecord>& scores, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "point_id,plane_id,sym_score,sim_score,virtual_score,mirror_gap,hausdorff\n";
    char buf[256];
    for (const auto& s : scores) {
        std::snprintf(buf, sizeof(buf), "%u,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.point_id,
                      s.plane_id, s.sym_score, s.sim_score, s.virtual_score, s.mirror_gap,
                      s.hausdorff);
        out << buf;
    }
    if (!out) throw IoError("write failed for " + path);
}

std::vector<ScoreRecord> load_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("scores CSV: empty file " + path);
    std::vector<ScoreRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ls(line);
        std::string tok;
        double fields[7];
        for (double& f : fields) {
            if (!(ls >> tok))
                throw ParseError("scores CSV: malformed line " + std::to_string(line_no));
            char* end = nullptr;
            f = std::strtod(tok.c_str(), &end);  // strtod accepts inf tokens
            if (end == tok.c_str())
                throw ParseError("scores CSV: malformed line " + std::to_string(line_no));
        }
        ScoreRecord s;
        s.point_id = static_cast<std::uint32_t>(fields[0]);
        s.plane_id = static_cast<std::int32_t>(fields[1]);
        s.sym_score = fields[2];
        s.sim_score = fields[3];
        s.virtual_score = fields[4];
        s.mirror_gap = fields[5];
        s.hausdorff = fields[6];
        out.push_back(s);
    }
    return out;
}

}  // namespace mirage
