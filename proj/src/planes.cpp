#include "mirage/planes.hpp"

#include "mirage/normals.hpp"
#include "mirage/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mirage {

namespace {

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    std::uint32_t find(std::uint32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);  // keep the lowest id as root
        parent[b] = a;
        return true;
    }
};

Plane ls_plane(const std::vector<std::uint32_t>& ids, const std::vector<Vec3>& positions,
               const Vec3& scanner_origin) {
    Vec3 centroid = Vec3::Zero();
    for (auto id : ids) centroid += positions[id];
    centroid /= double(ids.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (auto id : ids) {
        const Vec3 d = positions[id] - centroid;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    Plane plane;
    plane.normal = solver.eigenvectors().col(0);
    plane.centroid = centroid;
    plane.offset = -plane.normal.dot(centroid);
    if (plane.signed_distance(scanner_origin) < 0.0) {
        plane.normal = -plane.normal;
        plane.offset = -plane.offset;
    }
    return plane;
}

}  // namespace

std::vector<Cluster> dbscan(const std::vector<std::uint32_t>& ids,
                            const std::vector<Vec3>& positions, double eps, std::size_t min_pts) {
    if (eps <= 0.0) throw std::invalid_argument("dbscan: eps must be > 0");
    if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
    const std::size_t n = ids.size();
    std::vector<Cluster> clusters;
    if (n == 0) return clusters;

    std::vector<Vec3> local(n);
    for (std::size_t i = 0; i < n; ++i) local[i] = positions[ids[i]];
    SpatialIndex index(local);

    // Neighborhood counts include the point itself.
    std::vector<std::vector<std::uint32_t>> neigh(n);
    std::vector<std::uint8_t> core(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        neigh[i] = index.radius_query(local[i], eps);
        core[i] = neigh[i].size() + 1 >= min_pts;
    }

    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i]) continue;
        for (auto j : neigh[i])
            if (core[j]) uf.unite(static_cast<std::uint32_t>(i), j);
    }

    std::vector<std::int64_t> assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) {
            assign[i] = uf.find(static_cast<std::uint32_t>(i));
        } else {
            // Border point: the reachable core point with the lowest
            // external id decides, making the result order-independent.
            std::int64_t best = -1;
            for (auto j : neigh[i])
                if (core[j] && (best < 0 || ids[j] < ids[best])) best = j;
            if (best >= 0) assign[i] = uf.find(static_cast<std::uint32_t>(best));
        }
    }

    std::vector<std::int64_t> roots;
    for (auto a : assign)
        if (a >= 0) roots.push_back(a);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());

    for (auto root : roots) {
        std::vector<std::uint32_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (assign[i] == root) members.push_back(ids[i]);
        clusters.push_back(cluster_stats(members, positions));
    }
    return clusters;
}

Cluster cluster_stats(const std::vector<std::uint32_t>& ids, const std::vector<Vec3>& positions) {
    Cluster c;
    c.point_ids = ids;
    if (ids.empty()) {
        c.degenerate = true;
        return c;
    }
    for (auto id : ids) c.centroid += positions[id];
    c.centroid /= double(ids.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (auto id : ids) {
        const Vec3 d = positions[id] - c.centroid;
        cov += d * d.transpose();
    }
    cov /= double(ids.size());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Vec3 ev = solver.eigenvalues();  // ascending
    c.eigenvalues = Vec3(ev[2], ev[1], ev[0]);
    const double sum = c.eigenvalues.sum();
    if (ids.size() < 3 || sum <= 1e-24 || c.eigenvalues[0] <= 0.0) {
        c.degenerate = true;
        return c;
    }
    c.curvature = c.eigenvalues[2] / sum;
    c.linearity = (c.eigenvalues[0] - c.eigenvalues[1]) / c.eigenvalues[0];
    return c;
}

std::vector<Cluster> filter_reliable(const std::vector<Cluster>& clusters, std::size_t min_size,
                                     double max_curvature, double max_linearity) {
    std::vector<Cluster> out;
    for (const auto& c : clusters) {
        if (c.degenerate) continue;
        if (c.point_ids.size() < min_size) continue;
        if (c.curvature > max_curvature) continue;
        if (c.linearity > max_linearity) continue;
        out.push_back(c);
    }
    return out;
}

bool fit_plane_ransac(const Cluster& cluster, const std::vector<Vec3>& positions,
                      const Vec3& scanner_origin, double dist_thresh, std::size_t max_iters,
                      std::uint64_t seed, Plane& out) {
    const auto& ids = cluster.point_ids;
    const std::size_t n = ids.size();
    if (n < 3) return false;

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    std::size_t best_count = 0;
    Vec3 best_normal = Vec3::UnitZ();
    double best_offset = 0.0;
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        const std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
        if (a == b || a == c || b == c) continue;
        const Vec3& pa = positions[ids[a]];
        const Vec3 cross = (positions[ids[b]] - pa).cross(positions[ids[c]] - pa);
        const double norm = cross.norm();
        if (norm < 1e-12) continue;
        const Vec3 normal = cross / norm;
        const double offset = -normal.dot(pa);
        std::size_t count = 0;
        for (auto id : ids)
            if (std::abs(normal.dot(positions[id]) + offset) <= dist_thresh) ++count;
        if (count > best_count) {
            best_count = count;
            best_normal = normal;
            best_offset = offset;
        }
    }
    if (best_count < 3) return false;

    std::vector<std::uint32_t> inliers;
    for (auto id : ids)
        if (std::abs(best_normal.dot(positions[id]) + best_offset) <= dist_thresh)
            inliers.push_back(id);

    Plane refined = ls_plane(inliers, positions, scanner_origin);
    std::vector<std::uint32_t> final_inliers;
    for (auto id : ids)
        if (std::abs(refined.signed_distance(positions[id])) <= dist_thresh)
            final_inliers.push_back(id);
    if (final_inliers.size() * 2 < n) return false;

    refined.inlier_ids = std::move(final_inliers);
    out = refined;
    return true;
}

PlaneSet merge_planes(const PlaneSet& planes, const std::vector<Vec3>& positions,
                      const Vec3& scanner_origin, double cos_thresh, double dist_thresh) {
    PlaneSet current = planes;
    for (;;) {
        const std::size_t n = current.size();
        if (n < 2) return current;
        UnionFind uf(n);
        bool merged_any = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                // Normals are consistently scanner-facing, so a signed cosine
                // keeps opposite parallel walls apart even though both project
                // their centroids to the same offset.
                const double cos_sim = current[i].normal.dot(current[j].normal);
                const double dis_sim = std::abs(current[i].normal.dot(current[i].centroid) -
                                                current[j].normal.dot(current[j].centroid));
                if (cos_sim >= cos_thresh && dis_sim <= dist_thresh)
                    merged_any |= uf.unite(static_cast<std::uint32_t>(i),
                                           static_cast<std::uint32_t>(j));
            }
        }
        if (!merged_any) return current;

        PlaneSet next;
        std::vector<std::int64_t> group_of(n);
        for (std::size_t i = 0; i < n; ++i) group_of[i] = uf.find(static_cast<std::uint32_t>(i));
        std::vector<std::int64_t> roots(group_of.begin(), group_of.end());
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        for (auto root : roots) {
            std::vector<std::uint32_t> ids;
            for (std::size_t i = 0; i < n; ++i)
                if (group_of[i] == root)
                    ids.insert(ids.end(), current[i].inlier_ids.begin(),
                               current[i].inlier_ids.end());
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
            if (ids.empty()) continue;
            Plane p = ls_plane(ids, positions, scanner_origin);
            p.inlier_ids = std::move(ids);
            next.push_back(std::move(p));
        }
        current = std::move(next);
    }
}

PlaneSet detect_reflective_planes(const PointCloud& cloud,
                                  const std::vector<std::uint32_t>& candidates,
                                  const PlaneDetectionConfig& config) {
    PlaneSet planes;
    if (candidates.empty()) return planes;

    std::vector<Vec3> positions(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) positions[i] = cloud[i].position;

    auto clusters = dbscan(candidates, positions, config.dbscan_eps, config.dbscan_min_pts);
    clusters = filter_reliable(clusters, config.min_cluster_size, config.max_curvature,
                               config.max_linearity);

    std::vector<Plane> fitted(clusters.size());
    std::vector<std::uint8_t> ok(clusters.size(), 0);
    parallel_for(clusters.size(), config.threads, [&](std::size_t i) {
        ok[i] = fit_plane_ransac(clusters[i], positions, cloud.scanner_origin, config.ransac_dist,
                                 config.ransac_iters, config.seed + i, fitted[i]);
    });
    for (std::size_t i = 0; i < clusters.size(); ++i)
        if (ok[i]) planes.push_back(std::move(fitted[i]));

    planes = merge_planes(planes, positions, cloud.scanner_origin, config.merge_cos,
                          config.merge_dist);

    if (config.min_intensity_ratio > 0.0 && cloud.has_corrected_field && planes.size() > 1) {
        auto inlier_median = [&](const Plane& p) {
            std::vector<float> vals;
            vals.reserve(p.inlier_ids.size());
            for (std::uint32_t id : p.inlier_ids)
                if (cloud[id].has_corrected()) vals.push_back(cloud[id].intensity_corrected);
            if (vals.empty()) return 0.0;
            std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
            return double(vals[vals.size() / 2]);
        };
        std::vector<double> medians(planes.size());
        double best = 0.0;
        for (std::size_t i = 0; i < planes.size(); ++i) {
            medians[i] = inlier_median(planes[i]);
            best = std::max(best, medians[i]);
        }
        if (best > 0.0) {
            PlaneSet kept;
            for (std::size_t i = 0; i < planes.size(); ++i)
                if (medians[i] >= config.min_intensity_ratio * best)
                    kept.push_back(std::move(planes[i]));
            planes = std::move(kept);
        }
    }
    return planes;
}

void save_planes_json(const PlaneSet& planes, const std::string& path) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : planes) {
        nlohmann::ordered_json j;
        j["normal"] = {p.normal.x(), p.normal.y(), p.normal.z()};
        j["offset"] = p.offset;
        j["n_inliers"] = p.inlier_ids.size();
        j["centroid"] = {p.centroid.x(), p.centroid.y(), p.centroid.z()};
        j["inlier_ids"] = p.inlier_ids;
        arr.push_back(std::move(j));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << arr.dump(2) << '\n';
}

PlaneSet load_planes_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("planes JSON: " + std::string(e.what()));
    }
    PlaneSet planes;
    for (const auto& j : arr) {
        Plane p;
        p.normal = Vec3(j.at("normal")[0], j.at("normal")[1], j.at("normal")[2]);
        p.offset = j.at("offset");
        p.centroid = Vec3(j.at("centroid")[0], j.at("centroid")[1], j.at("centroid")[2]);
        if (j.contains("inlier_ids"))
            p.inlier_ids = j.at("inlier_ids").get<std::vector<std::uint32_t>>();
        else
            p.inlier_ids.resize(j.value("n_inliers", 0u));  // legacy file: count only
        planes.push_back(std::move(p));
    }
    return planes;
}

}  // namespace mirage
