#include "mirage/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace mirage {

namespace {

std::size_t bin_index(double value, double upper, std::size_t bins) {
    // left-closed bins, top bin right-closed
    const double t = value / upper * double(bins);
    auto b = static_cast<std::size_t>(t);
    return std::min(b, bins - 1);
}

void l1_normalize(std::vector<double>& hist) {
    double sum = 0.0;
    for (double v : hist) sum += v;
    if (sum > 0.0)
        for (double& v : hist) v /= sum;
}

}  // namespace

Vec3 mirror_point(const Vec3& p, const Plane& plane) {
    return p - 2.0 * plane.signed_distance(p) * plane.normal;
}

Vec3 mirror_direction(const Vec3& dir, const Plane& plane) {
    return dir - 2.0 * dir.dot(plane.normal) * plane.normal;
}

std::optional<ReflectionFrame> reflection_frame(const Vec3& query, const Vec3& origin,
                                                const Plane& plane) {
    const double s_origin = plane.signed_distance(origin);
    const double s_query = plane.signed_distance(query);
    // strict crossing: origin on the positive (scanner) side, query behind
    if (!(s_origin > 0.0) || !(s_query < 0.0)) return std::nullopt;

    ReflectionFrame frame;
    frame.plane = &plane;
    const double t = s_origin / (s_origin - s_query);
    frame.glass_hit = origin + t * (query - origin);
    const Vec3 beam = query - frame.glass_hit;
    const double len = beam.norm();
    if (len < 1e-12) return std::nullopt;
    frame.incident_dir = beam / len;
    frame.reflected_dir = mirror_direction(frame.incident_dir, plane);
    return frame;
}

std::vector<double> deviation_angle_feature(const std::vector<Vec3>& neighbor_normals,
                                            const Vec3& axis, std::size_t bins) {
    std::vector<double> hist(bins, 0.0);
    constexpr double half_pi = std::numbers::pi / 2.0;
    for (const auto& n : neighbor_normals) {
        const double c = std::min(1.0, std::abs(axis.dot(n)));
        const double theta = std::acos(c);
        hist[bin_index(theta, half_pi, bins)] += 1.0;
    }
    l1_normalize(hist);
    return hist;
}

std::vector<double> point_density_feature(const Vec3& query, const Vec3& axis,
                                          const std::vector<Vec3>& neighbors, double r,
                                          std::size_t bins) {
    std::vector<double> hist(bins, 0.0);
    for (const auto& p : neighbors) {
        const Vec3 d = query - p;
        const double along = axis.dot(d);
        const double rho2 = d.squaredNorm() - along * along;
        const double rho = std::sqrt(std::max(0.0, rho2));
        hist[bin_index(std::min(rho, r), r, bins)] += 1.0;
    }
    l1_normalize(hist);
    return hist;
}

RelsfhDescriptor compute_relsfh_at(const PointCloud& cloud, const SpatialIndex& index,
                                   const NormalCache& normals, const Vec3& query,
                                   const Vec3& axis, const DescriptorParams& params) {
    RelsfhDescriptor out;
    out.angle_hist.assign(params.angle_bins, 0.0);
    out.density_hist.assign(params.density_bins, 0.0);

    const auto ids = index.radius_query(query, params.radius);
    out.neighbor_count = ids.size();
    if (ids.empty()) return out;
    out.empty = false;

    std::vector<Vec3> neighbor_normals;
    std::vector<Vec3> neighbor_positions;
    neighbor_normals.reserve(ids.size());
    neighbor_positions.reserve(ids.size());
    for (auto id : ids) {
        neighbor_normals.push_back(normals.at(id).normal);
        neighbor_positions.push_back(cloud[id].position);
    }
    out.angle_hist = deviation_angle_feature(neighbor_normals, axis, params.angle_bins);
    out.density_hist =
        point_density_feature(query, axis, neighbor_positions, params.radius, params.density_bins);
    return out;
}

RelsfhDescriptor compute_relsfh(const PointCloud& cloud, const SpatialIndex& index,
                                const NormalCache& normals, std::uint32_t query_id,
                                const Vec3& axis, const DescriptorParams& params) {
    // radius_query drops zero-distance matches, so the query point never
    // enters its own neighborhood.
    return compute_relsfh_at(cloud, index, normals, cloud[query_id].position, axis, params);
}

void dump_descriptors(const std::vector<std::pair<std::uint32_t, RelsfhDescriptor>>& descriptors,
                      const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& [id, d] : descriptors) {
        out.write(reinterpret_cast<const char*>(&id), 4);
        for (double v : d.angle_hist) {
            const float f = static_cast<float>(v);
            out.write(reinterpret_cast<const char*>(&f), 4);
        }
        for (double v : d.density_hist) {
            const float f = static_cast<float>(v);
            out.write(reinterpret_cast<const char*>(&f), 4);
        }
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace mirage
