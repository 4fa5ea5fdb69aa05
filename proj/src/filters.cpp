#include "mirage/filters.hpp"

#include "mirage/parallel.hpp"
#include "mirage/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace mirage {

PointCloud radius_filter(const PointCloud& cloud, double radius, std::size_t min_neighbors,
                         unsigned threads) {
    if (radius <= 0.0) throw std::invalid_argument("radius_filter: radius must be > 0");
    PointCloud out;
    out.scanner_origin = cloud.scanner_origin;
    out.has_color = cloud.has_color;
    out.has_corrected_field = cloud.has_corrected_field;
    if (cloud.empty()) return out;

    SpatialIndex index(cloud);
    std::vector<std::uint8_t> keep(cloud.size(), 0);
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        keep[i] = index.radius_query(cloud[i].position, radius).size() >= min_neighbors;
    });
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (keep[i]) out.points.push_back(cloud[i]);
    return out;
}

namespace {

struct VoxelKey {
    std::int64_t x, y, z;
    bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const {
        std::size_t h = static_cast<std::size_t>(k.x) * 73856093u;
        h ^= static_cast<std::size_t>(k.y) * 19349663u;
        h ^= static_cast<std::size_t>(k.z) * 83492791u;
        return h;
    }
};

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
    if (voxel <= 0.0) throw std::invalid_argument("voxel_downsample: voxel must be > 0");
    PointCloud out;
    out.scanner_origin = cloud.scanner_origin;
    out.has_color = cloud.has_color;
    out.has_corrected_field = cloud.has_corrected_field;

    // best representative per voxel: (squared distance to cell center, id)
    std::unordered_map<VoxelKey, std::pair<double, std::uint32_t>, VoxelKeyHash> best;
    best.reserve(cloud.size());
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud[i].position;
        const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x() / voxel)),
                           static_cast<std::int64_t>(std::floor(p.y() / voxel)),
                           static_cast<std::int64_t>(std::floor(p.z() / voxel))};
        const Vec3 center{(key.x + 0.5) * voxel, (key.y + 0.5) * voxel, (key.z + 0.5) * voxel};
        const double d2 = (p - center).squaredNorm();
        auto [it, inserted] = best.try_emplace(key, d2, i);
        if (!inserted && d2 < it->second.first) it->second = {d2, i};
    }
    std::vector<std::uint32_t> ids;
    ids.reserve(best.size());
    for (const auto& [key, v] : best) ids.push_back(v.second);
    std::sort(ids.begin(), ids.end());
    out.points.reserve(ids.size());
    for (std::uint32_t id : ids) out.points.push_back(cloud[id]);
    return out;
}

}  // namespace mirage
