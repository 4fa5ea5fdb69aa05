#pragma once

#include "mirage/types.hpp"

namespace mirage {

/// Keep points that have at least min_neighbors other points within radius.
PointCloud radius_filter(const PointCloud& cloud, double radius, std::size_t min_neighbors,
                         unsigned threads = 0);

/// One survivor per occupied voxel: the point nearest the voxel cell center,
/// lowest id on ties. Surviving records are copied unchanged.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

}  // namespace mirage
