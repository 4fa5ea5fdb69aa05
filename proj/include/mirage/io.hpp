#pragma once

#include "mirage/types.hpp"

#include <string>

namespace mirage {

enum class CloudFormat { Ply, PlyBinary, XyzAscii };

/// Format selection for load: PLY ASCII and binary share the `.ply` reader,
/// which follows the header. Saving distinguishes ascii vs binary.
PointCloud load_cloud(const std::string& path, CloudFormat format);
void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format);

/// Picks the reader from the file extension (.ply vs .xyz/.txt).
PointCloud load_cloud_auto(const std::string& path);

}  // namespace mirage
