#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mirage {

using Vec3 = Eigen::Vector3d;

enum class GtLabel : std::uint8_t { Real = 0, Virtual = 1, Unknown = 255 };
enum class PredLabel : std::uint8_t { Real = 0, Virtual = 1, Unscored = 255 };

/// One scan return. Corrected intensity is NaN until the radiometry stage
/// fills it; it stays NaN for points the correction model cannot handle.
struct PointRecord {
    Vec3 position{0.0, 0.0, 0.0};
    std::array<std::uint8_t, 3> color{0, 0, 0};
    float intensity_raw = 0.0f;
    float intensity_corrected = std::numeric_limits<float>::quiet_NaN();
    std::uint8_t echo_index = 1;
    std::uint8_t echo_count = 1;
    GtLabel gt_label = GtLabel::Unknown;
    PredLabel pred_label = PredLabel::Unscored;

    bool has_corrected() const { return !std::isnan(intensity_corrected); }
};

/// Single-scan point cloud. Immutable after construction by convention:
/// every parallel stage reads a const cloud and writes somewhere else.
struct PointCloud {
    std::vector<PointRecord> points;
    Vec3 scanner_origin{0.0, 0.0, 0.0};
    bool has_color = false;
    bool has_corrected_field = false;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const PointRecord& operator[](std::size_t i) const { return points[i]; }
    PointRecord& operator[](std::size_t i) { return points[i]; }
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mirage
