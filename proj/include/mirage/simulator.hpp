#pragma once

#include "mirage/planes.hpp"
#include "mirage/types.hpp"

#include <string>
#include <vector>

namespace mirage {

/// Finite rectangle: center with two orthogonal half-extent axes; the
/// surface normal is u x v normalized.
struct Rect {
    Vec3 center{0.0, 0.0, 0.0};
    Vec3 u_axis{1.0, 0.0, 0.0};
    Vec3 v_axis{0.0, 1.0, 0.0};
    double half_u = 1.0;
    double half_v = 1.0;

    Vec3 normal() const { return u_axis.cross(v_axis).normalized(); }
};

struct FacadeSpec {
    Rect rect;
    double reflectance = 0.3;  // Lambertian rho
};

struct GlassSpec {
    Rect rect;
    double specular = 0.85;
    double transmittance = 0.35;
    double thickness = 0.0;  // > 0 adds one internal-bounce ghost return
};

struct BeamGrid {
    double az_start_deg = 0.0;
    double az_end_deg = 360.0;
    double el_start_deg = -40.0;
    double el_end_deg = 60.0;
    double step_deg = 1.0;
};

struct SceneSpec {
    Vec3 scanner_origin{0.0, 0.0, 0.0};
    std::vector<FacadeSpec> facades;
    std::vector<GlassSpec> glasses;
    BeamGrid grid;
    double noise_sigma = 0.005;
    double intensity_constant = 5000.0;
    std::uint64_t seed = 1;
};

enum class Provenance : std::uint8_t { DirectHit = 0, VirtualMirror = 1, GhostMirror = 2 };

struct SimulationResult {
    PointCloud cloud;
    std::vector<Provenance> provenance;  // aligned with cloud.points
};

/// Ray-traces the beam grid: specular first echoes at glass, transmitted
/// direct hits, mirrored virtual returns, and internal-bounce ghosts.
SimulationResult trace_scene(const SceneSpec& spec);

/// Fixed documented scenes. `one-wall`, `two-wall`, `three-wall`,
/// `four-wall-courtyard` have that many glass walls; `indoor-tile` is a
/// room over a reflective tile floor.
SceneSpec scene_presets(const std::string& name);

/// Ground-truth reflective planes of a scene (scanner-facing orientation).
PlaneSet scene_glass_planes(const SceneSpec& spec);

/// Calibration samples (intensity, true cos incidence, true range) from the
/// noise-free first-echo direct returns only.
std::vector<struct CalibrationSample> scene_calibration_samples(const SceneSpec& spec);

SceneSpec load_scene_json(const std::string& path);
void save_scene_json(const SceneSpec& spec, const std::string& path);

}  // namespace mirage
