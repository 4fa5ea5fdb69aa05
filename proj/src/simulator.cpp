#include "mirage/simulator.hpp"

#include "mirage/radiometry.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

namespace mirage {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Hit {
    double t = 0.0;          // distance along the ray
    Vec3 point{0, 0, 0};
    double cos_incidence = 0.0;
    bool is_glass = false;
    std::size_t surface = 0;  // index into facades or glasses
};

std::optional<Hit> intersect_rect(const Vec3& origin, const Vec3& dir, const Rect& rect) {
    const Vec3 n = rect.normal();
    const double denom = n.dot(dir);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    const double t = n.dot(rect.center - origin) / denom;
    if (t <= 1e-9) return std::nullopt;
    const Vec3 p = origin + t * dir;
    const Vec3 local = p - rect.center;
    const Vec3 u = rect.u_axis.normalized();
    const Vec3 v = rect.v_axis.normalized();
    if (std::abs(local.dot(u)) > rect.half_u || std::abs(local.dot(v)) > rect.half_v)
        return std::nullopt;
    Hit hit;
    hit.t = t;
    hit.point = p;
    hit.cos_incidence = std::abs(denom);
    return hit;
}

std::optional<Hit> nearest_hit(const SceneSpec& spec, const Vec3& origin, const Vec3& dir,
                               std::int64_t skip_glass = -1) {
    std::optional<Hit> best;
    for (std::size_t i = 0; i < spec.facades.size(); ++i) {
        auto h = intersect_rect(origin, dir, spec.facades[i].rect);
        if (h && (!best || h->t < best->t)) {
            h->is_glass = false;
            h->surface = i;
            best = h;
        }
    }
    for (std::size_t i = 0; i < spec.glasses.size(); ++i) {
        if (std::int64_t(i) == skip_glass) continue;
        auto h = intersect_rect(origin, dir, spec.glasses[i].rect);
        if (h && (!best || h->t < best->t)) {
            h->is_glass = true;
            h->surface = i;
            best = h;
        }
    }
    return best;
}

struct PendingReturn {
    double range = 0.0;  // noise-free range along the emitted beam
    Vec3 position{0, 0, 0};
    double intensity = 0.0;
    GtLabel gt = GtLabel::Real;
    Provenance provenance = Provenance::DirectHit;
};

}  // namespace

SimulationResult trace_scene(const SceneSpec& spec) {
    if (spec.grid.step_deg <= 0.0) throw std::invalid_argument("trace_scene: angular step <= 0");

    SimulationResult result;
    result.cloud.scanner_origin = spec.scanner_origin;

    const auto az_steps = static_cast<std::size_t>(
        std::floor((spec.grid.az_end_deg - spec.grid.az_start_deg) / spec.grid.step_deg - 1e-9)) + 1;
    const auto el_steps = static_cast<std::size_t>(
        std::floor((spec.grid.el_end_deg - spec.grid.el_start_deg) / spec.grid.step_deg + 1e-9)) + 1;
    const double intensity_c = spec.intensity_constant;

    std::vector<PendingReturn> returns;
    std::uint64_t beam_index = 0;
    for (std::size_t ia = 0; ia < az_steps; ++ia) {
        const double az = (spec.grid.az_start_deg + double(ia) * spec.grid.step_deg) * kDeg;
        for (std::size_t ie = 0; ie < el_steps; ++ie, ++beam_index) {
            const double el = (spec.grid.el_start_deg + double(ie) * spec.grid.step_deg) * kDeg;
            const Vec3 dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));

            const auto first = nearest_hit(spec, spec.scanner_origin, dir);
            if (!first) continue;

            returns.clear();
            if (!first->is_glass) {
                const auto& facade = spec.facades[first->surface];
                returns.push_back({first->t, first->point,
                                   intensity_c * facade.reflectance * first->cos_incidence /
                                       (first->t * first->t),
                                   GtLabel::Real, Provenance::DirectHit});
            } else {
                const auto& glass = spec.glasses[first->surface];
                const double r_glass = first->t;
                // (a) specular echo at the glass surface
                returns.push_back({r_glass, first->point,
                                   intensity_c * glass.specular * first->cos_incidence /
                                       (r_glass * r_glass),
                                   GtLabel::Real, Provenance::DirectHit});

                // (b) transmitted ray
                if (glass.transmittance > 0.0) {
                    const auto through = nearest_hit(spec, first->point, dir,
                                                     std::int64_t(first->surface));
                    if (through && !through->is_glass) {
                        const double r_total = r_glass + through->t;
                        const auto& facade = spec.facades[through->surface];
                        returns.push_back({r_total, through->point,
                                           intensity_c * glass.transmittance * facade.reflectance *
                                               through->cos_incidence / (r_total * r_total),
                                           GtLabel::Real, Provenance::DirectHit});
                    }
                }

                // (c) reflected ray; a virtual return appears along the
                // original beam at the summed path length
                const Vec3 glass_n = glass.rect.normal();
                const Vec3 rdir = dir - 2.0 * dir.dot(glass_n) * glass_n;
                const auto bounced = nearest_hit(spec, first->point, rdir,
                                                 std::int64_t(first->surface));
                if (bounced && !bounced->is_glass) {
                    const double r_total = r_glass + bounced->t;
                    const auto& facade = spec.facades[bounced->surface];
                    const double base_intensity = intensity_c * glass.specular *
                                                  facade.reflectance * bounced->cos_incidence /
                                                  (r_total * r_total);
                    returns.push_back({r_total, spec.scanner_origin + r_total * dir,
                                       base_intensity, GtLabel::Virtual,
                                       Provenance::VirtualMirror});

                    // (d) one internal-bounce ghost for thick glass
                    if (glass.thickness > 0.0 && first->cos_incidence > 1e-6) {
                        const double extra = 2.0 * glass.thickness / first->cos_incidence;
                        const double r_ghost = r_total + extra;
                        const double ghost_intensity = base_intensity * glass.specular *
                                                       glass.specular * (r_total * r_total) /
                                                       (r_ghost * r_ghost);
                        returns.push_back({r_ghost, spec.scanner_origin + r_ghost * dir,
                                           ghost_intensity, GtLabel::Virtual,
                                           Provenance::GhostMirror});
                    }
                }
            }
            if (returns.empty()) continue;

            std::stable_sort(returns.begin(), returns.end(),
                             [](const PendingReturn& a, const PendingReturn& b) {
                                 return a.range < b.range;
                             });

            std::mt19937_64 rng(spec.seed * 0x9e3779b97f4a7c15ull + beam_index);
            std::normal_distribution<double> noise(0.0, spec.noise_sigma);
            const auto echo_count = static_cast<std::uint8_t>(returns.size());
            for (std::size_t k = 0; k < returns.size(); ++k) {
                PointRecord rec;
                rec.position = returns[k].position;
                if (spec.noise_sigma > 0.0)
                    rec.position += Vec3(noise(rng), noise(rng), noise(rng));
                rec.intensity_raw = static_cast<float>(returns[k].intensity);
                rec.echo_index = static_cast<std::uint8_t>(k + 1);
                rec.echo_count = echo_count;
                rec.gt_label = returns[k].gt;
                result.cloud.points.push_back(rec);
                result.provenance.push_back(returns[k].provenance);
            }
        }
    }
    return result;
}

PlaneSet scene_glass_planes(const SceneSpec& spec) {
    PlaneSet planes;
    for (const auto& glass : spec.glasses) {
        Plane p;
        p.normal = glass.rect.normal();
        p.offset = -p.normal.dot(glass.rect.center);
        if (p.signed_distance(spec.scanner_origin) < 0.0) {
            p.normal = -p.normal;
            p.offset = -p.offset;
        }
        p.centroid = glass.rect.center;
        planes.push_back(std::move(p));
    }
    return planes;
}

std::vector<CalibrationSample> scene_calibration_samples(const SceneSpec& spec) {
    SceneSpec clean = spec;
    clean.noise_sigma = 0.0;
    std::vector<CalibrationSample> samples;

    const auto az_steps = static_cast<std::size_t>(
        std::floor((clean.grid.az_end_deg - clean.grid.az_start_deg) / clean.grid.step_deg - 1e-9)) + 1;
    const auto el_steps = static_cast<std::size_t>(
        std::floor((clean.grid.el_end_deg - clean.grid.el_start_deg) / clean.grid.step_deg + 1e-9)) + 1;
    for (std::size_t ia = 0; ia < az_steps; ++ia) {
        const double az = (clean.grid.az_start_deg + double(ia) * clean.grid.step_deg) * kDeg;
        for (std::size_t ie = 0; ie < el_steps; ++ie) {
            const double el = (clean.grid.el_start_deg + double(ie) * clean.grid.step_deg) * kDeg;
            const Vec3 dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
            const auto first = nearest_hit(clean, clean.scanner_origin, dir);
            if (!first || first->is_glass) continue;
            const auto& facade = clean.facades[first->surface];
            samples.push_back({clean.intensity_constant * facade.reflectance *
                                   first->cos_incidence / (first->t * first->t),
                               first->cos_incidence, first->t});
        }
    }
    return samples;
}

namespace {

Rect wall_rect(const Vec3& center, const Vec3& u, double hu, const Vec3& v, double hv) {
    return Rect{center, u, v, hu, hv};
}

}  // namespace

SceneSpec scene_presets(const std::string& name) {
    SceneSpec spec;
    spec.scanner_origin = Vec3(0.0, 0.0, 2.0);
    spec.grid = {0.0, 360.0, -40.0, 60.0, 0.4};
    spec.noise_sigma = 0.005;
    spec.intensity_constant = 5000.0;
    spec.seed = 1;

    const Vec3 ux = Vec3::UnitX(), uy = Vec3::UnitY(), uz = Vec3::UnitZ();
    const GlassSpec glass_x8{wall_rect({8, 0, 3}, uy, 6.0, uz, 3.0), 0.85, 0.35, 0.0};

    if (name == "one-wall") {
        spec.glasses = {glass_x8};
        spec.facades = {
            {wall_rect({-5, 0, 3}, uy, 10.0, uz, 4.0), 0.3},   // reflection target
            {wall_rect({16, 0, 3}, uy, 7.0, uz, 3.0), 0.3},    // behind the glass
        };
        return spec;
    }
    if (name == "two-wall" || name == "three-wall") {
        spec.glasses = {glass_x8, {wall_rect({0, 9, 3}, ux, 5.0, uz, 3.0), 0.85, 0.35, 0.0}};
        spec.facades = {
            {wall_rect({-5, 0, 3}, uy, 7.0, uz, 4.0), 0.3},
            {wall_rect({0, -5, 3}, ux, 7.0, uz, 4.0), 0.3},
            {wall_rect({16, 0, 3}, uy, 7.0, uz, 3.0), 0.3},
            {wall_rect({0, 17, 3}, ux, 7.0, uz, 3.0), 0.3},
        };
        if (name == "three-wall")
            spec.glasses.push_back({wall_rect({0, 0, 6}, ux, 4.0, uy, 4.0), 0.85, 0.35, 0.0});
        return spec;
    }
    if (name == "four-wall-courtyard") {
        spec.glasses = {
            {wall_rect({8, 0, 3}, uy, 6.0, uz, 3.0), 0.85, 0.35, 0.0},
            {wall_rect({-8, 0, 3}, uy, 6.0, uz, 3.0), 0.85, 0.35, 0.0},
            {wall_rect({0, 8, 3}, ux, 6.0, uz, 3.0), 0.85, 0.35, 0.0},
            {wall_rect({0, -8, 3}, ux, 6.0, uz, 3.0), 0.85, 0.35, 0.0},
        };
        const Vec3 diag_a = Vec3(-1, 1, 0).normalized();
        const Vec3 diag_b = Vec3(1, 1, 0).normalized();
        spec.facades = {
            {wall_rect({4.5, 4.5, 2.5}, diag_a, 2.5, uz, 2.5), 0.3},
            {wall_rect({-4.5, 4.5, 2.5}, diag_b, 2.5, uz, 2.5), 0.3},
            {wall_rect({-4.5, -4.5, 2.5}, diag_a, 2.5, uz, 2.5), 0.3},
            {wall_rect({4.5, -4.5, 2.5}, diag_b, 2.5, uz, 2.5), 0.3},
        };
        return spec;
    }
    if (name == "indoor-tile") {
        spec.scanner_origin = Vec3(0.0, 0.0, 1.5);
        spec.glasses = {{wall_rect({0, 0, 0}, ux, 6.0, uy, 6.0), 0.8, 0.0, 0.0}};
        spec.facades = {
            {wall_rect({6, 0, 1.75}, uy, 6.0, uz, 1.75), 0.35},
            {wall_rect({-6, 0, 1.75}, uy, 6.0, uz, 1.75), 0.35},
            {wall_rect({0, 6, 1.75}, ux, 6.0, uz, 1.75), 0.35},
            {wall_rect({0, -6, 1.75}, ux, 6.0, uz, 1.75), 0.35},
        };
        return spec;
    }
    throw std::invalid_argument("scene_presets: unknown preset '" + name + "'");
}

namespace {

nlohmann::ordered_json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 vec_from(const nlohmann::json& j) { return Vec3(j.at(0), j.at(1), j.at(2)); }

nlohmann::ordered_json rect_json(const Rect& r) {
    nlohmann::ordered_json j;
    j["center"] = vec_json(r.center);
    j["u_axis"] = vec_json(r.u_axis);
    j["v_axis"] = vec_json(r.v_axis);
    j["half_u"] = r.half_u;
    j["half_v"] = r.half_v;
    return j;
}

Rect rect_from(const nlohmann::json& j) {
    return Rect{vec_from(j.at("center")), vec_from(j.at("u_axis")), vec_from(j.at("v_axis")),
                j.at("half_u"), j.at("half_v")};
}

}  // namespace

void save_scene_json(const SceneSpec& spec, const std::string& path) {
    nlohmann::ordered_json j;
    j["scanner_origin"] = vec_json(spec.scanner_origin);
    j["facades"] = nlohmann::ordered_json::array();
    for (const auto& f : spec.facades) {
        auto fj = rect_json(f.rect);
        fj["reflectance"] = f.reflectance;
        j["facades"].push_back(std::move(fj));
    }
    j["glasses"] = nlohmann::ordered_json::array();
    for (const auto& g : spec.glasses) {
        auto gj = rect_json(g.rect);
        gj["specular"] = g.specular;
        gj["transmittance"] = g.transmittance;
        gj["thickness"] = g.thickness;
        j["glasses"].push_back(std::move(gj));
    }
    j["grid"] = {{"az_start_deg", spec.grid.az_start_deg}, {"az_end_deg", spec.grid.az_end_deg},
                 {"el_start_deg", spec.grid.el_start_deg}, {"el_end_deg", spec.grid.el_end_deg},
                 {"step_deg", spec.grid.step_deg}};
    j["noise_sigma"] = spec.noise_sigma;
    j["intensity_constant"] = spec.intensity_constant;
    j["seed"] = spec.seed;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
}

SceneSpec load_scene_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("scene JSON: " + std::string(e.what()));
    }
    SceneSpec spec;
    spec.scanner_origin = vec_from(j.at("scanner_origin"));
    for (const auto& fj : j.at("facades"))
        spec.facades.push_back({rect_from(fj), fj.at("reflectance")});
    for (const auto& gj : j.at("glasses"))
        spec.glasses.push_back({rect_from(gj), gj.at("specular"), gj.at("transmittance"),
                                gj.value("thickness", 0.0)});
    const auto& g = j.at("grid");
    spec.grid = {g.at("az_start_deg"), g.at("az_end_deg"), g.at("el_start_deg"),
                 g.at("el_end_deg"), g.at("step_deg")};
    spec.noise_sigma = j.value("noise_sigma", 0.005);
    spec.intensity_constant = j.value("intensity_constant", 5000.0);
    spec.seed = j.value("seed", std::uint64_t{1});
    return spec;
}

}  // namespace mirage
