#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mirage/descriptor.hpp"
#include "mirage/normals.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace mirage;

namespace {

Plane plane_x(double x, const Vec3& scanner) {
    // plane x = x0 with the scanner-facing orientation convention
    Plane p;
    p.normal = Vec3(1, 0, 0);
    p.offset = -x;
    if (p.signed_distance(scanner) < 0.0) {
        p.normal = -p.normal;
        p.offset = -p.offset;
    }
    return p;
}

PointCloud cloud_from(const std::vector<Vec3>& pts, const Vec3& origin) {
    PointCloud cloud;
    cloud.scanner_origin = origin;
    for (const auto& p : pts) {
        PointRecord rec;
        rec.position = p;
        cloud.points.push_back(rec);
    }
    return cloud;
}

std::vector<Vec3> random_blob(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.15);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // a few planar-ish patches around a center, so normals are non-trivial
    std::vector<Vec3> pts;
    const Vec3 center(u(rng) * 2.0, u(rng) * 2.0, 5.0 + u(rng));
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 p = center + Vec3(g(rng), g(rng), 0.3 * g(rng));
        pts.push_back(p);
    }
    return pts;
}

}  // namespace

TEST_CASE("normal estimation: exact and noisy cases") {
    std::vector<Vec3> tri = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    const auto n3 = estimate_normal(tri);
    CHECK(!n3.degenerate);
    CHECK(std::abs(n3.normal.dot(Vec3::UnitZ())) == doctest::Approx(1.0));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::normal_distribution<double> noise(0.0, 0.005);
    const Vec3 truth = Vec3(0.3, -0.2, 1.0).normalized();
    const Vec3 a = truth.cross(Vec3::UnitX()).normalized();
    const Vec3 b = truth.cross(a);
    std::vector<Vec3> patch;
    for (int i = 0; i < 50; ++i)
        patch.push_back(u(rng) * a + u(rng) * b + noise(rng) * truth);
    const auto est = estimate_normal(patch);
    CHECK(std::abs(est.normal.dot(truth)) >= std::cos(2.0 * std::numbers::pi / 180.0));

    std::vector<Vec3> collinear = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
    CHECK(estimate_normal(collinear).degenerate);

    const auto toward = estimate_normal_toward(tri, Vec3(0, 0, 0), Vec3(0, 0, -4));
    CHECK(toward.normal.z() < 0.0);
}

TEST_CASE("mirror point: fixed points, hand example, involution") {
    const Plane p = plane_x(2.0, Vec3(0, 0, 0));
    CHECK((mirror_point(Vec3(2, 7, -3), p) - Vec3(2, 7, -3)).norm() < 1e-12);
    CHECK((mirror_point(Vec3(4, 2, 0), p) - Vec3(0, 2, 0)).norm() < 1e-12);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 300; ++i) {
        Plane q;
        q.normal = Vec3(u(rng), u(rng), u(rng));
        if (q.normal.norm() < 0.1) continue;
        q.normal.normalize();
        q.offset = u(rng);
        const Vec3 x(u(rng), u(rng), u(rng));
        CHECK((mirror_point(mirror_point(x, q), q) - x).norm() < 1e-12);
        const Vec3 dir = Vec3(u(rng), u(rng), u(rng)).normalized();
        CHECK(std::abs(mirror_direction(dir, q).norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("reflection frame: hand geometry and rejection cases") {
    const Vec3 origin(0, 0, 0);
    const Plane p = plane_x(2.0, origin);
    const auto frame = reflection_frame(Vec3(4, 2, 0), origin, p);
    REQUIRE(frame);
    CHECK((frame->glass_hit - Vec3(2, 1, 0)).norm() < 1e-12);
    CHECK((frame->incident_dir - Vec3(2, 1, 0).normalized()).norm() < 1e-12);
    CHECK((frame->reflected_dir - Vec3(-2, 1, 0).normalized()).norm() < 1e-12);
    CHECK(std::abs(p.signed_distance(frame->glass_hit)) <= 1e-9);

    CHECK(!reflection_frame(Vec3(1, 0, 0), origin, p));  // in front
    CHECK(!reflection_frame(Vec3(2, 5, 1), origin, p));  // exactly on the plane
}

TEST_CASE("deviation angle histogram: hand bin placement") {
    const Vec3 axis = Vec3::UnitZ();
    const std::size_t bins = 11;
    const double bin_width = (std::numbers::pi / 2.0) / double(bins);

    std::vector<Vec3> parallel(7, Vec3::UnitZ());
    auto h0 = deviation_angle_feature(parallel, axis, bins);
    CHECK(h0[0] == doctest::Approx(1.0));

    std::vector<Vec3> perp(5, Vec3::UnitX());
    auto hl = deviation_angle_feature(perp, axis, bins);
    CHECK(hl[bins - 1] == doctest::Approx(1.0));  // pi/2 lands in the closed top bin

    const double t = std::numbers::pi / 4.0;
    std::vector<Vec3> diag(4, Vec3(std::sin(t), 0.0, std::cos(t)));
    auto hd = deviation_angle_feature(diag, axis, bins);
    const std::size_t expect_bin = std::size_t(t / bin_width);  // == 5 for 11 bins
    CHECK(expect_bin == 5);
    CHECK(hd[expect_bin] == doctest::Approx(1.0));

    // unoriented normals: flipping a normal must not change the histogram
    std::vector<Vec3> flipped(4, Vec3(-std::sin(t), 0.0, -std::cos(t)));
    CHECK(deviation_angle_feature(flipped, axis, bins) == hd);

    // mixed input spreads mass but stays normalized
    std::vector<Vec3> mixed = {Vec3::UnitZ(), Vec3::UnitX(), Vec3(std::sin(t), 0, std::cos(t))};
    auto hm = deviation_angle_feature(mixed, axis, bins);
    double sum = 0.0;
    for (double v : hm) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("point density histogram: hand projected distances") {
    const Vec3 query(0, 0, 0);
    const Vec3 axis = Vec3::UnitZ();
    const double r = 1.0;
    const std::size_t bins = 10;  // bin width 0.1
    // neighbor at (0.35, 0, 5): projected distance 0.35 -> bin 3
    // neighbor on the axis: distance 0 -> bin 0
    // neighbor at exactly r: top bin (right-closed)
    std::vector<Vec3> neighbors = {{0.35, 0, 5.0}, {0.0, 0.0, 0.7}, {1.0, 0.0, 0.0}};
    const auto h = point_density_feature(query, axis, neighbors, r, bins);
    CHECK(h[3] == doctest::Approx(1.0 / 3.0));
    CHECK(h[0] == doctest::Approx(1.0 / 3.0));
    CHECK(h[bins - 1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("RE-LSFH is reflection invariant over random neighborhoods") {
    DescriptorParams params;
    params.radius = 0.6;
    params.normal_k = 10;
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int tested = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto pts = random_blob(160, 1000 + std::uint64_t(trial));
        const Vec3 origin(0, 0, 0);
        PointCloud cloud = cloud_from(pts, origin);
        SpatialIndex index(cloud);
        NormalCache normals(cloud, index, params.normal_k, 1);
        const Vec3 axis = Vec3(u(rng), u(rng), 1.0 + std::abs(u(rng))).normalized();
        const std::uint32_t query = 0;
        const auto orig = compute_relsfh(cloud, index, normals, query, axis, params);
        if (orig.empty) continue;
        ++tested;

        // mirror the whole neighborhood (and the axis) across a random plane
        Plane mirror;
        mirror.normal = Vec3(u(rng), u(rng), u(rng));
        if (mirror.normal.norm() < 0.1) mirror.normal = Vec3(1, 0, 0);
        mirror.normal.normalize();
        mirror.offset = u(rng) * 3.0;
        std::vector<Vec3> mirrored;
        for (const auto& p : pts) mirrored.push_back(mirror_point(p, mirror));
        PointCloud mcloud = cloud_from(mirrored, mirror_point(origin, mirror));
        SpatialIndex mindex(mcloud);
        NormalCache mnormals(mcloud, mindex, params.normal_k, 1);
        const Vec3 maxis = mirror_direction(axis, mirror);
        const auto refl = compute_relsfh(mcloud, mindex, mnormals, query, maxis, params);

        REQUIRE(!refl.empty);
        double l1_angle = 0.0, l1_density = 0.0;
        for (std::size_t b = 0; b < orig.angle_hist.size(); ++b)
            l1_angle += std::abs(orig.angle_hist[b] - refl.angle_hist[b]);
        for (std::size_t b = 0; b < orig.density_hist.size(); ++b)
            l1_density += std::abs(orig.density_hist[b] - refl.density_hist[b]);
        CHECK(l1_angle <= 1e-9);
        CHECK(l1_density <= 1e-9);
    }
    CHECK(tested >= 90);
}

TEST_CASE("RE-LSFH is rotation equivariant (axis co-rotated)") {
    DescriptorParams params;
    params.radius = 0.6;
    params.normal_k = 10;
    const auto pts = random_blob(200, 321);
    PointCloud cloud = cloud_from(pts, Vec3(0, 0, 0));
    SpatialIndex index(cloud);
    NormalCache normals(cloud, index, params.normal_k, 1);
    const Vec3 axis = Vec3(0.2, -0.4, 1.0).normalized();
    const auto orig = compute_relsfh(cloud, index, normals, 0, axis, params);
    REQUIRE(!orig.empty);

    const Eigen::AngleAxisd rot(1.1, Vec3(0.3, 1.0, -0.2).normalized());
    std::vector<Vec3> rotated;
    for (const auto& p : pts) rotated.push_back(rot * p);
    PointCloud rcloud = cloud_from(rotated, rot * Vec3(0, 0, 0));
    SpatialIndex rindex(rcloud);
    NormalCache rnormals(rcloud, rindex, params.normal_k, 1);
    const auto rdesc = compute_relsfh(rcloud, rindex, rnormals, 0, rot * axis, params);
    REQUIRE(!rdesc.empty);
    for (std::size_t b = 0; b < orig.angle_hist.size(); ++b)
        CHECK(orig.angle_hist[b] == doctest::Approx(rdesc.angle_hist[b]).epsilon(1e-9));
    for (std::size_t b = 0; b < orig.density_hist.size(); ++b)
        CHECK(orig.density_hist[b] == doctest::Approx(rdesc.density_hist[b]).epsilon(1e-9));
}

TEST_CASE("descriptor robustness: random 10% subsampling moves bins only slightly") {
    DescriptorParams params;
    params.radius = 0.8;
    params.normal_k = 10;
    const auto pts = random_blob(2000, 777);
    PointCloud cloud = cloud_from(pts, Vec3(0, 0, 0));
    SpatialIndex index(cloud);
    NormalCache normals(cloud, index, params.normal_k, 1);
    const Vec3 axis = Vec3(0, 0, 1);
    const auto full = compute_relsfh(cloud, index, normals, 0, axis, params);
    REQUIRE(!full.empty);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec3> kept = {pts[0]};
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (u(rng) > 0.1) kept.push_back(pts[i]);
    PointCloud scloud = cloud_from(kept, Vec3(0, 0, 0));
    SpatialIndex sindex(scloud);
    NormalCache snormals(scloud, sindex, params.normal_k, 1);
    const auto sub = compute_relsfh(scloud, sindex, snormals, 0, axis, params);
    REQUIRE(!sub.empty);
    double l1 = 0.0;
    for (std::size_t b = 0; b < full.angle_hist.size(); ++b)
        l1 += std::abs(full.angle_hist[b] - sub.angle_hist[b]);
    for (std::size_t b = 0; b < full.density_hist.size(); ++b)
        l1 += std::abs(full.density_hist[b] - sub.density_hist[b]);
    CHECK(l1 < 0.25);
}

TEST_CASE("empty neighborhoods come back flagged with zero histograms") {
    DescriptorParams params;
    params.radius = 0.1;
    std::vector<Vec3> pts = {{0, 0, 0}, {5, 5, 5}, {6, 5, 5}, {5, 6, 5}};
    PointCloud cloud = cloud_from(pts, Vec3(0, 0, 0));
    SpatialIndex index(cloud);
    NormalCache normals(cloud, index, 3, 1);
    const auto d = compute_relsfh(cloud, index, normals, 0, Vec3::UnitZ(), params);
    CHECK(d.empty);
    CHECK(d.neighbor_count == 0);
    for (double v : d.angle_hist) CHECK(v == 0.0);
    for (double v : d.density_hist) CHECK(v == 0.0);
}
