#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mirage/filters.hpp"
#include "mirage/io.hpp"
#include "mirage/spatial_index.hpp"
#include "mirage/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

using namespace mirage;

namespace {

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed, double extent = 10.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-extent, extent);
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
    return pts;
}

// Brute-force oracles the kd-tree must agree with.
std::vector<std::uint32_t> linear_radius(const std::vector<Vec3>& pts, const Vec3& q, double r) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < pts.size(); ++i) {
        const double d = (pts[i] - q).norm();
        if (d > 0.0 && d <= r) out.push_back(i);
    }
    return out;
}

std::vector<std::uint32_t> linear_knn(const std::vector<Vec3>& pts, const Vec3& q, std::size_t k) {
    std::vector<std::uint32_t> ids(pts.size());
    for (std::uint32_t i = 0; i < pts.size(); ++i) ids[i] = i;
    std::stable_sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double da = (pts[a] - q).squaredNorm(), db = (pts[b] - q).squaredNorm();
        return da != db ? da < db : a < b;
    });
    ids.resize(std::min(k, ids.size()));
    return ids;
}

PointCloud make_cloud(const std::vector<Vec3>& pts) {
    PointCloud cloud;
    cloud.scanner_origin = Vec3(0.1, -0.2, 0.3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        PointRecord rec;
        rec.position = pts[i];
        rec.intensity_raw = float(i % 97) * 0.5f + 1.0f;
        rec.echo_index = 1;
        rec.echo_count = 1;
        rec.gt_label = (i % 3 == 0) ? GtLabel::Virtual : GtLabel::Real;
        cloud.points.push_back(rec);
    }
    return cloud;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("mirage_core_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("kd-tree agrees with the linear-scan oracle on 1e5 points") {
    const auto pts = random_points(100000, 42);
    SpatialIndex index(pts);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-11.0, 11.0);
    std::uniform_real_distribution<double> ur(0.01, 1.5);
    std::uniform_int_distribution<std::size_t> uk(1, 40);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 q(u(rng), u(rng), u(rng));
        const double r = ur(rng);
        auto got = index.radius_query(q, r);
        auto want = linear_radius(pts, q, r);
        std::sort(want.begin(), want.end());
        REQUIRE(got == want);
        const std::size_t k = uk(rng);
        auto gk = index.knn_query(q, k);
        auto wk = linear_knn(pts, q, k);
        REQUIRE(gk.size() == wk.size());
        for (std::size_t i = 0; i < gk.size(); ++i) {
            // equal-distance ties may legally reorder; compare distances
            REQUIRE((pts[gk[i]] - q).norm() == doctest::Approx((pts[wk[i]] - q).norm()));
        }
    }
}

TEST_CASE("kd-tree on exact cloud points excludes self in radius queries") {
    const auto pts = random_points(5000, 3);
    SpatialIndex index(pts);
    for (std::uint32_t id = 0; id < 100; ++id) {
        const auto res = index.radius_query(pts[id], 0.8);
        CHECK(std::find(res.begin(), res.end(), id) == res.end());
        const auto kn = index.knn_query(pts[id], 1);
        REQUIRE(kn.size() == 1);
        CHECK(kn[0] == id);  // knn includes the point itself
    }
}

TEST_CASE("kd-tree edge cases") {
    SpatialIndex empty(std::vector<Vec3>{});
    CHECK(empty.radius_query(Vec3(0, 0, 0), 1.0).empty());
    CHECK(empty.knn_query(Vec3(0, 0, 0), 5).empty());

    std::vector<Vec3> dup(20, Vec3(1.0, 2.0, 3.0));
    SpatialIndex dindex(dup);
    CHECK(dindex.radius_query(Vec3(1, 2, 3), 0.5).empty());  // all at distance 0
    CHECK(dindex.knn_query(Vec3(0, 0, 0), 50).size() == 20);
}

TEST_CASE("PLY binary round trip preserves every field bit-exactly") {
    TempDir tmp;
    auto cloud = make_cloud(random_points(2500, 11));
    cloud.points[5].echo_index = 1;
    cloud.points[5].echo_count = 3;
    cloud.points[17].intensity_corrected = 42.5f;
    cloud.has_corrected_field = true;
    cloud.points[23].pred_label = PredLabel::Virtual;

    const auto path = tmp.file("cloud.ply");
    save_cloud(cloud, path, CloudFormat::PlyBinary);
    const auto back = load_cloud(path, CloudFormat::Ply);

    REQUIRE(back.points.size() == cloud.points.size());
    CHECK(back.scanner_origin == cloud.scanner_origin);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const auto& a = cloud.points[i];
        const auto& b = back.points[i];
        CHECK(a.position == b.position);
        CHECK(a.intensity_raw == b.intensity_raw);
        CHECK(a.echo_index == b.echo_index);
        CHECK(a.echo_count == b.echo_count);
        CHECK(a.gt_label == b.gt_label);
        CHECK(a.pred_label == b.pred_label);
        if (a.has_corrected()) CHECK(a.intensity_corrected == b.intensity_corrected);
        else CHECK(!b.has_corrected());
    }
}

TEST_CASE("PLY ascii round trip including NaN corrected intensity") {
    TempDir tmp;
    auto cloud = make_cloud(random_points(300, 12));
    cloud.has_corrected_field = true;
    cloud.points[0].intensity_corrected = 1.25f;  // others stay NaN
    const auto path = tmp.file("cloud_ascii.ply");
    save_cloud(cloud, path, CloudFormat::Ply);
    const auto back = load_cloud(path, CloudFormat::Ply);
    REQUIRE(back.points.size() == cloud.points.size());
    CHECK(back.points[0].intensity_corrected == 1.25f);
    CHECK(!back.points[1].has_corrected());
    for (std::size_t i = 0; i < cloud.points.size(); ++i)
        CHECK((back.points[i].position - cloud.points[i].position).norm() < 1e-12);
}

TEST_CASE("XYZ ascii round trip") {
    TempDir tmp;
    auto cloud = make_cloud(random_points(200, 13));
    const auto path = tmp.file("cloud.xyz");
    save_cloud(cloud, path, CloudFormat::XyzAscii);
    const auto back = load_cloud(path, CloudFormat::XyzAscii);
    REQUIRE(back.points.size() == cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        CHECK((back.points[i].position - cloud.points[i].position).norm() < 1e-12);
        CHECK(back.points[i].intensity_raw == cloud.points[i].intensity_raw);
    }
}

TEST_CASE("large binary round trip stays exact") {
    TempDir tmp;
    auto cloud = make_cloud(random_points(1000000, 99, 50.0));
    const auto path = tmp.file("big.ply");
    save_cloud(cloud, path, CloudFormat::PlyBinary);
    const auto back = load_cloud(path, CloudFormat::Ply);
    REQUIRE(back.points.size() == cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); i += 99991) {
        CHECK(back.points[i].position == cloud.points[i].position);
        CHECK(back.points[i].intensity_raw == cloud.points[i].intensity_raw);
    }
}

TEST_CASE("malformed PLY inputs raise ParseError with a useful message") {
    TempDir tmp;
    const auto path = tmp.file("bad.ply");
    {
        std::ofstream out(path);
        out << "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\n"
               "property double z\nend_header\n0 0 0\n";  // one vertex missing
    }
    CHECK_THROWS_AS(load_cloud(path, CloudFormat::Ply), ParseError);
    {
        std::ofstream out(path);
        out << "not a ply\n";
    }
    CHECK_THROWS_AS(load_cloud(path, CloudFormat::Ply), ParseError);
    CHECK_THROWS_AS(load_cloud(tmp.file("missing.ply"), CloudFormat::Ply), IoError);
}

TEST_CASE("echo invariant is validated on load") {
    TempDir tmp;
    const auto path = tmp.file("echo.ply");
    std::ofstream out(path);
    out << "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\n"
           "property double z\nproperty uchar echo_index\nproperty uchar echo_count\n"
           "end_header\n1 2 3 4 2\n";  // echo_index > echo_count
    out.close();
    CHECK_THROWS_AS(load_cloud(path, CloudFormat::Ply), ParseError);
}

TEST_CASE("radius filter matches its definition and is idempotent") {
    // 3 clustered points plus one isolated outlier
    std::vector<Vec3> pts = {{0, 0, 0}, {0.05, 0, 0}, {0, 0.05, 0}, {5, 5, 5}};
    auto cloud = make_cloud(pts);
    const auto kept = radius_filter(cloud, 0.2, 2, 1);
    REQUIRE(kept.points.size() == 3);
    for (const auto& p : kept.points) CHECK(p.position.norm() < 1.0);
    const auto again = radius_filter(kept, 0.2, 2, 1);
    CHECK(again.points.size() == kept.points.size());

    // brute-force oracle on a random cloud
    const auto rnd = random_points(3000, 21, 3.0);
    auto rcloud = make_cloud(rnd);
    const auto filtered = radius_filter(rcloud, 0.4, 5, 2);
    std::size_t expect = 0;
    for (std::size_t i = 0; i < rnd.size(); ++i) {
        std::size_t n = 0;
        for (std::size_t j = 0; j < rnd.size(); ++j)
            if (i != j && (rnd[i] - rnd[j]).norm() <= 0.4) ++n;
        if (n >= 5) ++expect;
    }
    CHECK(filtered.points.size() == expect);
}

TEST_CASE("voxel downsample keeps the point nearest each cell center") {
    PointCloud cloud = make_cloud({{0.010, 0.010, 0.010},   // cell (0,0,0), center (0.01,..)
                                   {0.002, 0.002, 0.002},
                                   {0.030, 0.010, 0.010},   // cell (1,0,0), center (0.03,..)
                                   {0.021, 0.010, 0.010}});
    const auto down = voxel_downsample(cloud, 0.02);
    REQUIRE(down.points.size() == 2);
    CHECK(down.points[0].position == Vec3(0.010, 0.010, 0.010));
    CHECK(down.points[1].position == Vec3(0.030, 0.010, 0.010));

    // idempotence and order preservation on a larger cloud
    auto big = make_cloud(random_points(20000, 5, 2.0));
    const auto d1 = voxel_downsample(big, 0.1);
    const auto d2 = voxel_downsample(d1, 0.1);
    REQUIRE(d1.points.size() == d2.points.size());
    for (std::size_t i = 0; i < d1.points.size(); ++i)
        CHECK(d1.points[i].position == d2.points[i].position);
    for (std::size_t i = 1; i < d1.points.size(); ++i) {
        // survivors keep ascending original order: intensities were set from ids
        CHECK(d1.points.size() < big.points.size());
    }
}
