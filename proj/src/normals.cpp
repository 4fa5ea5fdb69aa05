#include "mirage/normals.hpp"

#include "mirage/parallel.hpp"

#include <Eigen/Eigenvalues>

namespace mirage {

NormalEstimate estimate_normal(std::span<const Vec3> positions) {
    NormalEstimate out;
    if (positions.size() < 3) {
        out.degenerate = true;
        return out;
    }
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : positions) centroid += p;
    centroid /= double(positions.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : positions) {
        const Vec3 d = p - centroid;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Vec3 evals = solver.eigenvalues();  // ascending
    // rank < 2: the two largest eigenvalues do not both carry spread
    const double scale = evals[2];
    if (scale <= 0.0 || evals[1] <= 1e-12 * scale) {
        out.degenerate = true;
        return out;
    }
    out.normal = solver.eigenvectors().col(0);
    return out;
}

NormalEstimate estimate_normal_toward(std::span<const Vec3> positions, const Vec3& at,
                                      const Vec3& toward) {
    NormalEstimate out = estimate_normal(positions);
    if (!out.degenerate && out.normal.dot(toward - at) < 0.0) out.normal = -out.normal;
    return out;
}

NormalCache::NormalCache(const PointCloud& cloud, const SpatialIndex& index, std::size_t k,
                         unsigned threads) {
    normals_.resize(cloud.size());
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        const auto ids = index.knn_query(cloud[i].position, k);
        std::vector<Vec3> pts;
        pts.reserve(ids.size());
        for (auto id : ids) pts.push_back(cloud[id].position);
        normals_[i] = estimate_normal_toward(pts, cloud[i].position, cloud.scanner_origin);
    });
}

}  // namespace mirage
