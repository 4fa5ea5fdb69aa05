#include "mirage/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace mirage {

SpatialIndex::SpatialIndex(const PointCloud& cloud) {
    positions_.reserve(cloud.size());
    for (const auto& p : cloud.points) positions_.push_back(p.position);
    order_.resize(positions_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!positions_.empty()) root_ = build(0, static_cast<std::uint32_t>(order_.size()));
}

SpatialIndex::SpatialIndex(const std::vector<Vec3>& positions) : positions_(positions) {
    order_.resize(positions_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!positions_.empty()) root_ = build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin > kLeafSize) {
        // Split along the axis of largest extent at the median.
        Vec3 lo = positions_[order_[begin]];
        Vec3 hi = lo;
        for (std::uint32_t i = begin + 1; i < end; ++i) {
            lo = lo.cwiseMin(positions_[order_[i]]);
            hi = hi.cwiseMax(positions_[order_[i]]);
        }
        int axis = 0;
        (hi - lo).maxCoeff(&axis);
        const std::uint32_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             return positions_[a][axis] < positions_[b][axis];
                         });
        node.axis = static_cast<std::uint8_t>(axis);
        node.split = positions_[order_[mid]][axis];
        const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(node);
        const std::int32_t left = build(begin, mid);
        const std::int32_t right = build(mid, end);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }
    const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    return id;
}

std::vector<std::uint32_t> SpatialIndex::radius_query(const Vec3& p, double r) const {
    std::vector<std::uint32_t> out;
    if (root_ < 0) return out;
    const double r2 = r * r;
    std::vector<std::int32_t> stack{root_};
    while (!stack.empty()) {
        const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
        stack.pop_back();
        if (node.left < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const std::uint32_t id = order_[i];
                const double d2 = (positions_[id] - p).squaredNorm();
                if (d2 <= r2 && d2 > 0.0) out.push_back(id);
            }
            continue;
        }
        const double dx = p[node.axis] - node.split;
        if (dx <= r) stack.push_back(node.left);
        if (-dx <= r) stack.push_back(node.right);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint32_t> SpatialIndex::knn_query(const Vec3& p, std::size_t k) const {
    std::vector<std::uint32_t> out;
    if (root_ < 0 || k == 0) return out;
    k = std::min(k, positions_.size());

    using Entry = std::pair<double, std::uint32_t>;  // (squared distance, id)
    std::priority_queue<Entry> heap;                 // max-heap on distance, then id

    struct Visit {
        std::int32_t node;
        double dist2;  // lower bound to this subtree
    };
    std::vector<Visit> stack{{root_, 0.0}};
    while (!stack.empty()) {
        const Visit v = stack.back();
        stack.pop_back();
        if (heap.size() == k && v.dist2 > heap.top().first) continue;
        const Node& node = nodes_[static_cast<std::size_t>(v.node)];
        if (node.left < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const std::uint32_t id = order_[i];
                const double d2 = (positions_[id] - p).squaredNorm();
                const Entry e{d2, id};
                if (heap.size() < k) {
                    heap.push(e);
                } else if (e < heap.top()) {
                    heap.pop();
                    heap.push(e);
                }
            }
            continue;
        }
        const double dx = p[node.axis] - node.split;
        const double off2 = dx * dx;
        // Visit the near side last so it is processed first.
        if (dx <= 0.0) {
            stack.push_back({node.right, off2});
            stack.push_back({node.left, 0.0});
        } else {
            stack.push_back({node.left, off2});
            stack.push_back({node.right, 0.0});
        }
    }
    out.resize(heap.size());
    for (std::size_t i = heap.size(); i-- > 0;) {
        out[i] = heap.top().second;
        heap.pop();
    }
    return out;
}

}  // namespace mirage
