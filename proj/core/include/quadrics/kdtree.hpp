#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "quadrics/types.hpp"

namespace quadrics {

/// Static median-split kd-tree over 3D points; supports k-nearest and radius queries.
class KdTree {
public:
    explicit KdTree(const std::vector<Vec3>& points) : pts_(points) {
        index_.resize(pts_.size());
        std::iota(index_.begin(), index_.end(), 0);
        nodes_.reserve(pts_.size() / kLeafSize * 2 + 4);
        if (!pts_.empty()) root_ = build(0, static_cast<int>(pts_.size()));
    }

    /// Indices of the k nearest points (including an exact-match point itself), nearest first.
    void knn(const Vec3& query, int k, std::vector<int>& out) const {
        out.clear();
        if (pts_.empty() || k <= 0) return;
        heap_.clear();
        search_knn(root_, query, k);
        std::sort(heap_.begin(), heap_.end());
        out.reserve(heap_.size());
        for (const auto& [d2, idx] : heap_) out.push_back(idx);
    }

    void radius(const Vec3& query, double r, std::vector<int>& out) const {
        out.clear();
        if (pts_.empty()) return;
        search_radius(root_, query, r * r, out);
    }

private:
    static constexpr int kLeafSize = 16;

    struct Node {
        double split = 0;
        int axis = -1;  // -1 marks a leaf
        int left = -1, right = -1;
        int begin = 0, end = 0;
    };

    int build(int begin, int end) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({});
        if (end - begin <= kLeafSize) {
            nodes_[id].begin = begin;
            nodes_[id].end = end;
            return id;
        }
        Vec3 lo = pts_[index_[begin]], hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            lo = lo.cwiseMin(pts_[index_[i]]);
            hi = hi.cwiseMax(pts_[index_[i]]);
        }
        int axis = 0;
        (hi - lo).maxCoeff(&axis);
        const int mid = (begin + end) / 2;
        std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                         [&](int a, int b) { return pts_[a](axis) < pts_[b](axis); });
        nodes_[id].axis = axis;
        nodes_[id].split = pts_[index_[mid]](axis);
        const int l = build(begin, mid);
        const int r = build(mid, end);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    void consider(const Vec3& query, int idx, int k) const {
        const double d2 = (pts_[idx] - query).squaredNorm();
        if (static_cast<int>(heap_.size()) < k) {
            heap_.emplace_back(d2, idx);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (d2 < heap_.front().first) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = {d2, idx};
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    void search_knn(int node, const Vec3& query, int k) const {
        const Node& n = nodes_[node];
        if (n.axis < 0) {
            for (int i = n.begin; i < n.end; ++i) consider(query, index_[i], k);
            return;
        }
        const double diff = query(n.axis) - n.split;
        const int near = diff < 0 ? n.left : n.right;
        const int far = diff < 0 ? n.right : n.left;
        search_knn(near, query, k);
        if (static_cast<int>(heap_.size()) < k || diff * diff < heap_.front().first)
            search_knn(far, query, k);
    }

    void search_radius(int node, const Vec3& query, double r2, std::vector<int>& out) const {
        const Node& n = nodes_[node];
        if (n.axis < 0) {
            for (int i = n.begin; i < n.end; ++i)
                if ((pts_[index_[i]] - query).squaredNorm() <= r2) out.push_back(index_[i]);
            return;
        }
        const double diff = query(n.axis) - n.split;
        const int near = diff < 0 ? n.left : n.right;
        const int far = diff < 0 ? n.right : n.left;
        search_radius(near, query, r2, out);
        if (diff * diff <= r2) search_radius(far, query, r2, out);
    }

    std::vector<Vec3> pts_;
    std::vector<int> index_;
    std::vector<Node> nodes_;
    int root_ = -1;
    mutable std::vector<std::pair<double, int>> heap_;
};

}  // namespace quadrics
