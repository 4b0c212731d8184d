#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "fraudstream/core.hpp"

namespace fraudstream {

/// Exact k-nearest-neighbour index over a fixed point set.
///
/// Neighbours are ordered ascending by euclidean distance with ties broken by
/// lower point index, and a member point is never its own neighbour. Small or
/// high-dimensional sets fall back to a linear scan; everything else goes
/// through a KD-tree whose pruning bound is a true lower bound, so results are
/// identical to the brute-force scan.
class NeighborIndex {
public:
    explicit NeighborIndex(const std::vector<FeatureVector>& points) {
        n_ = points.size();
        dim_ = n_ ? points[0].size() : 0;
        flat_.resize(n_ * dim_);
        for (std::size_t i = 0; i < n_; ++i) {
            if (points[i].size() != dim_) {
                throw DimensionError("NeighborIndex: inconsistent point dimensions");
            }
            std::copy(points[i].begin(), points[i].end(), flat_.begin() + i * dim_);
        }
        use_tree_ = n_ > 64 && dim_ <= 24 && dim_ > 0;
        if (use_tree_) build_tree();
    }

    std::size_t size() const { return n_; }
    std::size_t dim() const { return dim_; }

    const double* point(std::size_t i) const { return flat_.data() + i * dim_; }

    /// k nearest members to an arbitrary query point.
    std::vector<std::size_t> query(const FeatureVector& q, std::size_t k) const {
        if (q.size() != dim_) throw DimensionError("NeighborIndex::query: dimension mismatch");
        return search(q.data(), k, npos);
    }

    /// k nearest members to member `i`, excluding `i` itself.
    std::vector<std::size_t> query_member(std::size_t i, std::size_t k) const {
        return search(point(i), k, i);
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    struct Node {
        double split_val = 0.0;
        std::int32_t split_dim = -1;   // -1 for leaf
        std::uint32_t left = 0, right = 0;
        std::uint32_t begin = 0, end = 0;
    };

    // worst candidate = lexicographically largest (distance^2, index)
    using Cand = std::pair<double, std::size_t>;
    using Heap = std::priority_queue<Cand>;

    double dist2(const double* a, const double* b) const {
        double s = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            const double diff = a[d] - b[d];
            s += diff * diff;
        }
        return s;
    }

    void consider(Heap& heap, std::size_t k, double d2, std::size_t idx) const {
        Cand c{d2, idx};
        if (heap.size() < k) {
            heap.push(c);
        } else if (c < heap.top()) {
            heap.pop();
            heap.push(c);
        }
    }

    std::vector<std::size_t> search(const double* q, std::size_t k, std::size_t exclude) const {
        k = std::min(k, n_ - (exclude != npos ? 1 : 0));
        Heap heap;
        if (use_tree_) {
            std::vector<double> side_dist(dim_, 0.0);
            search_node(0, q, k, exclude, heap, 0.0, side_dist);
        } else {
            for (std::size_t i = 0; i < n_; ++i) {
                if (i == exclude) continue;
                consider(heap, k, dist2(q, point(i)), i);
            }
        }
        std::vector<std::size_t> out(heap.size());
        for (std::size_t i = heap.size(); i-- > 0;) {
            out[i] = heap.top().second;
            heap.pop();
        }
        return out;
    }

    void build_tree() {
        order_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) order_[i] = static_cast<std::uint32_t>(i);
        nodes_.reserve(2 * n_ / kLeafSize + 2);
        build_node(0, static_cast<std::uint32_t>(n_));
    }

    std::uint32_t build_node(std::uint32_t begin, std::uint32_t end) {
        const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
        if (end - begin <= kLeafSize) {
            nodes_[id].begin = begin;
            nodes_[id].end = end;
            return id;
        }
        // split the dimension with the widest spread at the median
        int best_dim = 0;
        double best_spread = -1.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (std::uint32_t i = begin; i < end; ++i) {
                const double v = flat_[order_[i] * dim_ + d];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                best_dim = static_cast<int>(d);
            }
        }
        if (best_spread <= 0.0) {  // all points identical: keep as leaf
            nodes_[id].begin = begin;
            nodes_[id].end = end;
            return id;
        }
        const std::uint32_t mid = begin + (end - begin) / 2;
        auto key = [&](std::uint32_t idx) {
            return std::make_pair(flat_[idx * dim_ + best_dim], idx);
        };
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) { return key(a) < key(b); });
        nodes_[id].split_dim = best_dim;
        nodes_[id].split_val = flat_[order_[mid] * dim_ + best_dim];
        const std::uint32_t l = build_node(begin, mid);
        const std::uint32_t r = build_node(mid, end);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    // Classic kd-search with per-dimension side distances. The bound check
    // carries a relative slack so floating-point noise in the incremental
    // bound can only make us visit more nodes, never skip an exact tie.
    void search_node(std::uint32_t id, const double* q, std::size_t k, std::size_t exclude,
                     Heap& heap, double mindist2, std::vector<double>& side_dist) const {
        if (heap.size() == k && mindist2 > heap.top().first * (1.0 + 1e-12)) return;
        const Node& node = nodes_[id];
        if (node.split_dim < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const std::size_t idx = order_[i];
                if (idx == exclude) continue;
                consider(heap, k, dist2(q, point(idx)), idx);
            }
            return;
        }
        const int d = node.split_dim;
        const double delta = q[d] - node.split_val;
        const std::uint32_t near = delta < 0 ? node.left : node.right;
        const std::uint32_t far = delta < 0 ? node.right : node.left;
        search_node(near, q, k, exclude, heap, mindist2, side_dist);
        const double old = side_dist[d];
        const double fresh = delta * delta;
        if (fresh > old) {
            side_dist[d] = fresh;
            search_node(far, q, k, exclude, heap, mindist2 - old + fresh, side_dist);
            side_dist[d] = old;
        } else {
            search_node(far, q, k, exclude, heap, mindist2, side_dist);
        }
    }

    static constexpr std::uint32_t kLeafSize = 16;

    std::size_t n_ = 0;
    std::size_t dim_ = 0;
    bool use_tree_ = false;
    std::vector<double> flat_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

}  // namespace fraudstream
