#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fraudstream/core.hpp"

namespace fraudstream {

enum class SplitCriterion { Gini, Entropy, Variance };

struct TreeNode {
    std::int32_t feature = -1;  // -1: leaf
    double threshold = 0.0;
    double value = 0.0;  // leaf payload: positive fraction or mean target
    std::uint32_t left = 0;
    std::uint32_t right = 0;
};

/// Axis-aligned binary tree. Records with feature value <= threshold go left.
struct DecisionTree {
    std::vector<TreeNode> nodes;

    double predict(const FeatureVector& x) const {
        std::uint32_t cur = 0;
        while (nodes[cur].feature >= 0) {
            cur = x[static_cast<std::size_t>(nodes[cur].feature)] <= nodes[cur].threshold
                      ? nodes[cur].left
                      : nodes[cur].right;
        }
        return nodes[cur].value;
    }
};

struct TreeOptions {
    SplitCriterion criterion = SplitCriterion::Gini;
    std::size_t max_depth = 5;
    std::size_t features_per_split = 0;  // 0 = consider every feature
};

/// Feature-major copy of a record list, shared by the tree-based models.
struct ColumnMatrix {
    std::vector<std::vector<double>> columns;
    std::vector<double> labels;  // 0/1 as doubles
    std::size_t n = 0;
    std::size_t dim = 0;

    explicit ColumnMatrix(const std::vector<LabeledRecord>& records) {
        n = records.size();
        dim = n ? records[0].features.size() : 0;
        columns.assign(dim, std::vector<double>(n));
        labels.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (records[i].features.size() != dim) {
                throw DimensionError("ColumnMatrix: inconsistent feature dims");
            }
            for (std::size_t f = 0; f < dim; ++f) columns[f][i] = records[i].features[f];
            labels[i] = records[i].label;
        }
    }
};

/// Per-feature record orderings by (value, index); computed once per fit and
/// reused by every tree grown on the same matrix.
inline std::vector<std::vector<std::uint32_t>> sort_columns(const ColumnMatrix& m) {
    std::vector<std::vector<std::uint32_t>> sorted(m.dim);
    for (std::size_t f = 0; f < m.dim; ++f) {
        auto& order = sorted[f];
        order.resize(m.n);
        std::iota(order.begin(), order.end(), 0);
        const auto& col = m.columns[f];
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (col[a] != col[b]) return col[a] < col[b];
            return a < b;
        });
    }
    return sorted;
}

/// Expands global sorted orderings into orderings of a bootstrap multiset
/// given per-record multiplicities. Equivalent to sorting the multiset by
/// (value, index) directly.
inline std::vector<std::vector<std::uint32_t>> expand_multiset(
    const std::vector<std::vector<std::uint32_t>>& global_sorted,
    const std::vector<std::uint32_t>& counts, std::size_t total) {
    std::vector<std::vector<std::uint32_t>> out(global_sorted.size());
    for (std::size_t f = 0; f < global_sorted.size(); ++f) {
        out[f].reserve(total);
        for (const std::uint32_t id : global_sorted[f]) {
            for (std::uint32_t c = 0; c < counts[id]; ++c) out[f].push_back(id);
        }
    }
    return out;
}

namespace detail {

inline double gini_impurity(double pos, double n) {
    const double p = pos / n;
    const double q = 1.0 - p;
    return 1.0 - p * p - q * q;
}

inline double entropy_impurity(double pos, double n) {
    const double p = pos / n;
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

/// Grows one CART tree from pre-sorted per-feature index lists: each split is
/// one sweep per candidate feature plus a stable partition of every list, so
/// a full tree costs O(n * d * depth).
class TreeBuilder {
public:
    TreeBuilder(const std::vector<std::vector<double>>& columns, const std::vector<double>& target,
                const TreeOptions& options, Rng* rng)
        : cols_(columns), target_(target), opts_(options), rng_(rng) {}

    /// `sorted` holds, per feature, this tree's record multiset ordered by
    /// (value, index); consumed destructively.
    DecisionTree build(std::vector<std::vector<std::uint32_t>> sorted) {
        sorted_ = std::move(sorted);
        const std::size_t n = sorted_.empty() ? 0 : sorted_[0].size();
        scratch_.resize(n);
        tree_.nodes.clear();
        grow(0, n, 0);
        return std::move(tree_);
    }

private:
    struct Best {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double score = 0.0;  // weighted child impurity; lower is better
        std::size_t left_count = 0;
    };

    std::uint32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
        const std::uint32_t id = static_cast<std::uint32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        const std::size_t n = end - begin;
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double t = target_[sorted_[0][i]];
            sum += t;
            sumsq += t * t;
        }
        const double nd = static_cast<double>(n);
        tree_.nodes[id].value = sum / nd;

        if (depth >= opts_.max_depth || n < 2 || node_impurity(sum, sumsq, nd) <= 1e-12) {
            return id;
        }
        const Best best = best_split(begin, end, sum, sumsq);
        if (!best.found) return id;  // every candidate feature constant

        partition(begin, end, best);
        const std::uint32_t l = grow(begin, begin + best.left_count, depth + 1);
        const std::uint32_t r = grow(begin + best.left_count, end, depth + 1);
        tree_.nodes[id].feature = static_cast<std::int32_t>(best.feature);
        tree_.nodes[id].threshold = best.threshold;
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = r;
        return id;
    }

    double node_impurity(double sum, double sumsq, double n) const {
        switch (opts_.criterion) {
            case SplitCriterion::Gini:
                return gini_impurity(sum, n);
            case SplitCriterion::Entropy:
                return entropy_impurity(sum, n);
            case SplitCriterion::Variance:
                return (sumsq - sum * sum / n) / n;
        }
        return 0.0;
    }

    // candidate features in ascending index order so equal-gain ties resolve
    // to the lower feature, then the lower threshold
    std::vector<std::size_t> candidate_features() {
        const std::size_t d = cols_.size();
        if (opts_.features_per_split == 0 || opts_.features_per_split >= d || rng_ == nullptr) {
            std::vector<std::size_t> all(d);
            std::iota(all.begin(), all.end(), 0);
            return all;
        }
        std::vector<std::size_t> pool(d);
        std::iota(pool.begin(), pool.end(), 0);
        std::vector<std::size_t> picked;
        picked.reserve(opts_.features_per_split);
        for (std::size_t i = 0; i < opts_.features_per_split; ++i) {
            const std::size_t j = i + rng_->index(d - i);
            std::swap(pool[i], pool[j]);
            picked.push_back(pool[i]);
        }
        std::sort(picked.begin(), picked.end());
        return picked;
    }

    Best best_split(std::size_t begin, std::size_t end, double total_sum, double total_sumsq) {
        Best best;
        const double nd = static_cast<double>(end - begin);
        for (const std::size_t f : candidate_features()) {
            const auto& order = sorted_[f];
            const auto& col = cols_[f];
            double lsum = 0.0, lsumsq = 0.0;
            for (std::size_t i = begin; i + 1 < end; ++i) {
                const double t = target_[order[i]];
                lsum += t;
                lsumsq += t * t;
                const double v = col[order[i]];
                const double v_next = col[order[i + 1]];
                if (v == v_next) continue;
                const double nld = static_cast<double>(i - begin + 1);
                const double nrd = nd - nld;
                const double score =
                    (nld * node_impurity(lsum, lsumsq, nld) +
                     nrd * node_impurity(total_sum - lsum, total_sumsq - lsumsq, nrd)) /
                    nd;
                if (!best.found || score < best.score) {
                    double mid = (v + v_next) / 2.0;
                    if (!(mid < v_next) || mid < v) mid = v;  // keep the swept prefix on the left
                    best.found = true;
                    best.feature = f;
                    best.threshold = mid;
                    best.score = score;
                    best.left_count = i - begin + 1;
                }
            }
        }
        return best;
    }

    void partition(std::size_t begin, std::size_t end, const Best& best) {
        const auto& col = cols_[best.feature];
        for (auto& order : sorted_) {
            std::size_t l = 0, r = best.left_count;
            for (std::size_t i = begin; i < end; ++i) {
                const std::uint32_t rec = order[i];
                if (col[rec] <= best.threshold) {
                    scratch_[l++] = rec;
                } else {
                    scratch_[r++] = rec;
                }
            }
            std::copy(scratch_.begin(), scratch_.begin() + (end - begin), order.begin() + begin);
        }
    }

    const std::vector<std::vector<double>>& cols_;
    const std::vector<double>& target_;
    TreeOptions opts_;
    Rng* rng_;
    DecisionTree tree_;
    std::vector<std::vector<std::uint32_t>> sorted_;
    std::vector<std::uint32_t> scratch_;
};

}  // namespace detail

inline DecisionTree build_tree(const ColumnMatrix& m, const std::vector<double>& target,
                               const TreeOptions& options, Rng* rng,
                               std::vector<std::vector<std::uint32_t>> sorted) {
    detail::TreeBuilder builder(m.columns, target, options, rng);
    return builder.build(std::move(sorted));
}

}  // namespace fraudstream
