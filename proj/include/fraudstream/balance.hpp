#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <utility>
#include <vector>

#include "fraudstream/core.hpp"
#include "fraudstream/neighbors.hpp"
#include "fraudstream/parallel.hpp"

namespace fraudstream {

struct BalanceConfig {
    std::size_t k_neighbors = 5;
    double target_ratio = 1.0;  // desired minority/majority ratio after oversampling
    RngSeed seed;
};

namespace detail {

struct ClassSplit {
    int minority_label = 1;
    std::vector<std::size_t> minority;  // indices into the input, original order
    std::vector<std::size_t> majority;
};

inline ClassSplit split_by_class(const std::vector<LabeledRecord>& records) {
    if (!has_both_classes(records)) {
        throw SingleClassError("resampling requires both classes present");
    }
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < records.size(); ++i) {
        (records[i].label == 1 ? pos : neg).push_back(i);
    }
    ClassSplit split;
    if (pos.size() <= neg.size()) {
        split.minority_label = 1;
        split.minority = std::move(pos);
        split.majority = std::move(neg);
    } else {
        split.minority_label = 0;
        split.minority = std::move(neg);
        split.majority = std::move(pos);
    }
    return split;
}

inline std::vector<FeatureVector> gather(const std::vector<LabeledRecord>& records,
                                         const std::vector<std::size_t>& idx) {
    std::vector<FeatureVector> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(records[i].features);
    return out;
}

inline FeatureVector interpolate(const FeatureVector& x, const FeatureVector& nn, double u) {
    FeatureVector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + u * (nn[j] - x[j]);
    return out;
}

// k minority-class nearest neighbours for every minority point
inline std::vector<std::vector<std::size_t>> minority_neighbours(
    const std::vector<FeatureVector>& minority_points, std::size_t k) {
    NeighborIndex index(minority_points);
    std::vector<std::vector<std::size_t>> nn(minority_points.size());
    parallel_for(minority_points.size(),
                 [&](std::size_t i) { nn[i] = index.query_member(i, k); });
    return nn;
}

}  // namespace detail

/// SMOTE. New minority samples are interpolated between a random minority
/// point and one of its k minority-class nearest neighbours until the
/// minority count reaches round(target_ratio * majority count).
///
/// Draw order per synthetic sample (relevant for deterministic replay):
/// sample index, neighbour choice, interpolation coefficient.
inline std::vector<LabeledRecord> smote(const std::vector<LabeledRecord>& train,
                                        const BalanceConfig& cfg) {
    auto split = detail::split_by_class(train);
    if (split.minority.size() <= cfg.k_neighbors) {
        throw ConfigError("smote: k_neighbors must be smaller than the minority class size");
    }

    const std::size_t target = static_cast<std::size_t>(
        std::llround(cfg.target_ratio * static_cast<double>(split.majority.size())));
    std::vector<LabeledRecord> out = train;
    if (split.minority.size() >= target) return out;

    const auto points = detail::gather(train, split.minority);
    const auto nn = detail::minority_neighbours(points, cfg.k_neighbors);

    Rng rng(cfg.seed);
    std::size_t need = target - split.minority.size();
    out.reserve(train.size() + need);
    while (need-- > 0) {
        const std::size_t i = rng.index(points.size());
        const std::size_t j = nn[i][rng.index(nn[i].size())];
        const double u = rng.uniform();
        out.push_back(LabeledRecord{detail::interpolate(points[i], points[j], u),
                                    split.minority_label});
    }
    return out;
}

/// All Tomek links: unordered cross-class pairs (i, j), i < j, where each is
/// the other's single nearest neighbour over the whole dataset.
inline std::vector<std::pair<std::size_t, std::size_t>> tomek_links(
    const std::vector<LabeledRecord>& records) {
    if (!has_both_classes(records)) {
        throw SingleClassError("tomek_links requires both classes present");
    }
    std::vector<FeatureVector> points;
    points.reserve(records.size());
    for (const auto& r : records) points.push_back(r.features);
    NeighborIndex index(points);

    std::vector<std::size_t> nn(records.size());
    parallel_for(records.size(),
                 [&](std::size_t i) { nn[i] = index.query_member(i, 1).at(0); });

    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::size_t j = nn[i];
        if (i < j && nn[j] == i && records[i].label != records[j].label) {
            links.emplace_back(i, j);
        }
    }
    return links;
}

/// Edited-nearest-neighbours filter: one pass over the input, removing every
/// record whose label disagrees with the strict majority label of its k
/// nearest neighbours. No cascade; all removal decisions are made against the
/// original set.
inline std::vector<LabeledRecord> enn_filter(const std::vector<LabeledRecord>& records,
                                             std::size_t k = 3) {
    if (k >= records.size()) throw ConfigError("enn_filter: k must be smaller than the dataset");
    std::vector<FeatureVector> points;
    points.reserve(records.size());
    for (const auto& r : records) points.push_back(r.features);
    NeighborIndex index(points);

    std::vector<char> keep(records.size(), 1);
    parallel_for(records.size(), [&](std::size_t i) {
        const auto nn = index.query_member(i, k);
        std::size_t disagree = 0;
        for (auto j : nn) disagree += (records[j].label != records[i].label);
        if (disagree * 2 > nn.size()) keep[i] = 0;
    });

    std::vector<LabeledRecord> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (keep[i]) out.push_back(records[i]);
    }
    return out;
}

/// SMOTE followed by removal of both members of every Tomek link found on the
/// post-SMOTE dataset.
inline std::vector<LabeledRecord> smote_tomek(const std::vector<LabeledRecord>& train,
                                              const BalanceConfig& cfg) {
    auto combined = smote(train, cfg);
    const auto links = tomek_links(combined);
    std::vector<char> drop(combined.size(), 0);
    for (const auto& [i, j] : links) drop[i] = drop[j] = 1;
    std::vector<LabeledRecord> out;
    out.reserve(combined.size());
    for (std::size_t i = 0; i < combined.size(); ++i) {
        if (!drop[i]) out.push_back(std::move(combined[i]));
    }
    return out;
}

/// SMOTE followed by an ENN pass over the combined set (both classes
/// eligible for removal).
inline std::vector<LabeledRecord> smote_enn(const std::vector<LabeledRecord>& train,
                                            const BalanceConfig& cfg, std::size_t enn_k = 3) {
    return enn_filter(smote(train, cfg), enn_k);
}

/// Per-minority-point synthetic allocation used by ADASYN; exposed so the
/// allocation can be checked independently of the generation step.
struct AdasynAllocation {
    std::vector<double> r;        // majority share of each minority point's k-NN
    std::vector<double> w;        // normalized weights
    std::vector<std::size_t> g;   // synthetic count per minority point
    bool uniform_fallback = false;
};

inline AdasynAllocation adasyn_allocation(const std::vector<LabeledRecord>& train,
                                          const BalanceConfig& cfg) {
    auto split = detail::split_by_class(train);
    if (split.minority.size() <= cfg.k_neighbors) {
        throw ConfigError("adasyn: k_neighbors must be smaller than the minority class size");
    }
    const std::size_t target = static_cast<std::size_t>(
        std::llround(cfg.target_ratio * static_cast<double>(split.majority.size())));
    const std::size_t m = split.minority.size();
    const double total_new =
        target > m ? static_cast<double>(target - m) : 0.0;

    std::vector<FeatureVector> all_points;
    all_points.reserve(train.size());
    for (const auto& r : train) all_points.push_back(r.features);
    NeighborIndex all_index(all_points);

    AdasynAllocation alloc;
    alloc.r.resize(m);
    parallel_for(m, [&](std::size_t mi) {
        const auto nn = all_index.query_member(split.minority[mi], cfg.k_neighbors);
        std::size_t majority_hits = 0;
        for (auto j : nn) majority_hits += (train[j].label != split.minority_label);
        alloc.r[mi] = static_cast<double>(majority_hits) / static_cast<double>(nn.size());
    });

    double r_sum = 0.0;
    for (double r : alloc.r) r_sum += r;
    alloc.w.resize(m);
    if (r_sum == 0.0) {
        alloc.uniform_fallback = true;
        std::fprintf(stderr,
                     "adasyn: no minority point has majority neighbours; using uniform weights\n");
        for (auto& w : alloc.w) w = 1.0 / static_cast<double>(m);
    } else {
        for (std::size_t i = 0; i < m; ++i) alloc.w[i] = alloc.r[i] / r_sum;
    }
    alloc.g.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        alloc.g[i] = static_cast<std::size_t>(std::llround(alloc.w[i] * total_new));
    }
    return alloc;
}

/// ADASYN: density-adaptive SMOTE. Minority points surrounded by majority
/// neighbours receive proportionally more synthetic samples.
///
/// Draw order per synthetic sample: neighbour choice, interpolation
/// coefficient (minority points are processed in their original order).
inline std::vector<LabeledRecord> adasyn(const std::vector<LabeledRecord>& train,
                                         const BalanceConfig& cfg) {
    auto split = detail::split_by_class(train);
    const auto alloc = adasyn_allocation(train, cfg);

    std::vector<LabeledRecord> out = train;
    const auto points = detail::gather(train, split.minority);
    const auto nn = detail::minority_neighbours(points, cfg.k_neighbors);

    Rng rng(cfg.seed);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t s = 0; s < alloc.g[i]; ++s) {
            const std::size_t j = nn[i][rng.index(nn[i].size())];
            const double u = rng.uniform();
            out.push_back(LabeledRecord{detail::interpolate(points[i], points[j], u),
                                        split.minority_label});
        }
    }
    return out;
}

}  // namespace fraudstream
