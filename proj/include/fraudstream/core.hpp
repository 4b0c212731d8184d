#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fraudstream/errors.hpp"
#include "fraudstream/rng.hpp"

namespace fraudstream {

/// Normalized, unitless feature values; dimension is the vector length.
using FeatureVector = std::vector<double>;

/// One transaction. label: 1 = fraud (positive), 0 = legitimate (negative).
struct LabeledRecord {
    FeatureVector features;
    int label = 0;

    bool operator==(const LabeledRecord&) const = default;
};

/// Ordered set of records collected in one stream interval.
struct RecordBatch {
    std::vector<LabeledRecord> records;
    std::int64_t batch_index = 0;
    std::int64_t arrival_time_ms = 0;
};

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;

    std::uint64_t total() const { return tp + fn + tn + fp; }

    bool operator==(const ConfusionMatrix&) const = default;
};

/// Sensitivity/specificity/AUC triple. auc is always (sensitivity+specificity)/2;
/// `degenerate` flags a zero denominator (one class absent from the evaluated set),
/// in which case the affected rate is reported as 0.
struct EvalReport {
    double sensitivity = 0.0;
    double specificity = 0.0;
    double auc = 0.0;
    ConfusionMatrix confusion;
    bool degenerate = false;
};

inline double euclidean_distance(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size()) {
        throw DimensionError("euclidean_distance: dimension mismatch (" +
                             std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

inline double squared_distance(const FeatureVector& a, const FeatureVector& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

inline std::size_t count_positives(const std::vector<LabeledRecord>& records) {
    std::size_t n = 0;
    for (const auto& r : records) n += (r.label == 1);
    return n;
}

inline bool has_both_classes(const std::vector<LabeledRecord>& records) {
    bool pos = false, neg = false;
    for (const auto& r : records) {
        (r.label == 1 ? pos : neg) = true;
        if (pos && neg) return true;
    }
    return false;
}

}  // namespace fraudstream
