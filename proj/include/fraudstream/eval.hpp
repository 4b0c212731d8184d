#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fraudstream/core.hpp"
#include "fraudstream/models.hpp"
#include "fraudstream/stats.hpp"

namespace fraudstream {

inline ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred) {
    if (truth.size() != pred.size()) {
        throw DimensionError("confusion: label vectors differ in length");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1) {
            ++(pred[i] == 1 ? cm.tp : cm.fn);
        } else {
            ++(pred[i] == 0 ? cm.tn : cm.fp);
        }
    }
    return cm;
}

/// sensitivity = TP/(TP+FN), specificity = TN/(TN+FP),
/// auc = (sensitivity + specificity) / 2. A zero denominator yields rate 0
/// and sets the degenerate flag instead of failing.
inline EvalReport eval_report(const ConfusionMatrix& cm) {
    EvalReport r;
    r.confusion = cm;
    const std::uint64_t pos = cm.tp + cm.fn;
    const std::uint64_t neg = cm.tn + cm.fp;
    if (pos == 0) {
        r.degenerate = true;
    } else {
        r.sensitivity = static_cast<double>(cm.tp) / static_cast<double>(pos);
    }
    if (neg == 0) {
        r.degenerate = true;
    } else {
        r.specificity = static_cast<double>(cm.tn) / static_cast<double>(neg);
    }
    r.auc = (r.sensitivity + r.specificity) / 2.0;
    return r;
}

inline EvalReport evaluate_predictions(const std::vector<int>& truth, const std::vector<int>& pred) {
    return eval_report(confusion(truth, pred));
}

/// Stratified fold assignment: per class, indices are shuffled under the seed
/// and dealt round-robin, so per-fold class counts differ by at most one.
struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::vector<std::size_t>> folds;  // record indices per fold
};

inline FoldPlan stratified_kfold(const std::vector<LabeledRecord>& records, std::size_t k,
                                 RngSeed seed) {
    if (k < 2) throw ConfigError("stratified_kfold: k must be at least 2");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < records.size(); ++i) by_class[records[i].label == 1].push_back(i);
    for (int c = 0; c < 2; ++c) {
        if (by_class[c].size() < k) {
            throw StratificationError("stratified_kfold: class " + std::to_string(c) + " has " +
                                      std::to_string(by_class[c].size()) + " records, need >= " +
                                      std::to_string(k));
        }
    }
    Rng rng(seed);
    FoldPlan plan;
    plan.k = k;
    plan.folds.assign(k, {});
    for (int c = 0; c < 2; ++c) {
        rng.shuffle(by_class[c]);
        for (std::size_t p = 0; p < by_class[c].size(); ++p) {
            plan.folds[p % k].push_back(by_class[c][p]);
        }
    }
    return plan;
}

struct CvResult {
    std::vector<EvalReport> folds;
    double mean_auc = 0.0;
    double mean_sensitivity = 0.0;
    double mean_specificity = 0.0;
    HyperParams chosen;
};

/// Trains on (optionally balanced) training folds, evaluates on the untouched
/// held-out fold. The balancer and model see per-fold child seeds derived
/// from the master seed.
using FitFn = std::function<TrainedModel(const std::vector<LabeledRecord>&, RngSeed)>;
using BalancerFn = std::function<std::vector<LabeledRecord>(const std::vector<LabeledRecord>&, RngSeed)>;

inline BalancerFn no_balancer() {
    return [](const std::vector<LabeledRecord>& train, RngSeed) { return train; };
}

inline CvResult cross_validate(const std::vector<LabeledRecord>& records, const FitFn& fit,
                               const BalancerFn& balance, std::size_t k, RngSeed seed) {
    const FoldPlan plan = stratified_kfold(records, k, seed);
    CvResult result;
    result.folds.reserve(k);
    for (std::size_t fold = 0; fold < k; ++fold) {
        std::vector<char> held(records.size(), 0);
        for (auto i : plan.folds[fold]) held[i] = 1;
        std::vector<LabeledRecord> train;
        train.reserve(records.size() - plan.folds[fold].size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (!held[i]) train.push_back(records[i]);
        }
        TrainedModel model;
        try {
            const auto balanced = balance(train, derive_seed(seed, 0x100 + fold));
            model = fit(balanced, derive_seed(seed, 0x200 + fold));
        } catch (const SingleClassError& e) {
            throw SingleClassError(std::string(e.what()) + " (fold " + std::to_string(fold) + ")");
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + " (fold " + std::to_string(fold) + ")");
        } catch (const TrainingDivergedError& e) {
            throw TrainingDivergedError(std::string(e.what()) + " (fold " + std::to_string(fold) + ")",
                                        e.epoch);
        }
        std::vector<int> truth, pred;
        truth.reserve(plan.folds[fold].size());
        pred.reserve(plan.folds[fold].size());
        for (auto i : plan.folds[fold]) {
            truth.push_back(records[i].label);
            pred.push_back(model->predict(records[i].features));
        }
        result.folds.push_back(evaluate_predictions(truth, pred));
    }
    for (const auto& r : result.folds) {
        result.mean_auc += r.auc;
        result.mean_sensitivity += r.sensitivity;
        result.mean_specificity += r.specificity;
    }
    const double kd = static_cast<double>(result.folds.size());
    result.mean_auc /= kd;
    result.mean_sensitivity /= kd;
    result.mean_specificity /= kd;
    return result;
}

inline CvResult cross_validate(const std::vector<LabeledRecord>& records, const std::string& family,
                               const HyperParams& hp, const BalancerFn& balance, std::size_t k,
                               RngSeed seed) {
    auto fit = [&family, &hp](const std::vector<LabeledRecord>& train, RngSeed s) {
        return fit_model(family, train, hp, s);
    };
    CvResult r = cross_validate(records, fit, balance, k, seed);
    r.chosen = hp;
    return r;
}

namespace detail {

// equal-AUC tie-break: fewer estimators, smaller maxdepth, fewer iterations,
// larger regularization -- the simpler model wins
inline bool simpler_than(const HyperParams& a, const HyperParams& b) {
    if (a.num("estimators", 0) != b.num("estimators", 0)) {
        return a.num("estimators", 0) < b.num("estimators", 0);
    }
    if (a.num("maxdepth", 0) != b.num("maxdepth", 0)) {
        return a.num("maxdepth", 0) < b.num("maxdepth", 0);
    }
    if (a.num("maximum iterations", 0) != b.num("maximum iterations", 0)) {
        return a.num("maximum iterations", 0) < b.num("maximum iterations", 0);
    }
    return a.num("regularization parameter", 0) > b.num("regularization parameter", 0);
}

}  // namespace detail

/// Evaluates every grid point with the same folds and returns the best by
/// mean AUC (ties go to the simpler model).
inline CvResult grid_search(const std::vector<LabeledRecord>& records, const std::string& family,
                            const std::vector<HyperParams>& grid, const BalancerFn& balance,
                            std::size_t k, RngSeed seed) {
    if (grid.empty()) throw ConfigError("grid_search: empty grid");
    bool have_best = false;
    CvResult best;
    for (const auto& hp : grid) {
        CvResult r = cross_validate(records, family, hp, balance, k, seed);
        if (!have_best || r.mean_auc > best.mean_auc ||
            (r.mean_auc == best.mean_auc && detail::simpler_than(r.chosen, best.chosen))) {
            best = std::move(r);
            have_best = true;
        }
    }
    return best;
}

}  // namespace fraudstream
