#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fraudstream/core.hpp"
#include "fraudstream/neighbors.hpp"
#include "fraudstream/net.hpp"
#include "fraudstream/parallel.hpp"
#include "fraudstream/tree.hpp"

namespace fraudstream {

/// Family-specific hyperparameters; keys follow the tuning-grid spelling
/// ('maxdepth', 'estimators', 'regularization parameter', 'maximum
/// iterations', 'criterion', 'solver').
struct HyperParams {
    std::map<std::string, double> nums;
    std::map<std::string, std::string> strs;

    double num(const std::string& key, double fallback) const {
        auto it = nums.find(key);
        return it == nums.end() ? fallback : it->second;
    }
    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = strs.find(key);
        return it == strs.end() ? fallback : it->second;
    }
    HyperParams& set(const std::string& key, double v) {
        nums[key] = v;
        return *this;
    }
    HyperParams& set(const std::string& key, const std::string& v) {
        strs[key] = v;
        return *this;
    }
    bool operator==(const HyperParams&) const = default;
};

/// A fitted classifier. score() is in [0,1]; predict() applies the uniform
/// 0.5 threshold across every family.
class Model {
public:
    virtual ~Model() = default;
    virtual double score(const FeatureVector& x) const = 0;
    virtual std::string family() const = 0;
    virtual std::size_t input_dim() const = 0;

    int predict(const FeatureVector& x) const { return score(x) >= 0.5 ? 1 : 0; }
};

using TrainedModel = std::shared_ptr<const Model>;

namespace detail {

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

inline void require_both_classes(const std::vector<LabeledRecord>& train, const char* who) {
    if (train.empty()) throw EmptyDatasetError(std::string(who) + ": empty training set");
    if (!has_both_classes(train)) {
        throw SingleClassError(std::string(who) + ": training data contains a single class");
    }
}

}  // namespace detail

// ---------------------------------------------------------------- Naive Bayes

class NaiveBayesModel final : public Model {
public:
    std::vector<double> mean[2], var[2];
    double log_prior[2] = {0.0, 0.0};
    std::size_t dim = 0;

    double score(const FeatureVector& x) const override {
        double log_lik[2] = {log_prior[0], log_prior[1]};
        for (int c = 0; c < 2; ++c) {
            for (std::size_t j = 0; j < dim; ++j) {
                const double d = x[j] - mean[c][j];
                log_lik[c] -= 0.5 * (std::log(2.0 * 3.14159265358979323846 * var[c][j]) +
                                     d * d / var[c][j]);
            }
        }
        const double m = std::max(log_lik[0], log_lik[1]);
        const double e0 = std::exp(log_lik[0] - m), e1 = std::exp(log_lik[1] - m);
        return e1 / (e0 + e1);
    }
    std::string family() const override { return "nb"; }
    std::size_t input_dim() const override { return dim; }
};

/// Gaussian naive Bayes: per-class feature means/variances (variance floored
/// at 1e-9) plus class priors.
inline TrainedModel fit_naive_bayes(const std::vector<LabeledRecord>& train) {
    detail::require_both_classes(train, "fit_naive_bayes");
    auto model = std::make_shared<NaiveBayesModel>();
    model->dim = train[0].features.size();
    std::size_t count[2] = {0, 0};
    for (int c = 0; c < 2; ++c) {
        model->mean[c].assign(model->dim, 0.0);
        model->var[c].assign(model->dim, 0.0);
    }
    for (const auto& r : train) {
        ++count[r.label];
        for (std::size_t j = 0; j < model->dim; ++j) model->mean[r.label][j] += r.features[j];
    }
    for (int c = 0; c < 2; ++c) {
        for (auto& m : model->mean[c]) m /= static_cast<double>(count[c]);
    }
    for (const auto& r : train) {
        for (std::size_t j = 0; j < model->dim; ++j) {
            const double d = r.features[j] - model->mean[r.label][j];
            model->var[r.label][j] += d * d;
        }
    }
    for (int c = 0; c < 2; ++c) {
        for (auto& v : model->var[c]) v = std::max(v / static_cast<double>(count[c]), 1e-9);
        model->log_prior[c] =
            std::log(static_cast<double>(count[c]) / static_cast<double>(train.size()));
    }
    return model;
}

// --------------------------------------------------- linear models (LR, SVM)

class LinearModel final : public Model {
public:
    std::vector<double> w;
    double b = 0.0;
    std::string family_tag;
    std::vector<double> loss_trace;  // per-iteration objective, for diagnostics

    double margin(const FeatureVector& x) const {
        double z = b;
        for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
        return z;
    }
    double score(const FeatureVector& x) const override { return detail::sigmoid(margin(x)); }
    std::string family() const override { return family_tag; }
    std::size_t input_dim() const override { return w.size(); }
};

/// L2-regularized logistic regression trained with full-batch gradient
/// descent for 'maximum iterations' steps.
inline TrainedModel fit_logistic_regression(const std::vector<LabeledRecord>& train,
                                            const HyperParams& hp) {
    detail::require_both_classes(train, "fit_logistic_regression");
    const double lambda = hp.num("regularization parameter", 0.01);
    const std::size_t iters = static_cast<std::size_t>(hp.num("maximum iterations", 100));
    const double lr = hp.num("learning rate", 0.5);

    auto model = std::make_shared<LinearModel>();
    model->family_tag = "lr";
    const std::size_t dim = train[0].features.size();
    const double inv_n = 1.0 / static_cast<double>(train.size());
    model->w.assign(dim, 0.0);

    std::vector<double> grad(dim);
    for (std::size_t it = 0; it < iters; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0, loss = 0.0;
        for (const auto& r : train) {
            const double p = detail::sigmoid(model->margin(r.features));
            const double err = p - static_cast<double>(r.label);
            for (std::size_t j = 0; j < dim; ++j) grad[j] += err * r.features[j];
            grad_b += err;
            loss -= r.label ? std::log(std::max(p, 1e-300)) : std::log(std::max(1.0 - p, 1e-300));
        }
        double reg = 0.0;
        for (std::size_t j = 0; j < dim; ++j) reg += model->w[j] * model->w[j];
        loss = loss * inv_n + 0.5 * lambda * reg;
        if (!std::isfinite(loss)) throw TrainingDivergedError("logistic regression diverged", it);
        model->loss_trace.push_back(loss);
        for (std::size_t j = 0; j < dim; ++j) {
            model->w[j] -= lr * (grad[j] * inv_n + lambda * model->w[j]);
        }
        model->b -= lr * grad_b * inv_n;
    }
    return model;
}

/// Linear SVM via sub-gradient descent on hinge loss + L2; scores pass
/// through a sigmoid of the margin so the uniform threshold applies.
inline TrainedModel fit_linear_svm(const std::vector<LabeledRecord>& train, const HyperParams& hp) {
    detail::require_both_classes(train, "fit_linear_svm");
    const double lambda = hp.num("regularization parameter", 0.01);
    const std::size_t iters = static_cast<std::size_t>(hp.num("maximum iterations", 100));
    const double lr = hp.num("learning rate", 0.5);

    auto model = std::make_shared<LinearModel>();
    model->family_tag = "svm";
    const std::size_t dim = train[0].features.size();
    const double inv_n = 1.0 / static_cast<double>(train.size());
    model->w.assign(dim, 0.0);

    std::vector<double> grad(dim);
    for (std::size_t it = 0; it < iters; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0, loss = 0.0;
        for (const auto& r : train) {
            const double y = r.label ? 1.0 : -1.0;
            const double m = y * model->margin(r.features);
            if (m < 1.0) {
                loss += 1.0 - m;
                for (std::size_t j = 0; j < dim; ++j) grad[j] -= y * r.features[j];
                grad_b -= y;
            }
        }
        double reg = 0.0;
        for (std::size_t j = 0; j < dim; ++j) reg += model->w[j] * model->w[j];
        loss = loss * inv_n + 0.5 * lambda * reg;
        if (!std::isfinite(loss)) throw TrainingDivergedError("linear svm diverged", it);
        model->loss_trace.push_back(loss);
        for (std::size_t j = 0; j < dim; ++j) {
            model->w[j] -= lr * (grad[j] * inv_n + lambda * model->w[j]);
        }
        model->b -= lr * grad_b * inv_n;
    }
    return model;
}

// ------------------------------------------------------- tree-based families

class DecisionTreeModel final : public Model {
public:
    DecisionTree tree;
    std::size_t dim = 0;

    double score(const FeatureVector& x) const override { return tree.predict(x); }
    std::string family() const override { return "dt"; }
    std::size_t input_dim() const override { return dim; }
};

inline SplitCriterion criterion_from(const HyperParams& hp) {
    const std::string name = hp.str("criterion", "gini");
    if (name == "gini") return SplitCriterion::Gini;
    if (name == "entropy") return SplitCriterion::Entropy;
    throw ConfigError("unknown criterion: " + name);
}

/// Binary CART; leaf score is the positive fraction at the leaf. Equal-gain
/// ties resolve to the lower feature index, then the lower threshold.
inline TrainedModel fit_decision_tree(const std::vector<LabeledRecord>& train,
                                      const HyperParams& hp) {
    detail::require_both_classes(train, "fit_decision_tree");
    auto model = std::make_shared<DecisionTreeModel>();
    model->dim = train[0].features.size();
    ColumnMatrix m(train);
    TreeOptions opts;
    opts.criterion = criterion_from(hp);
    opts.max_depth = static_cast<std::size_t>(hp.num("maxdepth", 5));
    model->tree = build_tree(m, m.labels, opts, nullptr, sort_columns(m));
    return model;
}

class RandomForestModel final : public Model {
public:
    std::vector<DecisionTree> trees;
    std::size_t dim = 0;

    double score(const FeatureVector& x) const override {
        double sum = 0.0;
        for (const auto& t : trees) sum += t.predict(x);
        return sum / static_cast<double>(trees.size());
    }
    std::string family() const override { return "rf"; }
    std::size_t input_dim() const override { return dim; }
};

/// Random forest: 'estimators' trees, each on a bootstrap sample with a
/// per-split feature subsample of ceil(sqrt(d)). Tree i draws from seed
/// (master ^ i): first n bootstrap indices, then per-split feature subsets in
/// preorder. The 'bootstrap', 'feature subsample' and 'duplicate seeds'
/// switches exist for tests.
inline TrainedModel fit_random_forest(const std::vector<LabeledRecord>& train,
                                      const HyperParams& hp, RngSeed seed) {
    detail::require_both_classes(train, "fit_random_forest");
    auto model = std::make_shared<RandomForestModel>();
    model->dim = train[0].features.size();
    const std::size_t estimators = static_cast<std::size_t>(hp.num("estimators", 10));
    const bool bootstrap = hp.num("bootstrap", 1.0) != 0.0;
    const bool subsample = hp.num("feature subsample", 1.0) != 0.0;
    const bool duplicate_seeds = hp.num("duplicate seeds", 0.0) != 0.0;
    if (estimators == 0) throw ConfigError("fit_random_forest: estimators must be positive");

    ColumnMatrix m(train);
    const auto sorted0 = sort_columns(m);
    TreeOptions opts;
    opts.criterion = criterion_from(hp);
    opts.max_depth = static_cast<std::size_t>(hp.num("maxdepth", 5));
    opts.features_per_split =
        subsample ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m.dim)))) : 0;

    model->trees.resize(estimators);
    parallel_for(
        estimators,
        [&](std::size_t t) {
            Rng rng(RngSeed{duplicate_seeds ? seed.value : seed.value ^ t});
            std::vector<std::vector<std::uint32_t>> sorted;
            if (bootstrap) {
                std::vector<std::uint32_t> counts(m.n, 0);
                for (std::size_t i = 0; i < m.n; ++i) ++counts[rng.index(m.n)];
                sorted = expand_multiset(sorted0, counts, m.n);
            } else {
                sorted = sorted0;
            }
            model->trees[t] = build_tree(m, m.labels, opts, &rng, std::move(sorted));
        },
        0, 2);
    return model;
}

class GradientBoostedModel final : public Model {
public:
    std::vector<DecisionTree> trees;
    double f0 = 0.0;
    double step = 0.1;
    std::size_t dim = 0;
    std::vector<double> loss_trace;  // training log-loss after each stage

    double raw(const FeatureVector& x) const {
        double f = f0;
        for (const auto& t : trees) f += step * t.predict(x);
        return f;
    }
    double score(const FeatureVector& x) const override { return detail::sigmoid(raw(x)); }
    std::string family() const override { return "gbt"; }
    std::size_t input_dim() const override { return dim; }
};

/// Gradient boosting on logistic loss: F0 is the log-odds of the base rate,
/// each stage fits a variance-split regression tree to the residuals
/// y - sigmoid(F), applied with step size 0.1.
inline TrainedModel fit_gbt(const std::vector<LabeledRecord>& train, const HyperParams& hp) {
    detail::require_both_classes(train, "fit_gbt");
    auto model = std::make_shared<GradientBoostedModel>();
    model->dim = train[0].features.size();
    const std::size_t estimators = static_cast<std::size_t>(hp.num("estimators", 10));

    ColumnMatrix m(train);
    const auto sorted0 = sort_columns(m);
    TreeOptions opts;
    opts.criterion = SplitCriterion::Variance;
    opts.max_depth = static_cast<std::size_t>(hp.num("maxdepth", 5));

    const double base_rate = count_positives(train) / static_cast<double>(train.size());
    model->f0 = std::log(base_rate / (1.0 - base_rate));

    std::vector<double> f(m.n, model->f0), residual(m.n);
    for (std::size_t stage = 0; stage < estimators; ++stage) {
        for (std::size_t i = 0; i < m.n; ++i) residual[i] = m.labels[i] - detail::sigmoid(f[i]);
        auto tree = build_tree(m, residual, opts, nullptr, sorted0);
        double loss = 0.0;
        for (std::size_t i = 0; i < m.n; ++i) {
            f[i] += model->step * tree.predict(train[i].features);
            const double p = detail::sigmoid(f[i]);
            loss -= m.labels[i] != 0.0 ? std::log(std::max(p, 1e-300))
                                       : std::log(std::max(1.0 - p, 1e-300));
        }
        loss /= static_cast<double>(m.n);
        if (!std::isfinite(loss)) throw TrainingDivergedError("gbt diverged", stage);
        model->loss_trace.push_back(loss);
        model->trees.push_back(std::move(tree));
    }
    return model;
}

// ------------------------------------------------------------------------ KNN

class KnnModel final : public Model {
public:
    NeighborIndex index;
    std::vector<int> labels;
    std::size_t k = 5;

    KnnModel(const std::vector<FeatureVector>& points, std::vector<int> lbls, std::size_t kk)
        : index(points), labels(std::move(lbls)), k(kk) {}

    double score(const FeatureVector& x) const override {
        const auto nn = index.query(x, k);
        std::size_t pos = 0;
        for (auto i : nn) pos += (labels[i] == 1);
        return static_cast<double>(pos) / static_cast<double>(nn.size());
    }
    std::string family() const override { return "knn"; }
    std::size_t input_dim() const override { return index.dim(); }
};

/// Lazy k-nearest-neighbour classifier: score is the positive fraction among
/// the k nearest training records (distance ties break to the lower index).
inline TrainedModel fit_knn(const std::vector<LabeledRecord>& train, std::size_t k = 5) {
    if (train.empty()) throw EmptyDatasetError("fit_knn: empty training set");
    if (k == 0 || k > train.size()) {
        throw ConfigError("fit_knn: k must be in [1, train size]");
    }
    std::vector<FeatureVector> points;
    std::vector<int> labels;
    points.reserve(train.size());
    labels.reserve(train.size());
    for (const auto& r : train) {
        points.push_back(r.features);
        labels.push_back(r.label);
    }
    return std::make_shared<KnnModel>(points, std::move(labels), k);
}

// ------------------------------------------------------------------------ MLP

class MlpModel final : public Model {
public:
    DenseNet net;
    std::size_t dim = 0;

    double score(const FeatureVector& x) const override { return net.forward(x)[0]; }
    std::string family() const override { return "mlp"; }
    std::size_t input_dim() const override { return dim; }
};

/// One hidden layer of 32 tanh units, sigmoid output, cross-entropy loss,
/// mini-batch gradient descent for 'maximum iterations' epochs. Only the
/// 'gd' solver exists; requesting 'l-bfgs' is reported as unsupported.
inline TrainedModel fit_mlp(const std::vector<LabeledRecord>& train, const HyperParams& hp,
                            RngSeed seed) {
    detail::require_both_classes(train, "fit_mlp");
    const std::string solver = hp.str("solver", "gd");
    if (solver != "gd") {
        throw UnsupportedSolverError("fit_mlp: solver '" + solver + "' is not supported (use 'gd')");
    }
    const std::size_t epochs = static_cast<std::size_t>(hp.num("maximum iterations", 100));
    const double lr = hp.num("learning rate", 0.5);
    const std::size_t batch_size = static_cast<std::size_t>(hp.num("batch size", 32));

    auto model = std::make_shared<MlpModel>();
    model->dim = train[0].features.size();
    Rng rng(seed);
    model->net = DenseNet::random({model->dim, 32, 1}, {Activation::Tanh, Activation::Sigmoid}, rng);

    Optimizer opt(Optimizer::Kind::Sgd, lr);
    auto grads = model->net.make_gradients();
    DenseNet::ForwardCache cache;
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t stop = std::min(order.size(), start + batch_size);
            grads.zero();
            for (std::size_t i = start; i < stop; ++i) {
                const auto& r = train[order[i]];
                const double p = model->net.forward_cached(r.features, cache)[0];
                epoch_loss -= r.label ? std::log(p) : std::log(1.0 - p);
                FeatureVector grad{(p - static_cast<double>(r.label)) /
                                   std::max(p * (1.0 - p), 1e-12)};
                model->net.backward(cache, grad, grads);
            }
            opt.step(model->net, grads, 1.0 / static_cast<double>(stop - start));
        }
        if (!std::isfinite(epoch_loss)) throw TrainingDivergedError("mlp diverged", epoch);
    }
    return model;
}

// -------------------------------------------------------- dispatch & batches

inline TrainedModel fit_model(const std::string& family, const std::vector<LabeledRecord>& train,
                              const HyperParams& hp, RngSeed seed) {
    if (family == "nb") return fit_naive_bayes(train);
    if (family == "lr") return fit_logistic_regression(train, hp);
    if (family == "svm") return fit_linear_svm(train, hp);
    if (family == "dt") return fit_decision_tree(train, hp);
    if (family == "rf") return fit_random_forest(train, hp, seed);
    if (family == "gbt") return fit_gbt(train, hp);
    if (family == "knn") return fit_knn(train, static_cast<std::size_t>(hp.num("k", 5)));
    if (family == "mlp") return fit_mlp(train, hp, seed);
    throw ConfigError("unknown model family: " + family +
                      " (expected one of nb|lr|svm|dt|rf|gbt|knn|mlp)");
}

struct Predictions {
    std::vector<double> scores;
    std::vector<int> labels;
};

inline Predictions predict_batch(const TrainedModel& model, const RecordBatch& batch) {
    Predictions out;
    out.scores.reserve(batch.records.size());
    out.labels.reserve(batch.records.size());
    for (const auto& r : batch.records) {
        if (r.features.size() != model->input_dim()) {
            throw DimensionError("predict_batch: record dim " + std::to_string(r.features.size()) +
                                 ", model expects " + std::to_string(model->input_dim()));
        }
        const double s = model->score(r.features);
        out.scores.push_back(s);
        out.labels.push_back(s >= 0.5 ? 1 : 0);
    }
    return out;
}

/// The tuning grid for each family.
inline std::vector<HyperParams> default_grid(const std::string& family) {
    std::vector<HyperParams> grid;
    auto cross_num = [&grid](const std::string& key, const std::vector<double>& values) {
        std::vector<HyperParams> next;
        for (const auto& base : grid.empty() ? std::vector<HyperParams>{HyperParams{}} : grid) {
            for (double v : values) {
                HyperParams hp = base;
                hp.set(key, v);
                next.push_back(hp);
            }
        }
        grid = std::move(next);
    };
    auto cross_str = [&grid](const std::string& key, const std::vector<std::string>& values) {
        std::vector<HyperParams> next;
        for (const auto& base : grid.empty() ? std::vector<HyperParams>{HyperParams{}} : grid) {
            for (const auto& v : values) {
                HyperParams hp = base;
                hp.set(key, v);
                next.push_back(hp);
            }
        }
        grid = std::move(next);
    };

    if (family == "lr") {
        cross_num("regularization parameter", {0.1, 0.01, 0.001});
        cross_num("maximum iterations", {10, 20, 30, 40, 50, 100, 500});
    } else if (family == "svm") {
        cross_num("regularization parameter", {0.1, 0.01});
        cross_num("maximum iterations", {30, 40, 50, 100});
    } else if (family == "dt") {
        cross_str("criterion", {"gini", "entropy"});
        cross_num("maxdepth", {5, 10, 15, 20});
    } else if (family == "rf" || family == "gbt") {
        cross_num("maxdepth", {5, 10, 15, 20});
        cross_num("estimators", {10, 20, 30, 40, 50});
    } else if (family == "mlp") {
        cross_str("solver", {"gd"});
        cross_num("maximum iterations", {50, 100, 200, 300});
    } else if (family == "nb") {
        grid.push_back(HyperParams{});
    } else if (family == "knn") {
        HyperParams hp;
        hp.set("k", 5);
        grid.push_back(hp);
    } else {
        throw ConfigError("unknown model family: " + family);
    }
    return grid;
}

}  // namespace fraudstream
