#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fraudstream/core.hpp"
#include "fraudstream/net.hpp"

namespace fraudstream {

enum class GanVariant { Vanilla, Wasserstein };

struct GanConfig {
    std::size_t latent_dim = 32;
    std::size_t epochs = 10000;  // generator update steps over mini-batches
    std::size_t batch_size = 64;
    double learning_rate = 2e-4;
    GanVariant variant = GanVariant::Vanilla;
    double wgan_clip = 0.01;
    std::size_t critic_steps = 5;  // W-GAN only
    RngSeed seed;
};

/// Trained generator: latent normal noise in, sigmoid-bounded sample out.
struct GeneratorModel {
    DenseNet net;
    std::size_t latent_dim = 0;
    std::size_t data_dim = 0;
};

/// Optional training observers; `after_discriminator_step` fires after every
/// discriminator/critic parameter update (post weight clipping for W-GAN),
/// `discriminator_output` after every discriminator forward evaluation.
struct GanHooks {
    std::function<void(const DenseNet& discriminator, std::size_t epoch)> after_discriminator_step;
    std::function<void(double output)> discriminator_output;
};

namespace detail {

inline FeatureVector draw_latent(std::size_t dim, Rng& rng) {
    FeatureVector z(dim);
    for (auto& v : z) v = rng.normal();
    return z;
}

inline void clip_params(DenseNet& net, double clip) {
    for (auto& layer : net.layers()) {
        for (auto& w : layer.weights) w = std::clamp(w, -clip, clip);
        for (auto& b : layer.biases) b = std::clamp(b, -clip, clip);
    }
}

}  // namespace detail

/// Trains a GAN on (already normalized) minority-class feature vectors and
/// returns the generator.
///
/// Vanilla: discriminator 128/64/32/8 leaky-ReLU hidden, sigmoid head, binary
/// cross-entropy, one discriminator step then one generator step per epoch,
/// Adam updates for both networks.
///
/// Wasserstein: critic 256/128/64/32 leaky-ReLU hidden, linear head, critic
/// loss mean(C(fake)) - mean(C(real)), generator loss -mean(C(fake)),
/// RMSProp updates, weights clipped to +/-wgan_clip after every critic step,
/// critic_steps critic updates per generator update.
inline GeneratorModel train_gan(const std::vector<FeatureVector>& minority, const GanConfig& cfg,
                                const GanHooks* hooks = nullptr) {
    if (minority.empty()) throw EmptyDatasetError("train_gan: no minority samples");
    const std::size_t data_dim = minority[0].size();
    for (const auto& x : minority) {
        if (x.size() != data_dim) throw DimensionError("train_gan: inconsistent feature dims");
    }

    Rng rng(cfg.seed);
    const bool wasserstein = cfg.variant == GanVariant::Wasserstein;

    DenseNet gen, dis;
    if (wasserstein) {
        gen = DenseNet::random({cfg.latent_dim, 64, 128, 256, data_dim},
                               {Activation::LeakyRelu, Activation::LeakyRelu,
                                Activation::LeakyRelu, Activation::Sigmoid},
                               rng);
        dis = DenseNet::random({data_dim, 256, 128, 64, 32, 1},
                               {Activation::LeakyRelu, Activation::LeakyRelu,
                                Activation::LeakyRelu, Activation::LeakyRelu, Activation::Linear},
                               rng);
    } else {
        gen = DenseNet::random({cfg.latent_dim, 32, 64, 128, data_dim},
                               {Activation::LeakyRelu, Activation::LeakyRelu,
                                Activation::LeakyRelu, Activation::Sigmoid},
                               rng);
        dis = DenseNet::random({data_dim, 128, 64, 32, 8, 1},
                               {Activation::LeakyRelu, Activation::LeakyRelu,
                                Activation::LeakyRelu, Activation::LeakyRelu, Activation::Sigmoid},
                               rng);
    }

    const auto opt_kind = wasserstein ? Optimizer::Kind::RmsProp : Optimizer::Kind::Adam;
    Optimizer gen_opt(opt_kind, cfg.learning_rate);
    Optimizer dis_opt(opt_kind, cfg.learning_rate);

    auto dis_grads = dis.make_gradients();
    auto gen_grads = gen.make_gradients();
    DenseNet::ForwardCache dcache, gcache;
    const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
    const double inv_batch = 1.0 / static_cast<double>(batch);

    auto discriminator_pass = [&](std::size_t epoch) {
        dis_grads.zero();
        double loss = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            // real sample, target 1 (or +1 weight for the critic)
            const auto& real = minority[rng.index(minority.size())];
            const double dr = dis.forward_cached(real, dcache)[0];
            if (hooks && hooks->discriminator_output) hooks->discriminator_output(dr);
            FeatureVector grad(1);
            if (wasserstein) {
                loss -= dr * inv_batch;
                grad[0] = -inv_batch;  // minimize -mean(C(real))
            } else {
                loss -= std::log(dr) * inv_batch;
                grad[0] = -1.0 / dr;
            }
            dis.backward(dcache, grad, dis_grads);

            // fake sample, target 0 (or -1 weight)
            const auto fake = gen.forward(detail::draw_latent(cfg.latent_dim, rng));
            const double df = dis.forward_cached(fake, dcache)[0];
            if (hooks && hooks->discriminator_output) hooks->discriminator_output(df);
            if (wasserstein) {
                loss += df * inv_batch;
                grad[0] = inv_batch;  // minimize +mean(C(fake))
            } else {
                loss -= std::log(1.0 - df) * inv_batch;
                grad[0] = 1.0 / (1.0 - df);
            }
            dis.backward(dcache, grad, dis_grads);
        }
        if (!std::isfinite(loss)) {
            throw TrainingDivergedError("gan discriminator loss diverged", epoch);
        }
        dis_opt.step(dis, dis_grads, wasserstein ? 1.0 : inv_batch);
        if (wasserstein) detail::clip_params(dis, cfg.wgan_clip);
        if (hooks && hooks->after_discriminator_step) hooks->after_discriminator_step(dis, epoch);
    };

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::size_t d_steps = wasserstein ? cfg.critic_steps : 1;
        for (std::size_t s = 0; s < d_steps; ++s) discriminator_pass(epoch);

        // generator step: push D(G(z)) toward "real"
        gen_grads.zero();
        double gloss = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const auto z = detail::draw_latent(cfg.latent_dim, rng);
            const auto fake = gen.forward_cached(z, gcache);
            const double df = dis.forward_cached(fake, dcache)[0];
            if (hooks && hooks->discriminator_output) hooks->discriminator_output(df);
            FeatureVector grad(1);
            if (wasserstein) {
                gloss -= df * inv_batch;
                grad[0] = -inv_batch;  // minimize -mean(C(fake))
            } else {
                gloss -= std::log(df) * inv_batch;
                grad[0] = -1.0 / df;  // non-saturating generator loss
            }
            gen.backward(gcache, dis.backward_input(dcache, grad), gen_grads);
        }
        if (!std::isfinite(gloss)) {
            throw TrainingDivergedError("gan generator loss diverged", epoch);
        }
        gen_opt.step(gen, gen_grads, wasserstein ? 1.0 : inv_batch);
    }

    return GeneratorModel{std::move(gen), cfg.latent_dim, data_dim};
}

/// Draws n samples from a trained generator; every coordinate is inside (0,1)
/// because the generator head is a sigmoid.
inline std::vector<FeatureVector> generate_samples(const GeneratorModel& gen, std::size_t n,
                                                   RngSeed seed) {
    Rng rng(seed);
    std::vector<FeatureVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(gen.net.forward(detail::draw_latent(gen.latent_dim, rng)));
    }
    return out;
}

inline void save_generator(const GeneratorModel& gen, const std::string& path) {
    save_net(gen.net, path);
}

inline GeneratorModel load_generator(const std::string& path) {
    GeneratorModel gen;
    gen.net = load_net(path);
    gen.latent_dim = gen.net.input_dim();
    gen.data_dim = gen.net.output_dim();
    return gen;
}

/// GAN-backed oversampler with the same stopping rule as the SMOTE family:
/// synthetic minority records are appended until the minority count reaches
/// round(target_ratio * majority count).
inline std::vector<LabeledRecord> gan_oversample(const std::vector<LabeledRecord>& train,
                                                 GanConfig cfg, double target_ratio = 1.0) {
    if (!has_both_classes(train)) throw SingleClassError("gan_oversample requires both classes");
    std::size_t pos = count_positives(train);
    std::size_t neg = train.size() - pos;
    const int minority_label = pos <= neg ? 1 : 0;
    const std::size_t minority_count = std::min(pos, neg);
    const std::size_t majority_count = std::max(pos, neg);
    const std::size_t target = static_cast<std::size_t>(
        std::llround(target_ratio * static_cast<double>(majority_count)));
    std::vector<LabeledRecord> out = train;
    if (minority_count >= target) return out;

    std::vector<FeatureVector> minority;
    minority.reserve(minority_count);
    for (const auto& r : train) {
        if (r.label == minority_label) minority.push_back(r.features);
    }
    const auto generator = train_gan(minority, cfg);
    const auto samples = generate_samples(generator, target - minority_count,
                                          derive_seed(cfg.seed, 0x67656eULL));
    out.reserve(train.size() + samples.size());
    for (auto& s : samples) out.push_back(LabeledRecord{s, minority_label});
    return out;
}

}  // namespace fraudstream
