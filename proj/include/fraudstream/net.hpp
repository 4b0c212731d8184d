#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fraudstream/core.hpp"

namespace fraudstream {

enum class Activation : std::uint8_t { LeakyRelu = 0, Sigmoid = 1, Tanh = 2, Linear = 3 };

namespace detail {

constexpr double kLeakySlope = 0.2;

inline double activate(Activation a, double z) {
    switch (a) {
        case Activation::LeakyRelu:
            return z > 0.0 ? z : kLeakySlope * z;
        case Activation::Sigmoid: {
            // numerically stable; clamped so outputs stay strictly inside (0,1)
            const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                                      : std::exp(z) / (1.0 + std::exp(z));
            return std::min(std::max(s, 1e-15), 1.0 - 1e-15);
        }
        case Activation::Tanh:
            return std::tanh(z);
        case Activation::Linear:
            return z;
    }
    return z;
}

inline double activate_grad(Activation a, double z, double out) {
    switch (a) {
        case Activation::LeakyRelu:
            return z > 0.0 ? 1.0 : kLeakySlope;
        case Activation::Sigmoid:
            return out * (1.0 - out);
        case Activation::Tanh:
            return 1.0 - out * out;
        case Activation::Linear:
            return 1.0;
    }
    return 1.0;
}

}  // namespace detail

/// One dense layer: out = act(W x + b), W stored row-major (out_dim x in_dim).
struct DenseLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::Linear;
    std::vector<double> weights;
    std::vector<double> biases;
};

/// Small fully connected network with explicit forward/backward, used for the
/// GAN generator/discriminator pair and the MLP classifier.
class DenseNet {
public:
    DenseNet() = default;

    DenseNet(const std::vector<std::size_t>& dims, const std::vector<Activation>& acts) {
        if (dims.size() < 2 || acts.size() != dims.size() - 1) {
            throw ConfigError("DenseNet: need n+1 dims for n activations");
        }
        layers_.resize(acts.size());
        for (std::size_t l = 0; l < acts.size(); ++l) {
            layers_[l].in_dim = dims[l];
            layers_[l].out_dim = dims[l + 1];
            layers_[l].activation = acts[l];
            layers_[l].weights.assign(dims[l] * dims[l + 1], 0.0);
            layers_[l].biases.assign(dims[l + 1], 0.0);
        }
    }

    /// Xavier-uniform weight init, biases zero. Draw order: layer by layer,
    /// weights row-major.
    static DenseNet random(const std::vector<std::size_t>& dims,
                           const std::vector<Activation>& acts, Rng& rng) {
        DenseNet net(dims, acts);
        for (auto& layer : net.layers_) {
            const double limit =
                std::sqrt(6.0 / static_cast<double>(layer.in_dim + layer.out_dim));
            for (auto& w : layer.weights) w = rng.uniform(-limit, limit);
        }
        return net;
    }

    std::size_t input_dim() const { return layers_.front().in_dim; }
    std::size_t output_dim() const { return layers_.back().out_dim; }
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    FeatureVector forward(const FeatureVector& x) const {
        check_input(x);
        FeatureVector cur = x;
        for (const auto& layer : layers_) cur = apply(layer, cur);
        return cur;
    }

    struct ForwardCache {
        std::vector<FeatureVector> inputs;      // a_0 .. a_{L-1}
        std::vector<FeatureVector> pre;         // z_1 .. z_L
        std::vector<FeatureVector> outputs;     // a_1 .. a_L
    };

    FeatureVector forward_cached(const FeatureVector& x, ForwardCache& cache) const {
        check_input(x);
        cache.inputs.clear();
        cache.pre.clear();
        cache.outputs.clear();
        FeatureVector cur = x;
        for (const auto& layer : layers_) {
            cache.inputs.push_back(cur);
            FeatureVector z(layer.out_dim, 0.0);
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                const double* wrow = layer.weights.data() + o * layer.in_dim;
                double acc = layer.biases[o];
                for (std::size_t i = 0; i < layer.in_dim; ++i) acc += wrow[i] * cur[i];
                z[o] = acc;
            }
            cache.pre.push_back(z);
            FeatureVector a(layer.out_dim);
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                a[o] = detail::activate(layer.activation, z[o]);
            }
            cache.outputs.push_back(a);
            cur = std::move(a);
        }
        return cur;
    }

    struct Gradients {
        std::vector<std::vector<double>> weights;  // same shapes as layers
        std::vector<std::vector<double>> biases;
        FeatureVector input;  // dL/dx, useful for chaining G through D

        void zero() {
            for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
            for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
            std::fill(input.begin(), input.end(), 0.0);
        }
    };

    Gradients make_gradients() const {
        Gradients g;
        g.weights.resize(layers_.size());
        g.biases.resize(layers_.size());
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            g.weights[l].assign(layers_[l].weights.size(), 0.0);
            g.biases[l].assign(layers_[l].biases.size(), 0.0);
        }
        g.input.assign(input_dim(), 0.0);
        return g;
    }

    /// Accumulates parameter gradients for one sample whose forward pass is in
    /// `cache`; `output_grad` is dL/d(final activation).
    void backward(const ForwardCache& cache, const FeatureVector& output_grad,
                  Gradients& grads) const {
        FeatureVector delta = output_grad;
        for (std::size_t l = layers_.size(); l-- > 0;) {
            const auto& layer = layers_[l];
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                delta[o] *= detail::activate_grad(layer.activation, cache.pre[l][o],
                                                  cache.outputs[l][o]);
            }
            const auto& in = cache.inputs[l];
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                double* gw = grads.weights[l].data() + o * layer.in_dim;
                for (std::size_t i = 0; i < layer.in_dim; ++i) gw[i] += delta[o] * in[i];
                grads.biases[l][o] += delta[o];
            }
            if (l > 0 || !grads.input.empty()) {
                FeatureVector prev(layer.in_dim, 0.0);
                for (std::size_t o = 0; o < layer.out_dim; ++o) {
                    const double* wrow = layer.weights.data() + o * layer.in_dim;
                    for (std::size_t i = 0; i < layer.in_dim; ++i) prev[i] += wrow[i] * delta[o];
                }
                if (l == 0) {
                    for (std::size_t i = 0; i < layer.in_dim; ++i) grads.input[i] += prev[i];
                    break;
                }
                delta = std::move(prev);
            }
        }
    }

    /// dL/dx only, without accumulating parameter gradients. Used to chain a
    /// generator through a frozen discriminator.
    FeatureVector backward_input(const ForwardCache& cache, const FeatureVector& output_grad) const {
        FeatureVector delta = output_grad;
        for (std::size_t l = layers_.size(); l-- > 0;) {
            const auto& layer = layers_[l];
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                delta[o] *= detail::activate_grad(layer.activation, cache.pre[l][o],
                                                  cache.outputs[l][o]);
            }
            FeatureVector prev(layer.in_dim, 0.0);
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                const double* wrow = layer.weights.data() + o * layer.in_dim;
                for (std::size_t i = 0; i < layer.in_dim; ++i) prev[i] += wrow[i] * delta[o];
            }
            delta = std::move(prev);
        }
        return delta;
    }

private:
    static FeatureVector apply(const DenseLayer& layer, const FeatureVector& x) {
        FeatureVector out(layer.out_dim);
        for (std::size_t o = 0; o < layer.out_dim; ++o) {
            const double* wrow = layer.weights.data() + o * layer.in_dim;
            double acc = layer.biases[o];
            for (std::size_t i = 0; i < layer.in_dim; ++i) acc += wrow[i] * x[i];
            out[o] = detail::activate(layer.activation, acc);
        }
        return out;
    }

    void check_input(const FeatureVector& x) const {
        if (layers_.empty()) throw ConfigError("DenseNet: empty network");
        if (x.size() != layers_.front().in_dim) {
            throw DimensionError("DenseNet: input dim " + std::to_string(x.size()) +
                                 ", expected " + std::to_string(layers_.front().in_dim));
        }
    }

    std::vector<DenseLayer> layers_;
};

/// Adam, RMSProp, and plain SGD over DenseNet parameters. One optimizer owns
/// one network's moment state; step() applies accumulated gradients scaled by
/// 1/batch.
class Optimizer {
public:
    enum class Kind { Sgd, Adam, RmsProp };

    Optimizer(Kind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {}

    void step(DenseNet& net, const DenseNet::Gradients& grads, double inv_batch) {
        ensure_state(net);
        ++t_;
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            update(net.layers()[l].weights, grads.weights[l], m_w_[l], v_w_[l], inv_batch);
            update(net.layers()[l].biases, grads.biases[l], m_b_[l], v_b_[l], inv_batch);
        }
    }

private:
    void ensure_state(const DenseNet& net) {
        if (!m_w_.empty()) return;
        const auto& layers = net.layers();
        m_w_.resize(layers.size());
        v_w_.resize(layers.size());
        m_b_.resize(layers.size());
        v_b_.resize(layers.size());
        for (std::size_t l = 0; l < layers.size(); ++l) {
            m_w_[l].assign(layers[l].weights.size(), 0.0);
            v_w_[l].assign(layers[l].weights.size(), 0.0);
            m_b_[l].assign(layers[l].biases.size(), 0.0);
            v_b_[l].assign(layers[l].biases.size(), 0.0);
        }
    }

    void update(std::vector<double>& params, const std::vector<double>& grad,
                std::vector<double>& m, std::vector<double>& v, double inv_batch) {
        constexpr double beta1 = 0.9, beta2 = 0.999, decay = 0.9, eps = 1e-8;
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = grad[i] * inv_batch;
            switch (kind_) {
                case Kind::Sgd:
                    params[i] -= lr_ * g;
                    break;
                case Kind::Adam: {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
                    const double mhat = m[i] / (1.0 - std::pow(beta1, static_cast<double>(t_)));
                    const double vhat = v[i] / (1.0 - std::pow(beta2, static_cast<double>(t_)));
                    params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps);
                    break;
                }
                case Kind::RmsProp: {
                    v[i] = decay * v[i] + (1.0 - decay) * g * g;
                    params[i] -= lr_ * g / (std::sqrt(v[i]) + eps);
                    break;
                }
            }
        }
    }

    Kind kind_;
    double lr_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_w_, v_w_, m_b_, v_b_;
};

// --- flat on-disk format: little-endian, small header then f64 payload ---

namespace detail {

inline void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 4);
}

inline std::uint32_t read_u32(std::ifstream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

inline void write_f64(std::ofstream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

inline double read_f64(std::ifstream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

constexpr std::uint32_t kNetMagic = 0x46534e31;  // "FSN1"

}  // namespace detail

/// Serializes a network: magic, version, layer count, per-layer (in, out,
/// activation), then per-layer weights (row-major) and biases as
/// little-endian 64-bit floats.
inline void save_net(const DenseNet& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    detail::write_u32(out, detail::kNetMagic);
    detail::write_u32(out, 1);
    detail::write_u32(out, static_cast<std::uint32_t>(net.layers().size()));
    for (const auto& layer : net.layers()) {
        detail::write_u32(out, static_cast<std::uint32_t>(layer.in_dim));
        detail::write_u32(out, static_cast<std::uint32_t>(layer.out_dim));
        detail::write_u32(out, static_cast<std::uint32_t>(layer.activation));
    }
    for (const auto& layer : net.layers()) {
        for (double w : layer.weights) detail::write_f64(out, w);
        for (double b : layer.biases) detail::write_f64(out, b);
    }
    if (!out) throw IoError("failed writing " + path);
}

inline DenseNet load_net(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    if (detail::read_u32(in) != detail::kNetMagic) throw ParseError("bad net file magic", 0);
    if (detail::read_u32(in) != 1) throw ParseError("unsupported net file version", 0);
    const std::uint32_t n_layers = detail::read_u32(in);
    std::vector<std::size_t> dims;
    std::vector<Activation> acts;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const std::uint32_t in_dim = detail::read_u32(in);
        const std::uint32_t out_dim = detail::read_u32(in);
        const std::uint32_t act = detail::read_u32(in);
        if (l == 0) dims.push_back(in_dim);
        if (!dims.empty() && dims.back() != in_dim) throw ParseError("net layer dims do not chain", 0);
        dims.push_back(out_dim);
        acts.push_back(static_cast<Activation>(act));
    }
    DenseNet net(dims, acts);
    for (auto& layer : net.layers()) {
        for (auto& w : layer.weights) w = detail::read_f64(in);
        for (auto& b : layer.biases) b = detail::read_f64(in);
    }
    if (!in) throw ParseError("truncated net file", 0);
    return net;
}

}  // namespace fraudstream
