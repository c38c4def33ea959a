#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kpd/autodiff.hpp"
#include "kpd/tensor.hpp"

namespace kpd {

// Fully-convolutional detector/descriptor net: shared encoder, two heads.
// The encoder downscales by 8 so each output cell covers an 8x8 pixel block;
// the detector head emits cell*cell + 1 classes (64 pixel slots + dustbin).
struct ModelConfig {
    int cell = 8;
    double width_multiplier = 1.0;
    std::array<int, 4> base_channels{64, 64, 128, 128};
    int head_channels = 256;
    int descriptor_dim = 256;      // base value, scaled by width_multiplier
    int descriptor_dim_override = 0;  // nonzero pins the head output width (distillation)

    int detector_channels() const { return cell * cell + 1; }
    int scaled(int c) const {
        const int s = static_cast<int>(std::lround(c * width_multiplier));
        return s < 1 ? 1 : s;
    }
    int enc(int stage) const { return scaled(base_channels[static_cast<size_t>(stage)]); }
    int head() const { return scaled(head_channels); }
    int desc_dim() const {
        return descriptor_dim_override > 0 ? descriptor_dim_override : scaled(descriptor_dim);
    }

    static ModelConfig superpoint() { return {}; }
    static ModelConfig toy() {
        ModelConfig c;
        c.base_channels = {8, 8, 16, 16};
        c.head_channels = 32;
        c.descriptor_dim = 32;
        return c;
    }
};

struct LayerSpec {
    std::string name;
    int in_ch, out_ch, ksize, pad;
};

inline std::vector<LayerSpec> layer_specs(const ModelConfig& c) {
    return {
        {"enc1a", 1, c.enc(0), 3, 1},        {"enc1b", c.enc(0), c.enc(0), 3, 1},
        {"enc2a", c.enc(0), c.enc(1), 3, 1}, {"enc2b", c.enc(1), c.enc(1), 3, 1},
        {"enc3a", c.enc(1), c.enc(2), 3, 1}, {"enc3b", c.enc(2), c.enc(2), 3, 1},
        {"enc4a", c.enc(2), c.enc(3), 3, 1}, {"enc4b", c.enc(3), c.enc(3), 3, 1},
        {"detA", c.enc(3), c.head(), 3, 1},  {"detB", c.head(), c.detector_channels(), 1, 0},
        {"descA", c.enc(3), c.head(), 3, 1}, {"descB", c.head(), c.desc_dim(), 1, 0},
    };
}

inline long long param_count(const ModelConfig& c) {
    long long total = 0;
    for (const auto& l : layer_specs(c))
        total += static_cast<long long>(l.out_ch) * l.in_ch * l.ksize * l.ksize + l.out_ch;
    return total;
}

struct ModelWeights {
    ModelConfig config;
    // "<layer>.w" and "<layer>.b" in layer_specs order
    std::vector<std::pair<std::string, TensorF>> params;

    TensorF& find(const std::string& name) {
        for (auto& [n, t] : params)
            if (n == name) return t;
        throw std::runtime_error("no such parameter: " + name);
    }
    const TensorF& find(const std::string& name) const {
        return const_cast<ModelWeights*>(this)->find(name);
    }
};

// He-uniform fan-in init for weights, zero biases.
inline ModelWeights init_weights(const ModelConfig& config, uint64_t seed) {
    ModelWeights w;
    w.config = config;
    std::mt19937_64 rng(seed);
    for (const auto& l : layer_specs(config)) {
        const double fan_in = static_cast<double>(l.in_ch) * l.ksize * l.ksize;
        const double limit = std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> dist(-limit, limit);
        TensorF wt(l.out_ch, l.in_ch, l.ksize, l.ksize);
        for (auto& v : wt.data) v = static_cast<float>(dist(rng));
        TensorF bt(1, 1, 1, l.out_ch);
        w.params.emplace_back(l.name + ".w", std::move(wt));
        w.params.emplace_back(l.name + ".b", std::move(bt));
    }
    return w;
}

template <typename T>
struct ModelVars {
    ModelConfig config;
    std::vector<std::pair<std::string, Var<T>>> params;

    Var<T>& find(const std::string& name) {
        for (auto& [n, v] : params)
            if (n == name) return v;
        throw std::runtime_error("no such parameter: " + name);
    }
};

template <typename T>
ModelVars<T> to_vars(Tape<T>& tape, const ModelWeights& w, bool requires_grad) {
    ModelVars<T> mv;
    mv.config = w.config;
    for (const auto& [name, t] : w.params) {
        if constexpr (std::is_same_v<T, float>)
            mv.params.emplace_back(name, tape.leaf(t, requires_grad));
        else
            mv.params.emplace_back(name, tape.leaf(t.template cast<T>(), requires_grad));
    }
    return mv;
}

template <typename T>
struct ForwardOut {
    Var<T> det;   // (N, 65, H/8, W/8) logits
    Var<T> desc;  // (N, D, H/8, W/8) unnormalized
};

template <typename T>
ForwardOut<T> forward_diff(Tape<T>& tape, ModelVars<T>& m, const Var<T>& image) {
    const auto& img = image->value;
    if (img.c() != 1)
        throw std::invalid_argument("forward expects a single-channel image, got " +
                                    img.shape_str());
    const int mult = m.config.cell;
    if (img.h() % mult != 0 || img.w() % mult != 0)
        throw std::invalid_argument("forward: image dims " + img.shape_str() +
                                    " must be a multiple of " + std::to_string(mult));
    auto conv_relu = [&](const Var<T>& x, const std::string& layer) {
        return tape.relu(tape.conv2d(x, m.find(layer + ".w"), m.find(layer + ".b"), 1, 1));
    };
    auto x = conv_relu(image, "enc1a");
    x = conv_relu(x, "enc1b");
    x = tape.maxpool2(x);
    x = conv_relu(x, "enc2a");
    x = conv_relu(x, "enc2b");
    x = tape.maxpool2(x);
    x = conv_relu(x, "enc3a");
    x = conv_relu(x, "enc3b");
    x = tape.maxpool2(x);
    x = conv_relu(x, "enc4a");
    x = conv_relu(x, "enc4b");

    auto det = conv_relu(x, "detA");
    det = tape.conv2d(det, m.find("detB.w"), m.find("detB.b"), 1, 0);
    auto desc = conv_relu(x, "descA");
    desc = tape.conv2d(desc, m.find("descB.w"), m.find("descB.b"), 1, 0);
    return {det, desc};
}

// Inference-only forward on float weights; no gradients recorded.
inline std::pair<TensorF, TensorF> forward(const ModelWeights& w, const TensorF& image) {
    Tape<float> tape;
    auto mv = to_vars(tape, w, false);
    auto out = forward_diff(tape, mv, tape.constant(image));
    return {out.det->value, out.desc->value};
}

struct KeypointSet {
    std::vector<std::array<float, 2>> points;  // (x, y) pixel coordinates
    std::vector<float> scores;
    std::vector<std::vector<float>> descriptors;  // unit L2 norm, may be empty
};

// Softmax over 65 channels, drop the dustbin, depth-to-space to an HxW score
// map, threshold, greedy NMS (Chebyshev radius), keep max_points best.
KeypointSet detect(const TensorF& det_raw, float score_threshold, int nms_radius, int max_points,
                   int cell = 8);

// Full HxW score map after softmax + dustbin removal + depth-to-space.
TensorF score_map(const TensorF& det_raw, int cell = 8);

// Bilinear sampling of the descriptor grid at pixel coordinates, L2-normalized.
std::vector<std::vector<float>> sample_descriptors(const TensorF& desc_raw,
                                                   const std::vector<std::array<float, 2>>& points,
                                                   int cell = 8);

}  // namespace kpd
