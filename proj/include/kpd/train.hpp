#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kpd/model.hpp"
#include "kpd/optim.hpp"

namespace kpd {

// An image, its homography warp, and per-cell keypoint class labels.
// Labels are in {0..64}, 64 = dustbin (no point in the cell).
struct HomographyPair {
    TensorF image_a, image_b;      // 1x1xHxW, values in [0, 1]
    std::array<double, 9> h_ab{};  // row-major, maps a-pixels to b-pixels
    std::vector<int> labels_a, labels_b;
};

struct TrainConfig {
    int steps = 1000;
    int batch = 4;
    uint64_t seed = 0;
    AdamConfig adam;
    float lambda_d = 1e-4f;  // descriptor-loss weight in the teacher loss
    bool use_sobel = false;  // gradient regularizer in the distillation loss
    int checkpoint_every = 0;
    std::string checkpoint_path;
};

struct LossRecord {
    int step = 0;
    double total = 0, term1 = 0, term2 = 0, term3 = 0;
};

// Cell-to-cell expected descriptor matches: labeled points of image a warped
// by h_ab into image b, kept when they land in bounds.
std::vector<std::pair<int, int>> expected_matches(const HomographyPair& pair, int cell = 8);

// Paired homography supervision: L = L_p(a) + L_p(b) + lambda_d * L_d.
ModelWeights train_teacher(const ModelConfig& config, const std::vector<HomographyPair>& dataset,
                           const TrainConfig& cfg, std::vector<LossRecord>* history = nullptr);

// Output-matching distillation of a frozen teacher into a fresh student.
// Terms recorded per step: mse(kt), mse(dk), optional mse(sobel(kt)).
ModelWeights distill(const ModelWeights& teacher, const ModelConfig& student_config,
                     const std::vector<TensorF>& images, const TrainConfig& cfg,
                     std::vector<LossRecord>* history = nullptr);

}  // namespace kpd
