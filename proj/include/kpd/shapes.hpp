#pragma once

#include <array>
#include <random>
#include <vector>

#include "kpd/tensor.hpp"
#include "kpd/train.hpp"

namespace kpd {

// A rendered synthetic-shape canvas with the analytic corner/junction
// coordinates of its primitives (quads, triangles, segments, checkerboards;
// ellipses act as cornerless distractors).
struct RenderedScene {
    TensorF image;  // 1x1xHxW in [0, 1]
    std::vector<std::array<double, 2>> corners;
    float background = 0.5f;
};

RenderedScene render_shape_scene(std::mt19937_64& rng, int W, int H);

// Random projective warp: rotation <= 15 deg, scale 0.8-1.2, translation
// <= 10% of the canvas, mild perspective; composed around the image center.
std::array<double, 9> sample_homography(std::mt19937_64& rng, int W, int H);

// Per-cell class labels from analytic corners; one point per cell,
// nearest-to-center wins; cell*cell = dustbin.
std::vector<int> labels_from_corners(const std::vector<std::array<double, 2>>& corners, int W,
                                     int H, int cell = 8);

// Inverse-map bilinear warp; samples falling outside keep the background value.
TensorF warp_image(const TensorF& image, const std::array<double, 9>& h_ab, float background);

// Homography-pair training data: shapes canvas, analytic corner labels,
// random warp, warped image and labels. Deterministic in (seed, count, W, H).
std::vector<HomographyPair> gen_shapes(uint64_t seed, int count, int W, int H);

}  // namespace kpd
