#pragma once

#include <string>
#include <vector>

#include "kpd/geometry.hpp"
#include "kpd/tensor.hpp"
#include "kpd/train.hpp"

namespace kpd {

// Binary 8-bit PGM (P5, maxval 255).
void write_pgm(const std::string& path, const GrayImage& img);
GrayImage read_pgm(const std::string& path);

// Raw little-endian f32 buffer, row-major, header-free.
void write_f32(const std::string& path, const std::vector<float>& data);
std::vector<float> read_f32(const std::string& path, size_t expected_count);

TensorF image_to_tensor(const GrayImage& img);       // values scaled to [0, 1]
GrayImage tensor_to_image(const TensorF& t);         // clamped, rounded to u8

// Sequence layout: frame_%06d.pgm, depth_%06d.f32, frame_%06d.json
// (depth_kind, fx/fy/cx/cy, R row-major 9 floats, t 3 floats).
void save_frame(const std::string& dir, int index, const CameraFrame& frame);
CameraFrame load_frame(const std::string& dir, int index);
std::vector<CameraFrame> load_sequence(const std::string& dir);

// Homography-pair layout: pair_%06d_a.pgm, pair_%06d_b.pgm, pair_%06d.json
// (h_ab 9 floats, per-cell labels for both images).
void save_pair(const std::string& dir, int index, const HomographyPair& pair);
HomographyPair load_pair(const std::string& dir, int index);
std::vector<HomographyPair> load_pairs(const std::string& dir);

}  // namespace kpd
