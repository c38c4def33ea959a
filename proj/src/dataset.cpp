#include "kpd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace kpd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string frame_name(int index, const char* stem, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%06d%s", stem, index, ext);
    return buf;
}

json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    json j;
    is >> j;
    return j;
}

void save_json(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << j.dump(2) << "\n";
}

}  // namespace

void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "P5\n" << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()),
             static_cast<std::streamsize>(img.pixels.size()));
    if (!os) throw std::runtime_error("pgm write failed: " + path);
}

GrayImage read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string magic;
    is >> magic;
    if (magic != "P5") throw std::runtime_error("not a binary PGM: " + path);
    auto skip_ws_comments = [&] {
        while (is) {
            const int c = is.peek();
            if (c == '#') {
                std::string line;
                std::getline(is, line);
            } else if (std::isspace(c)) {
                is.get();
            } else {
                break;
            }
        }
    };
    int w = 0, h = 0, maxv = 0;
    skip_ws_comments();
    is >> w;
    skip_ws_comments();
    is >> h;
    skip_ws_comments();
    is >> maxv;
    is.get();  // single whitespace before raster
    if (w <= 0 || h <= 0 || maxv != 255)
        throw std::runtime_error("unsupported PGM header in " + path);
    GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<size_t>(w) * h);
    is.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!is) throw std::runtime_error("truncated PGM: " + path);
    return img;
}

void write_f32(const std::string& path, const std::vector<float>& data) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!os) throw std::runtime_error("f32 write failed: " + path);
}

std::vector<float> read_f32(const std::string& path, size_t expected_count) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::vector<float> data(expected_count);
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(expected_count * sizeof(float)));
    if (!is) throw std::runtime_error("depth file truncated or missing data: " + path);
    return data;
}

TensorF image_to_tensor(const GrayImage& img) {
    TensorF t(1, 1, img.height, img.width);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        t.data[i] = static_cast<float>(img.pixels[i]) / 255.f;
    return t;
}

GrayImage tensor_to_image(const TensorF& t) {
    GrayImage img;
    img.width = t.w();
    img.height = t.h();
    img.pixels.resize(static_cast<size_t>(img.width) * img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        const float v = std::clamp(t.data[i], 0.f, 1.f);
        img.pixels[i] = static_cast<uint8_t>(std::lround(v * 255.f));
    }
    return img;
}

void save_frame(const std::string& dir, int index, const CameraFrame& frame) {
    fs::create_directories(dir);
    const fs::path d(dir);
    write_pgm((d / frame_name(index, "frame", ".pgm")).string(), frame.image);
    write_f32((d / frame_name(index, "depth", ".f32")).string(), frame.depth);
    json j{{"depth_kind",
            frame.depth_kind == DepthKind::planar_z ? "planar_z" : "ray_distance"},
           {"fx", frame.intrinsics.fx},
           {"fy", frame.intrinsics.fy},
           {"cx", frame.intrinsics.cx},
           {"cy", frame.intrinsics.cy},
           {"R", frame.rotation.m},
           {"t", std::array<double, 3>{frame.translation.x, frame.translation.y,
                                       frame.translation.z}}};
    save_json((d / frame_name(index, "frame", ".json")).string(), j);
}

CameraFrame load_frame(const std::string& dir, int index) {
    const fs::path d(dir);
    CameraFrame f;
    f.image = read_pgm((d / frame_name(index, "frame", ".pgm")).string());
    const std::string depth_path = (d / frame_name(index, "depth", ".f32")).string();
    if (!fs::exists(depth_path)) throw std::runtime_error("missing depth file: " + depth_path);
    f.depth = read_f32(depth_path, static_cast<size_t>(f.image.width) * f.image.height);
    const json j = load_json((d / frame_name(index, "frame", ".json")).string());
    const std::string kind = j.at("depth_kind").get<std::string>();
    if (kind == "planar_z")
        f.depth_kind = DepthKind::planar_z;
    else if (kind == "ray_distance")
        f.depth_kind = DepthKind::ray_distance;
    else
        throw std::runtime_error("bad depth_kind '" + kind + "' in frame " +
                                 std::to_string(index));
    f.intrinsics = {j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("cx").get<double>(),
                    j.at("cy").get<double>()};
    f.rotation.m = j.at("R").get<std::array<double, 9>>();
    const auto t = j.at("t").get<std::array<double, 3>>();
    f.translation = {t[0], t[1], t[2]};
    f.validate();
    return f;
}

std::vector<CameraFrame> load_sequence(const std::string& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("not a dataset directory: " + dir);
    std::vector<CameraFrame> frames;
    for (int i = 0;; ++i) {
        const fs::path p = fs::path(dir) / frame_name(i, "frame", ".pgm");
        if (!fs::exists(p)) break;
        frames.push_back(load_frame(dir, i));
    }
    if (frames.empty()) throw std::runtime_error("no frames found in " + dir);
    return frames;
}

void save_pair(const std::string& dir, int index, const HomographyPair& pair) {
    fs::create_directories(dir);
    const fs::path d(dir);
    write_pgm((d / frame_name(index, "pair", "_a.pgm")).string(),
              tensor_to_image(pair.image_a));
    write_pgm((d / frame_name(index, "pair", "_b.pgm")).string(),
              tensor_to_image(pair.image_b));
    json j{{"h_ab", pair.h_ab}, {"labels_a", pair.labels_a}, {"labels_b", pair.labels_b}};
    save_json((d / frame_name(index, "pair", ".json")).string(), j);
}

HomographyPair load_pair(const std::string& dir, int index) {
    const fs::path d(dir);
    HomographyPair p;
    p.image_a = image_to_tensor(read_pgm((d / frame_name(index, "pair", "_a.pgm")).string()));
    p.image_b = image_to_tensor(read_pgm((d / frame_name(index, "pair", "_b.pgm")).string()));
    const json j = load_json((d / frame_name(index, "pair", ".json")).string());
    p.h_ab = j.at("h_ab").get<std::array<double, 9>>();
    p.labels_a = j.at("labels_a").get<std::vector<int>>();
    p.labels_b = j.at("labels_b").get<std::vector<int>>();
    const size_t cells =
        static_cast<size_t>(p.image_a.h() / 8) * static_cast<size_t>(p.image_a.w() / 8);
    if (p.labels_a.size() != cells || p.labels_b.size() != cells)
        throw std::runtime_error("pair " + std::to_string(index) + ": label count mismatch");
    return p;
}

std::vector<HomographyPair> load_pairs(const std::string& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("not a dataset directory: " + dir);
    std::vector<HomographyPair> pairs;
    for (int i = 0;; ++i) {
        const fs::path p = fs::path(dir) / frame_name(i, "pair", ".json");
        if (!fs::exists(p)) break;
        pairs.push_back(load_pair(dir, i));
    }
    if (pairs.empty()) throw std::runtime_error("no pairs found in " + dir);
    return pairs;
}

}  // namespace kpd
