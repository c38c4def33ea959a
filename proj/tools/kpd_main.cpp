#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpd/checkpoint.hpp"
#include "kpd/dataset.hpp"
#include "kpd/eval.hpp"
#include "kpd/report.hpp"
#include "kpd/scene.hpp"
#include "kpd/shapes.hpp"
#include "kpd/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TrainSetup {
    kpd::ModelConfig model;
    kpd::TrainConfig train;
};

TrainSetup parse_train_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("config " + path + ": " + e.what());
    }
    TrainSetup s;
    const std::string preset = j.value("preset", "toy");
    if (preset == "superpoint")
        s.model = kpd::ModelConfig::superpoint();
    else if (preset == "toy")
        s.model = kpd::ModelConfig::toy();
    else
        throw std::runtime_error("config " + path + ": unknown preset '" + preset + "'");
    s.model.width_multiplier = j.value("width_multiplier", 1.0);
    s.model.descriptor_dim_override = j.value("descriptor_dim_override", 0);
    s.train.steps = j.value("steps", 1000);
    s.train.batch = j.value("batch", 4);
    s.train.seed = j.value("seed", 0ull);
    s.train.adam.lr = j.value("lr", 1e-3f);
    s.train.adam.beta1 = j.value("beta1", 0.9f);
    s.train.adam.beta2 = j.value("beta2", 0.999f);
    s.train.adam.eps = j.value("eps", 1e-8f);
    s.train.lambda_d = j.value("lambda_d", 1e-4f);
    s.train.use_sobel = j.value("use_sobel", false);
    s.train.checkpoint_every = j.value("checkpoint_every", 0);
    return s;
}

// distillation inputs: every image of a pair dataset, or every frame image
std::vector<kpd::TensorF> load_images(const std::string& dir) {
    std::vector<kpd::TensorF> images;
    if (fs::exists(fs::path(dir) / "pair_000000.json")) {
        for (const auto& p : kpd::load_pairs(dir)) {
            images.push_back(p.image_a);
            images.push_back(p.image_b);
        }
    } else {
        for (const auto& f : kpd::load_sequence(dir))
            images.push_back(kpd::image_to_tensor(f.image));
    }
    return images;
}

int cmd_gen_shapes(const std::string& out, uint64_t seed, int count, int W, int H) {
    const auto pairs = kpd::gen_shapes(seed, count, W, H);
    for (size_t i = 0; i < pairs.size(); ++i)
        kpd::save_pair(out, static_cast<int>(i), pairs[i]);
    std::cout << "wrote " << pairs.size() << " pairs to " << out << "\n";
    return 0;
}

int cmd_gen_scene(const std::string& out, uint64_t seed, int frames, int W, int H,
                  const std::string& depth_kind, double lighting) {
    kpd::SceneSpec spec = kpd::default_scene(seed, frames, W, H);
    if (depth_kind == "ray_distance")
        spec.depth_kind = kpd::DepthKind::ray_distance;
    else if (depth_kind != "planar_z")
        throw std::runtime_error("unknown depth kind '" + depth_kind + "'");
    for (auto& l : spec.lighting) l = lighting;
    const auto rendered = kpd::gen_scene(spec);
    for (size_t i = 0; i < rendered.size(); ++i)
        kpd::save_frame(out, static_cast<int>(i), rendered[i]);
    std::cout << "wrote " << rendered.size() << " frames to " << out << "\n";
    return 0;
}

int cmd_train_teacher(const std::string& config_path, const std::string& dataset,
                      const std::string& out) {
    TrainSetup s = parse_train_config(config_path);
    fs::create_directories(out);
    s.train.checkpoint_path = (fs::path(out) / "teacher.ckpt").string();
    if (s.train.checkpoint_every == 0) s.train.checkpoint_every = s.train.steps;
    const auto pairs = kpd::load_pairs(dataset);
    std::vector<kpd::LossRecord> history;
    const auto weights = kpd::train_teacher(s.model, pairs, s.train, &history);
    kpd::save_weights(s.train.checkpoint_path, weights);
    kpd::write_loss_csv((fs::path(out) / "teacher_loss.csv").string(), history, "detector",
                        "descriptor", "unused");
    std::cout << "teacher checkpoint: " << s.train.checkpoint_path << "\n";
    return 0;
}

int cmd_distill(const std::string& config_path, const std::string& teacher_path,
                const std::string& dataset, const std::string& out) {
    TrainSetup s = parse_train_config(config_path);
    fs::create_directories(out);
    s.train.checkpoint_path = (fs::path(out) / "student.ckpt").string();
    if (s.train.checkpoint_every == 0) s.train.checkpoint_every = s.train.steps;
    const auto teacher = kpd::load_weights(teacher_path);
    // student head must match the teacher's descriptor width
    if (s.model.descriptor_dim_override == 0)
        s.model.descriptor_dim_override = teacher.config.desc_dim();
    const auto images = load_images(dataset);
    std::vector<kpd::LossRecord> history;
    const auto student = kpd::distill(teacher, s.model, images, s.train, &history);
    kpd::save_weights(s.train.checkpoint_path, student);
    kpd::write_loss_csv((fs::path(out) / "distill_loss.csv").string(), history, "kt_mse",
                        "dk_mse", "sobel_mse");
    std::cout << "student checkpoint: " << s.train.checkpoint_path << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& dataset, const std::string& out,
             const std::string& model_name, const kpd::EvalConfig& cfg) {
    const auto weights = kpd::load_weights(checkpoint);
    kpd::EvalResult res;
    if (fs::exists(fs::path(dataset) / "pair_000000.json"))
        res = kpd::evaluate_pairs_dataset(weights, kpd::load_pairs(dataset), cfg);
    else
        res = kpd::evaluate_sequence(weights, kpd::load_sequence(dataset), cfg);
    fs::create_directories(out);
    kpd::write_pair_metrics_csv((fs::path(out) / "pairs.csv").string(), res.per_pair);
    kpd::write_aggregate_csv((fs::path(out) / "aggregate.csv").string(),
                             {{model_name, res.precision, res.repeatability}});
    std::cout << model_name << ": precision " << res.precision << " repeatability "
              << res.repeatability << " harmonic mean " << res.harmonic_mean << "\n";
    return 0;
}

int cmd_report(const std::string& in, const std::string& out) {
    const auto rows = kpd::read_aggregate_csv(in);
    const std::string md = kpd::render_markdown_report(rows);
    if (out.empty()) {
        std::cout << md;
    } else {
        std::ofstream os(out);
        if (!os) throw std::runtime_error("cannot write " + out);
        os << md;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"keypoint detector/descriptor distillation toolkit"};
    app.require_subcommand(1);

    std::string out, config, dataset, checkpoint, teacher, model_name = "model";
    std::string depth_kind = "planar_z", report_in, report_out;
    uint64_t seed = 0;
    int count = 32, frames = 8, width = 128, height = 128;
    double lighting = 1.0;
    kpd::EvalConfig ecfg;

    auto* gs = app.add_subcommand("gen-shapes", "generate a homography-pair shapes dataset");
    gs->add_option("--out", out)->required();
    gs->add_option("--seed", seed);
    gs->add_option("--count", count);
    gs->add_option("--width", width);
    gs->add_option("--height", height);

    auto* gc = app.add_subcommand("gen-scene", "render a 3D scene sequence with depth and poses");
    gc->add_option("--out", out)->required();
    gc->add_option("--seed", seed);
    gc->add_option("--frames", frames);
    gc->add_option("--width", width);
    gc->add_option("--height", height);
    gc->add_option("--depth-kind", depth_kind, "planar_z or ray_distance");
    gc->add_option("--lighting", lighting, "brightness multiplier for all frames");

    auto* tt = app.add_subcommand("train-teacher", "train a teacher on a pairs dataset");
    tt->add_option("--config", config)->required();
    tt->add_option("--dataset", dataset)->required();
    tt->add_option("--out", out)->required();

    auto* di = app.add_subcommand("distill", "distill a teacher checkpoint into a student");
    di->add_option("--config", config)->required();
    di->add_option("--teacher", teacher)->required();
    di->add_option("--dataset", dataset)->required();
    di->add_option("--out", out)->required();

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    ev->add_option("--checkpoint", checkpoint)->required();
    ev->add_option("--dataset", dataset)->required();
    ev->add_option("--out", out)->required();
    ev->add_option("--model-name", model_name);
    ev->add_option("--threshold-px", ecfg.threshold_px);
    ev->add_option("--mutual", ecfg.mutual);
    ev->add_option("--occlusion", ecfg.occlusion);
    ev->add_option("--score-threshold", ecfg.score_threshold);
    ev->add_option("--nms-radius", ecfg.nms_radius);
    ev->add_option("--max-points", ecfg.max_points);
    ev->add_flag("--random-descriptors", ecfg.random_descriptors,
                 "replace descriptors with a seeded random baseline");
    ev->add_option("--seed", ecfg.rng_seed);

    auto* rp = app.add_subcommand("report", "render aggregate CSV as Markdown tables");
    rp->add_option("--in", report_in)->required();
    rp->add_option("--out", report_out, "output file, stdout when omitted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gs->parsed()) return cmd_gen_shapes(out, seed, count, width, height);
        if (gc->parsed())
            return cmd_gen_scene(out, seed, frames, width, height, depth_kind, lighting);
        if (tt->parsed()) return cmd_train_teacher(config, dataset, out);
        if (di->parsed()) return cmd_distill(config, teacher, dataset, out);
        if (ev->parsed()) return cmd_eval(checkpoint, dataset, out, model_name, ecfg);
        if (rp->parsed()) return cmd_report(report_in, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
