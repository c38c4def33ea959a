#include "kpd/train.hpp"

#include <cmath>
#include <random>

#include "kpd/checkpoint.hpp"
#include "kpd/losses.hpp"

namespace kpd {

namespace {

TensorF concat_batch(const std::vector<const TensorF*>& images) {
    const auto& first = *images.front();
    TensorF out(static_cast<int>(images.size()), first.c(), first.h(), first.w());
    int64_t off = 0;
    for (const auto* img : images) {
        if (img->shape[1] != first.shape[1] || img->shape[2] != first.shape[2] ||
            img->shape[3] != first.shape[3])
            throw std::invalid_argument("batch images must share a shape");
        std::copy(img->data.begin(), img->data.end(), out.data.begin() + off);
        off += img->size();
    }
    return out;
}

void accumulate_grads(const ModelVars<float>& mv, std::vector<TensorF>& accum) {
    for (size_t i = 0; i < mv.params.size(); ++i) {
        const auto& g = mv.params[i].second->grad;
        for (size_t k = 0; k < g.data.size(); ++k) accum[i].data[k] += g.data[k];
    }
}

std::vector<TensorF> zero_like_params(const ModelWeights& w) {
    std::vector<TensorF> out;
    out.reserve(w.params.size());
    for (const auto& [name, t] : w.params)
        out.emplace_back(TensorF::zeros(t.shape[0], t.shape[1], t.shape[2], t.shape[3]));
    return out;
}

void maybe_checkpoint(const TrainConfig& cfg, const ModelWeights& w, int step) {
    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() &&
        (step + 1) % cfg.checkpoint_every == 0)
        save_weights(cfg.checkpoint_path, w);
}

}  // namespace

std::vector<std::pair<int, int>> expected_matches(const HomographyPair& pair, int cell) {
    const int H = pair.image_a.h(), W = pair.image_a.w();
    const int wc = W / cell;
    std::vector<std::pair<int, int>> matches;
    const auto& h = pair.h_ab;
    for (size_t ci = 0; ci < pair.labels_a.size(); ++ci) {
        const int label = pair.labels_a[ci];
        if (label == cell * cell) continue;  // dustbin
        const int cy = static_cast<int>(ci) / wc, cx = static_cast<int>(ci) % wc;
        const double x = cx * cell + label % cell;
        const double y = cy * cell + label / cell;
        const double d = h[6] * x + h[7] * y + h[8];
        if (std::fabs(d) < 1e-12) continue;
        const double xb = (h[0] * x + h[1] * y + h[2]) / d;
        const double yb = (h[3] * x + h[4] * y + h[5]) / d;
        if (xb < 0 || xb >= W || yb < 0 || yb >= H) continue;
        const int tcell = static_cast<int>(yb) / cell * wc + static_cast<int>(xb) / cell;
        matches.emplace_back(static_cast<int>(ci), tcell);
    }
    return matches;
}

ModelWeights train_teacher(const ModelConfig& config, const std::vector<HomographyPair>& dataset,
                           const TrainConfig& cfg, std::vector<LossRecord>* history) {
    if (dataset.empty()) throw std::invalid_argument("train_teacher: empty dataset");
    ModelWeights weights = init_weights(config, cfg.seed);
    AdamState state;
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<size_t> pick(0, dataset.size() - 1);

    std::vector<std::vector<std::pair<int, int>>> matches;
    matches.reserve(dataset.size());
    for (const auto& p : dataset) matches.push_back(expected_matches(p, config.cell));

    for (int step = 0; step < cfg.steps; ++step) {
        auto grads = zero_like_params(weights);
        double lp_sum = 0, ld_sum = 0;
        for (int b = 0; b < cfg.batch; ++b) {
            const size_t idx = pick(rng);
            const auto& pair = dataset[idx];
            Tape<float> tape;
            auto mv = to_vars(tape, weights, true);
            auto out_a = forward_diff(tape, mv, tape.constant(pair.image_a));
            auto out_b = forward_diff(tape, mv, tape.constant(pair.image_b));
            auto lp = tape.add(detector_loss(tape, out_a.det, pair.labels_a),
                               detector_loss(tape, out_b.det, pair.labels_b));
            auto ld = descriptor_loss(tape, out_a.desc, out_b.desc, matches[idx], rng);
            auto loss = tape.add(lp, tape.scale(ld, cfg.lambda_d));
            lp_sum += lp->value.data[0];
            ld_sum += ld->value.data[0];
            if (!std::isfinite(loss->value.data[0]))
                throw std::runtime_error("train_teacher: loss diverged at step " +
                                         std::to_string(step));
            tape.backward(loss);
            accumulate_grads(mv, grads);
        }
        for (auto& g : grads)
            for (auto& v : g.data) v /= static_cast<float>(cfg.batch);
        adam_step(weights, grads, state, cfg.adam);

        if (history) {
            const double lp = lp_sum / cfg.batch, ld = ld_sum / cfg.batch;
            history->push_back({step, lp + cfg.lambda_d * ld, lp, ld, 0.0});
        }
        maybe_checkpoint(cfg, weights, step);
    }
    return weights;
}

ModelWeights distill(const ModelWeights& teacher, const ModelConfig& student_config,
                     const std::vector<TensorF>& images, const TrainConfig& cfg,
                     std::vector<LossRecord>* history) {
    if (images.empty()) throw std::invalid_argument("distill: empty image set");
    if (teacher.config.desc_dim() != student_config.desc_dim())
        throw std::invalid_argument(
            "distill: descriptor head width mismatch, teacher " +
            std::to_string(teacher.config.desc_dim()) + " vs student " +
            std::to_string(student_config.desc_dim()));

    ModelWeights student = init_weights(student_config, cfg.seed);
    AdamState state;
    std::mt19937_64 rng(cfg.seed ^ 0xc2b2ae3d27d4eb4full);
    std::uniform_int_distribution<size_t> pick(0, images.size() - 1);

    for (int step = 0; step < cfg.steps; ++step) {
        std::vector<const TensorF*> batch;
        for (int b = 0; b < cfg.batch; ++b) batch.push_back(&images[pick(rng)]);
        const TensorF batch_images = concat_batch(batch);

        Tape<float> tape;
        auto teacher_vars = to_vars(tape, teacher, false);
        auto student_vars = to_vars(tape, student, true);
        auto input = tape.constant(batch_images);
        auto t_out = forward_diff(tape, teacher_vars, input);
        auto s_out = forward_diff(tape, student_vars, input);

        auto kt_term = tape.mse(s_out.det, t_out.det);
        auto dk_term = tape.mse(s_out.desc, t_out.desc);
        auto loss = tape.add(kt_term, dk_term);
        double grad_term = 0;
        if (cfg.use_sobel) {
            auto g = tape.mse(tape.sobel(s_out.det), tape.sobel(t_out.det));
            grad_term = g->value.data[0];
            loss = tape.add(loss, g);
        }
        if (!std::isfinite(loss->value.data[0]))
            throw std::runtime_error("distill: loss diverged at step " + std::to_string(step));
        tape.backward(loss);

        std::vector<TensorF> grads;
        grads.reserve(student_vars.params.size());
        for (auto& [name, v] : student_vars.params) grads.push_back(v->grad);
        adam_step(student, grads, state, cfg.adam);

        if (history)
            history->push_back({step, loss->value.data[0], kt_term->value.data[0],
                                dk_term->value.data[0], grad_term});
        maybe_checkpoint(cfg, student, step);
    }
    return student;
}

}  // namespace kpd
