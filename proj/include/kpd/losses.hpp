#pragma once

#include <random>
#include <utility>
#include <vector>

#include "kpd/autodiff.hpp"

namespace kpd {

// Mean cross-entropy over cells; labels in {0 .. 64}, 64 = dustbin.
template <typename T>
Var<T> detector_loss(Tape<T>& tape, const Var<T>& det_raw, const std::vector<int>& labels) {
    return tape.cross_entropy_cells(det_raw, labels);
}

namespace detail {

template <typename T>
struct CellView {
    const Tensor<T>* t;
    int D, wc;
    T get(int cell, int d) const { return t->at(0, d, cell / wc, cell % wc); }
};

template <typename T>
T cell_cos(const CellView<T>& a, int ia, const CellView<T>& b, int ib) {
    T dot = 0, na = 0, nb = 0;
    for (int d = 0; d < a.D; ++d) {
        const T x = a.get(ia, d), y = b.get(ib, d);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    const T denom = std::sqrt(na) * std::sqrt(nb) + T(1e-12);
    return dot / denom;
}

// d cos(u, v)/du = v/(|u||v|) - cos * u/|u|^2, accumulated with weight g.
template <typename T>
void accum_cos_grad(const Tensor<T>& av, Tensor<T>* agrad, int ia, const Tensor<T>& bv,
                    Tensor<T>* bgrad, int ib, T g) {
    const int D = av.c(), wca = av.w(), wcb = bv.w();
    const int ay = ia / wca, ax = ia % wca, by = ib / wcb, bx = ib % wcb;
    T dot = 0, na2 = 0, nb2 = 0;
    for (int d = 0; d < D; ++d) {
        const T x = av.at(0, d, ay, ax), y = bv.at(0, d, by, bx);
        dot += x * y;
        na2 += x * x;
        nb2 += y * y;
    }
    const T na = std::sqrt(na2) + T(1e-12), nb = std::sqrt(nb2) + T(1e-12);
    const T c = dot / (na * nb);
    for (int d = 0; d < D; ++d) {
        const T x = av.at(0, d, ay, ax), y = bv.at(0, d, by, bx);
        if (agrad) agrad->at(0, d, ay, ax) += g * (y / (na * nb) - c * x / (na * na));
        if (bgrad) bgrad->at(0, d, by, bx) += g * (x / (na * nb) - c * y / (nb * nb));
    }
}

}  // namespace detail

// Descriptor loss over per-cell vectors of two descriptor maps:
//   expected matches:   mean(1 - cos)
//   hardest negatives:  mean(cos) with the highest-cosine non-matching cell
//   random pairs:       mean(cos when cos > 0.2 else 0), one pair per match
// Returns only the random term when matches is empty.
template <typename T>
Var<T> descriptor_loss(Tape<T>& tape, const Var<T>& desc_a, const Var<T>& desc_b,
                       const std::vector<std::pair<int, int>>& matches, std::mt19937_64& rng) {
    const auto& av = desc_a->value;
    const auto& bv = desc_b->value;
    if (av.c() != bv.c())
        throw std::invalid_argument("descriptor_loss: descriptor dim mismatch " + av.shape_str() +
                                    " vs " + bv.shape_str());
    const int cells_a = av.h() * av.w(), cells_b = bv.h() * bv.w();
    for (const auto& [i, j] : matches)
        if (i < 0 || i >= cells_a || j < 0 || j >= cells_b)
            throw std::invalid_argument("descriptor_loss: match index out of range");

    detail::CellView<T> va{&av, av.c(), av.w()};
    detail::CellView<T> vb{&bv, bv.c(), bv.w()};

    // hardest negative per match; selection is constant in the backward pass
    auto negatives = std::make_shared<std::vector<std::pair<int, int>>>();
    for (const auto& [i, j] : matches) {
        int best = -1;
        T best_cos = -2;
        for (int k = 0; k < cells_b; ++k) {
            if (k == j) continue;
            const T c = detail::cell_cos(va, i, vb, k);
            if (c > best_cos) {
                best_cos = c;
                best = k;
            }
        }
        if (best >= 0) negatives->emplace_back(i, best);
    }

    auto randoms = std::make_shared<std::vector<std::pair<int, int>>>();
    std::uniform_int_distribution<int> da(0, cells_a - 1), db(0, cells_b - 1);
    for (size_t k = 0; k < matches.size(); ++k) randoms->emplace_back(da(rng), db(rng));

    T d_true = 0, d_wrong = 0, d_rand = 0;
    for (const auto& [i, j] : matches) d_true += T(1) - detail::cell_cos(va, i, vb, j);
    if (!matches.empty()) d_true /= static_cast<T>(matches.size());
    for (const auto& [i, j] : *negatives) d_wrong += detail::cell_cos(va, i, vb, j);
    if (!negatives->empty()) d_wrong /= static_cast<T>(negatives->size());
    auto gated = std::make_shared<std::vector<uint8_t>>();
    for (const auto& [i, j] : *randoms) {
        const T c = detail::cell_cos(va, i, vb, j);
        const bool on = c > T(0.2);
        gated->push_back(on ? 1 : 0);
        if (on) d_rand += c;
    }
    if (!randoms->empty()) d_rand /= static_cast<T>(randoms->size());

    auto out = tape.make(Tensor<T>::scalar(d_true + d_wrong + d_rand),
                         desc_a->requires_grad || desc_b->requires_grad);
    if (out->requires_grad) {
        auto match_copy = std::make_shared<std::vector<std::pair<int, int>>>(matches);
        tape.record([desc_a, desc_b, out, match_copy, negatives, randoms, gated] {
            const T g = out->grad.data[0];
            Tensor<T>* ga = nullptr;
            Tensor<T>* gb = nullptr;
            if (desc_a->requires_grad) {
                desc_a->ensure_grad();
                ga = &desc_a->grad;
            }
            if (desc_b->requires_grad) {
                desc_b->ensure_grad();
                gb = &desc_b->grad;
            }
            if (!match_copy->empty()) {
                const T w = -g / static_cast<T>(match_copy->size());  // d(1-cos) = -dcos
                for (const auto& [i, j] : *match_copy)
                    detail::accum_cos_grad(desc_a->value, ga, i, desc_b->value, gb, j, w);
            }
            if (!negatives->empty()) {
                const T w = g / static_cast<T>(negatives->size());
                for (const auto& [i, j] : *negatives)
                    detail::accum_cos_grad(desc_a->value, ga, i, desc_b->value, gb, j, w);
            }
            if (!randoms->empty()) {
                const T w = g / static_cast<T>(randoms->size());
                for (size_t k = 0; k < randoms->size(); ++k)
                    if ((*gated)[k])
                        detail::accum_cos_grad(desc_a->value, ga, (*randoms)[k].first,
                                               desc_b->value, gb, (*randoms)[k].second, w);
            }
        });
    }
    return out;
}

// mse(kt_v, kt_t) + mse(dk_v, dk_t) [+ mse(sobel(kt_v), sobel(kt_t))].
// Teacher outputs must be constants; no gradient flows back to the teacher.
template <typename T>
Var<T> distill_loss(Tape<T>& tape, const Var<T>& kt_teacher, const Var<T>& dk_teacher,
                    const Var<T>& kt_student, const Var<T>& dk_student, bool use_gradient_term) {
    auto loss = tape.add(tape.mse(kt_student, kt_teacher), tape.mse(dk_student, dk_teacher));
    if (use_gradient_term)
        loss = tape.add(loss, tape.mse(tape.sobel(kt_student), tape.sobel(kt_teacher)));
    return loss;
}

}  // namespace kpd
