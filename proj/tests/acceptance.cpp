// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fail. argv[1] must point at the kpd CLI binary.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "kpd/eval.hpp"
#include "kpd/gradcheck.hpp"
#include "kpd/losses.hpp"
#include "kpd/metrics.hpp"
#include "kpd/scene.hpp"
#include "kpd/shapes.hpp"
#include "kpd/train.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using kpd::ModelConfig;
using kpd::Tape;
using kpd::TensorD;
using kpd::TensorF;
using kpd::Var;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": " << what
              << std::endl;
    if (!pass) ++g_failures;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

// ---------------------------------------------------------------- criterion 1

void criterion1() {
    bool ok = true;
    ok &= round2(kpd::f1(0.61, 0.55)) == 0.58;
    ok &= round2(kpd::f1(0.65, 0.51)) == 0.57;
    ok &= round2(kpd::f1(0.16, 1.0)) == 0.28;
    ok &= round2((0.61 + 0.55) / 2) == 0.58;
    ok &= round2((0.65 + 0.51) / 2) == 0.58;
    ok &= round2((0.16 + 1.0) / 2) == 0.58;
    report(1, ok, "reference harmonic/arithmetic mean values reproduce exactly");
}

// ---------------------------------------------------------------- criterion 2

void criterion2() {
    ModelConfig full = ModelConfig::superpoint();
    ModelConfig half = full;
    half.width_multiplier = 0.5;
    const double ratio = static_cast<double>(kpd::param_count(half)) /
                         static_cast<double>(kpd::param_count(full));
    std::ostringstream os;
    os << "half-width/full parameter ratio " << ratio << " in [0.20, 0.27]";
    report(2, ratio >= 0.20 && ratio <= 0.27, os.str());
}

// ---------------------------------------------------------------- criterion 3

void criterion3() {
    const ModelConfig cfg = ModelConfig::toy();
    const auto weights = kpd::init_weights(cfg, 23);
    std::mt19937_64 rng(13);
    const auto img_a = oracle::random_tensor<float>(rng, 1, 1, 32, 32, 0, 1);
    const auto img_b = oracle::random_tensor<float>(rng, 1, 1, 32, 32, 0, 1);
    const auto [det_a, desc_a] = kpd::forward(weights, img_a);
    const auto [det_b, desc_b] = kpd::forward(weights, img_b);

    std::vector<int> labels;
    for (int i = 0; i < 16; ++i) labels.push_back(static_cast<int>(rng() % 65));
    const std::vector<std::pair<int, int>> matches = {{0, 0}, {5, 6}, {10, 9}, {15, 15}};

    bool ok = true;
    std::ostringstream note;

    auto run = [&](const char* name, const kpd::ScalarFn& f, std::vector<TensorD> inputs) {
        const auto rep = kpd::grad_check(f, std::move(inputs), 1e-5, 1e-4);
        if (!rep.pass) {
            ok = false;
            note << " [" << name << " max_rel_err=" << rep.max_rel_err << " " << rep.note << "]";
        }
    };

    run("detector_loss",
        [&](Tape<double>& t, const std::vector<Var<double>>& in) {
            return kpd::detector_loss(t, in[0], labels);
        },
        {det_a.cast<double>()});

    run("descriptor_loss",
        [&](Tape<double>& t, const std::vector<Var<double>>& in) {
            std::mt19937_64 r(17);
            return kpd::descriptor_loss(t, in[0], in[1], matches, r);
        },
        {desc_a.cast<double>(), desc_b.cast<double>()});

    for (bool use_sobel : {false, true})
        run(use_sobel ? "distill_loss+sobel" : "distill_loss",
            [&, use_sobel](Tape<double>& t, const std::vector<Var<double>>& in) {
                return kpd::distill_loss(t, t.constant(det_b.cast<double>()),
                                         t.constant(desc_b.cast<double>()), in[0], in[1],
                                         use_sobel);
            },
            {det_a.cast<double>(), desc_a.cast<double>()});

    // composed check through the network for a subset of weight tensors
    {
        std::vector<TensorD> inputs;
        std::vector<std::string> picked = {"enc1a.w", "enc3b.b", "detB.b", "descB.b"};
        for (const auto& name : picked) inputs.push_back(weights.find(name).cast<double>());
        run("through-model",
            [&](Tape<double>& t, const std::vector<Var<double>>& in) {
                kpd::ModelVars<double> mv;
                mv.config = cfg;
                for (const auto& [name, tensor] : weights.params) {
                    const auto it = std::find(picked.begin(), picked.end(), name);
                    if (it != picked.end())
                        mv.params.emplace_back(name, in[static_cast<size_t>(it - picked.begin())]);
                    else
                        mv.params.emplace_back(name, t.constant(tensor.cast<double>()));
                }
                auto out_a = kpd::forward_diff(t, mv, t.constant(img_a.cast<double>()));
                auto out_b = kpd::forward_diff(t, mv, t.constant(img_b.cast<double>()));
                auto lp = t.add(kpd::detector_loss(t, out_a.det, labels),
                                kpd::detector_loss(t, out_b.det, labels));
                std::mt19937_64 r(19);
                auto ld = kpd::descriptor_loss(t, out_a.desc, out_b.desc, matches, r);
                return t.add(lp, t.scale(ld, 0.1));
            },
            std::move(inputs));
    }

    report(3, ok, "all losses pass 64-bit finite-difference gradient checks (tol 1e-4)" +
                      note.str());
}

// ---------------------------------------------------------------- criterion 4

std::vector<TensorF> fixed_images(uint64_t seed, int count, int size) {
    const auto pairs = kpd::gen_shapes(seed, (count + 1) / 2, size, size);
    std::vector<TensorF> images;
    for (const auto& p : pairs) {
        images.push_back(p.image_a);
        images.push_back(p.image_b);
    }
    images.resize(static_cast<size_t>(count), images.back());
    return images;
}

void criterion4() {
    const ModelConfig cfg = ModelConfig::toy();
    const auto teacher = kpd::init_weights(cfg, 42);
    const auto images = fixed_images(7, 32, 32);

    kpd::TrainConfig tc;
    tc.steps = 2000;
    tc.batch = 4;
    tc.seed = 99;
    tc.adam.lr = 2e-3f;

    std::vector<kpd::LossRecord> same_hist;
    kpd::distill(teacher, cfg, images, tc, &same_hist);
    double tail = 0;
    for (size_t i = same_hist.size() - 10; i < same_hist.size(); ++i) tail += same_hist[i].total;
    tail /= 10.0;
    const double initial = same_hist.front().total;
    const bool same_ok = tail < 0.1 * initial;

    ModelConfig half = cfg;
    half.width_multiplier = 0.5;
    half.descriptor_dim_override = cfg.desc_dim();
    std::vector<kpd::LossRecord> half_hist;
    kpd::distill(teacher, half, images, tc, &half_hist);
    bool half_positive = true;
    for (const auto& r : half_hist) half_positive &= r.total > 0.0;

    std::ostringstream os;
    os << "identical-architecture distill loss " << initial << " -> " << tail
       << " (<10% required); half-width loss stays positive at all " << half_hist.size()
       << " steps";
    report(4, same_ok && half_positive, os.str());
}

// ---------------------------------------------------------------- criterion 5

void criterion5() {
    // train a toy teacher on shapes pairs
    const auto pairs = kpd::gen_shapes(3, 24, 64, 64);
    kpd::TrainConfig tc;
    tc.steps = 600;
    tc.batch = 4;
    tc.seed = 7;
    tc.lambda_d = 1.0f;
    const auto teacher = kpd::train_teacher(ModelConfig::toy(), pairs, tc, nullptr);

    // distill a half-width student on the same images
    std::vector<TensorF> images;
    for (const auto& p : pairs) {
        images.push_back(p.image_a);
        images.push_back(p.image_b);
    }
    ModelConfig half = ModelConfig::toy();
    half.width_multiplier = 0.5;
    half.descriptor_dim_override = teacher.config.desc_dim();
    kpd::TrainConfig dc;
    dc.steps = 1500;
    dc.batch = 4;
    dc.seed = 8;
    dc.adam.lr = 2e-3f;
    const auto student = kpd::distill(teacher, half, images, dc, nullptr);

    // evaluate on a rendered 3D sequence
    const auto frames = kpd::gen_scene(kpd::default_scene(5, 6, 64, 64));
    kpd::EvalConfig ec;
    ec.score_threshold = 0.02f;
    ec.nms_radius = 4;
    ec.max_points = 200;

    const auto t_res = kpd::evaluate_sequence(teacher, frames, ec);
    const auto s_res = kpd::evaluate_sequence(student, frames, ec);
    kpd::EvalConfig bc = ec;
    bc.random_descriptors = true;
    bc.rng_seed = 123;
    const auto b_res = kpd::evaluate_sequence(teacher, frames, bc);

    const bool close = std::fabs(t_res.precision - s_res.precision) <= 0.08;
    const bool beats = t_res.precision >= b_res.precision + 0.2 &&
                       s_res.precision >= b_res.precision + 0.2;
    std::ostringstream os;
    os << "precision teacher " << t_res.precision << ", student " << s_res.precision
       << " (|diff| <= 0.08), random baseline " << b_res.precision << " (+0.2 margin)";
    report(5, close && beats, os.str());
}

// ---------------------------------------------------------------- criterion 6

kpd::CameraFrame flat_frame(int W, int H, float depth, const kpd::Mat3& R, const kpd::Vec3& t) {
    kpd::CameraFrame f;
    f.image.width = W;
    f.image.height = H;
    f.image.pixels.assign(static_cast<size_t>(W) * H, 100);
    f.depth.assign(static_cast<size_t>(W) * H, depth);
    f.intrinsics = kpd::default_intrinsics(W, H);
    f.rotation = R;
    f.translation = t;
    return f;
}

void criterion6() {
    bool ok = true;
    std::ostringstream note;
    const auto K = kpd::default_intrinsics(640, 480);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> du(0, 639), dv(0, 479), dz(0.1, 30.0);

    double worst_proj = 0, worst_ray = 0;
    for (int i = 0; i < 200; ++i) {
        const double u = du(rng), v = dv(rng), z = dz(rng);
        const auto q = kpd::project(kpd::unproject(u, v, z, K), K);
        worst_proj = std::max({worst_proj, std::fabs(q[0] - u), std::fabs(q[1] - v)});
        const double a = (u - K.cx) / K.fx, b = (v - K.cy) / K.fy;
        const double r = z * std::sqrt(1 + a * a + b * b);
        worst_ray = std::max(worst_ray, std::fabs(kpd::ray_distance_to_z(r, u, v, K) - z));
    }
    if (worst_proj > 1e-9) {
        ok = false;
        note << " [project/unproject " << worst_proj << "]";
    }
    if (worst_ray > 1e-9) {
        ok = false;
        note << " [ray conversion " << worst_ray << "]";
    }

    // identity-pose reprojection
    const auto f = flat_frame(64, 48, 4.f, kpd::Mat3::identity(), {});
    double worst_id = 0;
    const auto cs = kpd::reproject(f, f, {{3, 3}, {30.5, 20.25}, {60, 40}});
    for (const auto& c : cs)
        worst_id = std::max({worst_id, std::fabs(c.xp - c.x), std::fabs(c.yp - c.y)});
    if (worst_id > 1e-6) {
        ok = false;
        note << " [identity reprojection " << worst_id << "]";
    }

    // plane reprojection vs the induced homography
    const double d = 6.0, ang = 0.25;
    const kpd::Mat3 Rj{{std::cos(ang), -std::sin(ang), 0, std::sin(ang), std::cos(ang), 0, 0, 0, 1}};
    const kpd::Vec3 tj{0.7, -0.3, 0.0};
    const auto fi = flat_frame(64, 48, static_cast<float>(d), kpd::Mat3::identity(), {});
    const auto fj = flat_frame(64, 48, static_cast<float>(d), Rj, tj);
    const kpd::Mat3 Rrel = Rj.transpose();
    const kpd::Vec3 trel = Rrel * (kpd::Vec3{} - tj);
    kpd::Mat3 A = Rrel;
    A.m[2] += trel.x / d;
    A.m[5] += trel.y / d;
    A.m[8] += trel.z / d;
    const auto& k = fi.intrinsics;
    const kpd::Mat3 Kinv{{1 / k.fx, 0, -k.cx / k.fx, 0, 1 / k.fy, -k.cy / k.fy, 0, 0, 1}};
    const kpd::Mat3 Hm = k.K() * A * Kinv;
    std::array<double, 9> h;
    std::copy(Hm.m.begin(), Hm.m.end(), h.begin());

    double worst_plane = 0;
    int checked = 0;
    std::uniform_real_distribution<double> px(0, 63), py(0, 47);
    for (int i = 0; i < 300; ++i) {
        const std::array<double, 2> p{px(rng), py(rng)};
        const auto c = kpd::reproject(fi, fj, {p})[0];
        if (!c.valid()) continue;
        const auto q = kpd::warp_homography_point(h, p[0], p[1]);
        worst_plane = std::max({worst_plane, std::fabs(c.xp - q[0]), std::fabs(c.yp - q[1])});
        ++checked;
    }
    if (worst_plane > 1e-3 || checked < 50) {
        ok = false;
        note << " [plane vs homography " << worst_plane << " over " << checked << " points]";
    }

    report(6, ok, "geometry identities hold at their tolerances" + note.str());
}

// ---------------------------------------------------------------- criterion 7

double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-12});
}

void criterion7() {
    std::mt19937_64 rng(31);
    bool ok = true;
    std::ostringstream note;
    auto fail = [&](const char* op, int trial) {
        ok = false;
        note << " [" << op << " trial " << trial << "]";
    };

    for (int trial = 0; trial < 100; ++trial) {
        const int ic = 1 + static_cast<int>(rng() % 3);
        const int oc = 1 + static_cast<int>(rng() % 3);
        const int hw = 4 + 2 * static_cast<int>(rng() % 3);
        const auto x = oracle::random_tensor<double>(rng, 1, ic, hw, hw);
        const auto w = oracle::random_tensor<double>(rng, oc, ic, 3, 3);
        const auto b = oracle::random_tensor<double>(rng, 1, 1, 1, oc);

        Tape<double> t;
        const auto conv = t.conv2d(t.constant(x), t.constant(w), t.constant(b), 1, 1)->value;
        std::vector<double> bias(b.data.begin(), b.data.end());
        const auto ref = oracle::conv2d(x, w, bias, 1, 1);
        for (int64_t i = 0; i < ref.size(); ++i)
            if (rel_err(conv.data[static_cast<size_t>(i)], ref.data[static_cast<size_t>(i)]) > 1e-6) {
                fail("conv2d", trial);
                break;
            }

        const auto mp = t.maxpool2(t.constant(x))->value;
        const auto mpref = oracle::maxpool2(x);
        if (mp.data != mpref.data) fail("maxpool2", trial);

        const auto y = oracle::random_tensor<double>(rng, 1, ic, hw, hw);
        const double m = t.mse(t.constant(x), t.constant(y))->value.data[0];
        if (rel_err(m, oracle::mse(x, y)) > 1e-6) fail("mse", trial);

        const auto sin = oracle::random_tensor<double>(rng, 1, 2 + static_cast<int>(rng() % 3), hw, hw);
        const auto sm = t.softmax_channels(t.constant(sin))->value;
        for (int yy = 0; yy < hw && ok; ++yy)
            for (int xx = 0; xx < hw; ++xx) {
                double mx = -1e30, sum = 0;
                for (int c = 0; c < sin.c(); ++c) mx = std::max(mx, sin.at(0, c, yy, xx));
                for (int c = 0; c < sin.c(); ++c) sum += std::exp(sin.at(0, c, yy, xx) - mx);
                for (int c = 0; c < sin.c(); ++c) {
                    const double refv = std::exp(sin.at(0, c, yy, xx) - mx) / sum;
                    if (rel_err(sm.at(0, c, yy, xx), refv) > 1e-6) {
                        fail("softmax_channels", trial);
                        yy = hw;
                        break;
                    }
                }
            }

        const auto sb = t.sobel(t.constant(x))->value;
        const auto sbref = oracle::sobel(x);
        for (int64_t i = 0; i < sbref.size(); ++i) {
            const double a = sb.data[static_cast<size_t>(i)], r = sbref.data[static_cast<size_t>(i)];
            if (std::fabs(a - r) > 1e-6 * std::max(1.0, std::max(std::fabs(a), std::fabs(r)))) {
                fail("sobel", trial);
                break;
            }
        }
    }

    // matching and metric oracles, exact
    std::normal_distribution<float> g(0.f, 1.f);
    auto rand_descs = [&](int n, int dim) {
        std::vector<std::vector<float>> out;
        for (int i = 0; i < n; ++i) {
            std::vector<float> v(static_cast<size_t>(dim));
            double n2 = 0;
            for (auto& x : v) {
                x = g(rng);
                n2 += static_cast<double>(x) * x;
            }
            for (auto& x : v) x = static_cast<float>(x / std::sqrt(n2));
            out.push_back(std::move(v));
        }
        return out;
    };
    auto cosv = [](const std::vector<float>& a, const std::vector<float>& b) {
        double s = 0;
        for (size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
        return s;
    };

    for (int trial = 0; trial < 100; ++trial) {
        const int na = 2 + static_cast<int>(rng() % 20), nb = 2 + static_cast<int>(rng() % 20);
        const auto da = rand_descs(na, 6), db = rand_descs(nb, 6);
        const bool mutual = trial % 2 == 0;
        const auto ms = kpd::match_descriptors(da, db, mutual);
        std::vector<std::pair<int, int>> ref;
        for (int i = 0; i < na; ++i) {
            int bj = 0;
            for (int j = 1; j < nb; ++j)
                if (cosv(da[static_cast<size_t>(i)], db[static_cast<size_t>(j)]) >
                    cosv(da[static_cast<size_t>(i)], db[static_cast<size_t>(bj)]))
                    bj = j;
            if (mutual) {
                int bi = 0;
                for (int k = 1; k < na; ++k)
                    if (cosv(db[static_cast<size_t>(bj)], da[static_cast<size_t>(k)]) >
                        cosv(db[static_cast<size_t>(bj)], da[static_cast<size_t>(bi)]))
                        bi = k;
                if (bi != i) continue;
            }
            ref.emplace_back(i, bj);
        }
        if (ms.pairs.size() != ref.size()) {
            fail("match_descriptors", trial);
            continue;
        }
        for (size_t i = 0; i < ref.size(); ++i)
            if (std::get<0>(ms.pairs[i]) != ref[i].first ||
                std::get<1>(ms.pairs[i]) != ref[i].second) {
                fail("match_descriptors", trial);
                break;
            }
    }

    std::uniform_real_distribution<double> pos(0, 80);
    for (int trial = 0; trial < 100; ++trial) {
        const int na = 3 + static_cast<int>(rng() % 20), nb = 3 + static_cast<int>(rng() % 20);
        std::vector<std::array<float, 2>> pa, pb;
        for (int i = 0; i < na; ++i) pa.push_back({static_cast<float>(pos(rng)), static_cast<float>(pos(rng))});
        for (int i = 0; i < nb; ++i) pb.push_back({static_cast<float>(pos(rng)), static_cast<float>(pos(rng))});
        std::vector<kpd::Correspondence> cab, cba;
        for (int i = 0; i < na; ++i) {
            kpd::Correspondence c;
            c.x = pa[static_cast<size_t>(i)][0];
            c.y = pa[static_cast<size_t>(i)][1];
            c.xp = pos(rng);
            c.yp = pos(rng);
            c.status = rng() % 5 ? kpd::ReprojStatus::ok : kpd::ReprojStatus::occluded;
            cab.push_back(c);
        }
        for (int i = 0; i < nb; ++i) {
            kpd::Correspondence c;
            c.x = pb[static_cast<size_t>(i)][0];
            c.y = pb[static_cast<size_t>(i)][1];
            c.xp = pos(rng);
            c.yp = pos(rng);
            c.status = rng() % 5 ? kpd::ReprojStatus::ok : kpd::ReprojStatus::occluded;
            cba.push_back(c);
        }
        kpd::MatchSet m;
        for (int i = 0; i < na; ++i)
            if (rng() % 2) m.pairs.emplace_back(i, static_cast<int>(rng() % nb), 0.5);
        const double thr = 15.0;

        const auto pr = kpd::precision(m, pb, cab, thr);
        int tp = 0, fp = 0;
        for (const auto& [ia, ib, s] : m.pairs) {
            if (!cab[static_cast<size_t>(ia)].valid()) continue;
            const double dd = std::hypot(cab[static_cast<size_t>(ia)].xp - pb[static_cast<size_t>(ib)][0],
                                         cab[static_cast<size_t>(ia)].yp - pb[static_cast<size_t>(ib)][1]);
            (dd <= thr ? tp : fp)++;
        }
        if (pr.tp != tp || pr.fp != fp) fail("precision", trial);

        const auto rep = kpd::repeatability(pa, pb, cab, cba, thr);
        auto directed = [&](const std::vector<kpd::Correspondence>& src,
                            const std::vector<std::array<float, 2>>& tgt,
                            const std::vector<kpd::Correspondence>& tv) {
            struct C {
                double d;
                size_t i, j;
            };
            std::vector<C> cs;
            int denom = 0;
            for (size_t j = 0; j < tgt.size(); ++j)
                if (tv[j].valid()) ++denom;
            for (size_t i = 0; i < src.size(); ++i) {
                if (!src[i].valid()) continue;
                for (size_t j = 0; j < tgt.size(); ++j) {
                    if (!tv[j].valid()) continue;
                    const double dd = std::hypot(src[i].xp - tgt[j][0], src[i].yp - tgt[j][1]);
                    if (dd <= thr) cs.push_back({dd, i, j});
                }
            }
            std::sort(cs.begin(), cs.end(), [](const C& a, const C& b) {
                if (a.d != b.d) return a.d < b.d;
                if (a.i != b.i) return a.i < b.i;
                return a.j < b.j;
            });
            std::vector<bool> ui(src.size()), uj(tgt.size());
            int hits = 0;
            for (const auto& c : cs) {
                if (ui[c.i] || uj[c.j]) continue;
                ui[c.i] = uj[c.j] = true;
                ++hits;
            }
            return denom == 0 ? 0.0 : static_cast<double>(hits) / denom;
        };
        if (std::fabs(rep.r_ab - directed(cab, pb, cba)) > 1e-12 ||
            std::fabs(rep.r_ba - directed(cba, pa, cab)) > 1e-12)
            fail("repeatability", trial);
    }

    report(7, ok, "core operations agree with brute-force oracles on 100+ random instances" +
                      note.str());
}

// ---------------------------------------------------------------- criterion 8

int run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

bool same_file_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

bool same_dir_bytes(const fs::path& a, const fs::path& b, std::string* diff) {
    size_t count = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        ++count;
        const auto rel = fs::relative(entry.path(), a);
        if (!same_file_bytes(entry.path(), b / rel)) {
            *diff = rel.string();
            return false;
        }
    }
    if (count == 0) {
        *diff = "(no files)";
        return false;
    }
    return true;
}

void criterion8(const std::string& cli) {
    const fs::path root = fs::temp_directory_path() / "kpd_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);

    const std::string cfg_path = (root / "train.json").string();
    {
        std::ofstream os(cfg_path);
        os << "{\"preset\":\"toy\",\"steps\":3,\"batch\":2,\"seed\":5}\n";
    }
    const std::string dcfg_path = (root / "distill.json").string();
    {
        std::ofstream os(dcfg_path);
        os << "{\"preset\":\"toy\",\"width_multiplier\":0.5,\"steps\":3,\"batch\":2,\"seed\":6}\n";
    }

    bool ok = true;
    std::ostringstream note;
    auto twice = [&](const char* name, const std::string& args_template) {
        for (const char* run : {"r1", "r2"}) {
            std::string args = args_template;
            const std::string tag = "{OUT}";
            for (size_t p = args.find(tag); p != std::string::npos; p = args.find(tag))
                args.replace(p, tag.size(), (root / (std::string(name) + "_" + run)).string());
            if (run_cli(cli, args) != 0) {
                ok = false;
                note << " [" << name << " exited nonzero]";
                return;
            }
        }
        std::string diff;
        if (!same_dir_bytes(root / (std::string(name) + "_r1"), root / (std::string(name) + "_r2"),
                            &diff)) {
            ok = false;
            note << " [" << name << " differs at " << diff << "]";
        }
    };

    twice("shapes", "gen-shapes --out {OUT} --seed 4 --count 2 --width 32 --height 32");
    twice("scene", "gen-scene --out {OUT} --seed 4 --frames 2 --width 48 --height 48");
    const std::string shapes_dir = (root / "shapes_r1").string();
    const std::string scene_dir = (root / "scene_r1").string();
    twice("teacher", "train-teacher --config " + cfg_path + " --dataset " + shapes_dir +
                         " --out {OUT}");
    const std::string teacher_ckpt = (root / "teacher_r1" / "teacher.ckpt").string();
    twice("student", "distill --config " + dcfg_path + " --teacher " + teacher_ckpt +
                         " --dataset " + shapes_dir + " --out {OUT}");
    twice("eval", "eval --checkpoint " + teacher_ckpt + " --dataset " + scene_dir +
                      " --out {OUT} --model-name teacher");
    const std::string agg = (root / "eval_r1" / "aggregate.csv").string();
    for (const char* run : {"r1", "r2"}) {
        fs::create_directories(root / (std::string("report_") + run));
        if (run_cli(cli, "report --in " + agg + " --out " +
                             (root / (std::string("report_") + run) / "report.md").string()) != 0) {
            ok = false;
            note << " [report exited nonzero]";
        }
    }
    std::string diff;
    if (ok && !same_dir_bytes(root / "report_r1", root / "report_r2", &diff)) {
        ok = false;
        note << " [report differs at " << diff << "]";
    }

    report(8, ok, "all CLI subcommands are byte-deterministic across reruns" + note.str());
    fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-kpd-cli>\n";
        return 2;
    }
    const int only = argc > 2 ? std::atoi(argv[2]) : 0;
    auto want = [&](int n) { return only == 0 || only == n; };
    if (want(1)) criterion1();
    if (want(2)) criterion2();
    if (want(3)) criterion3();
    if (want(4)) criterion4();
    if (want(5)) criterion5();
    if (want(6)) criterion6();
    if (want(7)) criterion7();
    if (want(8)) criterion8(argv[1]);
    if (g_failures > 0) {
        std::cout << g_failures << " criteria failed" << std::endl;
        return 1;
    }
    std::cout << "all criteria passed" << std::endl;
    return 0;
}
