#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kpd/checkpoint.hpp"
#include "kpd/eval.hpp"
#include "kpd/geometry.hpp"
#include "kpd/metrics.hpp"
#include "kpd/model.hpp"

namespace py = pybind11;

namespace {

kpd::TensorF array_to_tensor(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
    const auto info = a.request();
    std::array<int, 4> shape{1, 1, 1, 1};
    if (info.ndim < 1 || info.ndim > 4) throw std::invalid_argument("expected 1-4 dims");
    for (py::ssize_t i = 0; i < info.ndim; ++i)
        shape[static_cast<size_t>(4 - info.ndim + i)] = static_cast<int>(info.shape[static_cast<size_t>(i)]);
    kpd::TensorF t(shape[0], shape[1], shape[2], shape[3]);
    std::copy_n(static_cast<const float*>(info.ptr), t.data.size(), t.data.begin());
    return t;
}

py::array_t<float> tensor_to_array(const kpd::TensorF& t) {
    py::array_t<float> a({t.n(), t.c(), t.h(), t.w()});
    std::copy(t.data.begin(), t.data.end(), a.mutable_data());
    return a;
}

py::dict keypoints_to_dict(const kpd::KeypointSet& kps) {
    py::array_t<float> pts({static_cast<py::ssize_t>(kps.points.size()), py::ssize_t(2)});
    auto p = pts.mutable_unchecked<2>();
    for (size_t i = 0; i < kps.points.size(); ++i) {
        p(static_cast<py::ssize_t>(i), 0) = kps.points[i][0];
        p(static_cast<py::ssize_t>(i), 1) = kps.points[i][1];
    }
    py::array_t<float> scores(static_cast<py::ssize_t>(kps.scores.size()));
    std::copy(kps.scores.begin(), kps.scores.end(), scores.mutable_data());
    const py::ssize_t dim =
        kps.descriptors.empty() ? 0 : static_cast<py::ssize_t>(kps.descriptors[0].size());
    py::array_t<float> desc({static_cast<py::ssize_t>(kps.descriptors.size()), dim});
    auto d = desc.mutable_unchecked<2>();
    for (size_t i = 0; i < kps.descriptors.size(); ++i)
        for (py::ssize_t j = 0; j < dim; ++j)
            d(static_cast<py::ssize_t>(i), j) = kps.descriptors[i][static_cast<size_t>(j)];
    py::dict out;
    out["points"] = pts;
    out["scores"] = scores;
    out["descriptors"] = desc;
    return out;
}

}  // namespace

PYBIND11_MODULE(_kpdistill, m) {
    m.doc() = "keypoint detector/descriptor distillation core";

    py::class_<kpd::ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("cell", &kpd::ModelConfig::cell)
        .def_readwrite("width_multiplier", &kpd::ModelConfig::width_multiplier)
        .def_readwrite("head_channels", &kpd::ModelConfig::head_channels)
        .def_readwrite("descriptor_dim", &kpd::ModelConfig::descriptor_dim)
        .def_readwrite("descriptor_dim_override", &kpd::ModelConfig::descriptor_dim_override)
        .def_property(
            "base_channels",
            [](const kpd::ModelConfig& c) {
                return std::vector<int>(c.base_channels.begin(), c.base_channels.end());
            },
            [](kpd::ModelConfig& c, const std::vector<int>& v) {
                if (v.size() != 4) throw std::invalid_argument("base_channels needs 4 entries");
                std::copy(v.begin(), v.end(), c.base_channels.begin());
            })
        .def("desc_dim", &kpd::ModelConfig::desc_dim)
        .def_static("superpoint", &kpd::ModelConfig::superpoint)
        .def_static("toy", &kpd::ModelConfig::toy);

    py::class_<kpd::ModelWeights>(m, "ModelWeights")
        .def_readonly("config", &kpd::ModelWeights::config)
        .def("param_names", [](const kpd::ModelWeights& w) {
            std::vector<std::string> names;
            for (const auto& [n, t] : w.params) names.push_back(n);
            return names;
        });

    m.def("param_count", &kpd::param_count);
    m.def("init_weights", &kpd::init_weights, py::arg("config"), py::arg("seed"));
    m.def("save_weights", &kpd::save_weights);
    m.def("load_weights", &kpd::load_weights);

    m.def(
        "forward",
        [](const kpd::ModelWeights& w, const py::array_t<float>& image) {
            auto [det, desc] = kpd::forward(w, array_to_tensor(image));
            return py::make_tuple(tensor_to_array(det), tensor_to_array(desc));
        },
        py::arg("weights"), py::arg("image"));

    m.def(
        "detect",
        [](const py::array_t<float>& det_raw, float score_threshold, int nms_radius,
           int max_points, int cell) {
            return keypoints_to_dict(kpd::detect(array_to_tensor(det_raw), score_threshold,
                                                 nms_radius, max_points, cell));
        },
        py::arg("det_raw"), py::arg("score_threshold") = 0.015f, py::arg("nms_radius") = 4,
        py::arg("max_points") = 500, py::arg("cell") = 8);

    m.def(
        "sample_descriptors",
        [](const py::array_t<float>& desc_raw,
           const std::vector<std::array<float, 2>>& points, int cell) {
            return kpd::sample_descriptors(array_to_tensor(desc_raw), points, cell);
        },
        py::arg("desc_raw"), py::arg("points"), py::arg("cell") = 8);

    m.def(
        "detect_and_describe",
        [](const kpd::ModelWeights& w, const py::array_t<float>& image) {
            kpd::EvalConfig cfg;
            return keypoints_to_dict(kpd::detect_and_describe(w, array_to_tensor(image), cfg));
        },
        py::arg("weights"), py::arg("image"));

    m.def("f1", &kpd::f1, py::arg("precision"), py::arg("recall"));
    m.def(
        "match_descriptors",
        [](const std::vector<std::vector<float>>& a, const std::vector<std::vector<float>>& b,
           bool mutual) {
            return kpd::match_descriptors(a, b, mutual).pairs;
        },
        py::arg("desc_a"), py::arg("desc_b"), py::arg("mutual") = true);

    py::class_<kpd::CameraIntrinsics>(m, "CameraIntrinsics")
        .def(py::init<>())
        .def_readwrite("fx", &kpd::CameraIntrinsics::fx)
        .def_readwrite("fy", &kpd::CameraIntrinsics::fy)
        .def_readwrite("cx", &kpd::CameraIntrinsics::cx)
        .def_readwrite("cy", &kpd::CameraIntrinsics::cy);
    m.def("default_intrinsics", &kpd::default_intrinsics);
    m.def("ray_distance_to_z", &kpd::ray_distance_to_z);
    m.def("unproject", [](double u, double v, double z, const kpd::CameraIntrinsics& k) {
        const auto p = kpd::unproject(u, v, z, k);
        return std::array<double, 3>{p.x, p.y, p.z};
    });
    m.def("project", [](const std::array<double, 3>& p, const kpd::CameraIntrinsics& k) {
        return kpd::project({p[0], p[1], p[2]}, k);
    });
    m.def("warp_homography_point",
          [](const std::array<double, 9>& h, double x, double y) {
              bool ok = true;
              const auto q = kpd::warp_homography_point(h, x, y, &ok);
              if (!ok) throw std::invalid_argument("degenerate homography at this point");
              return q;
          });
}
