#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "kpd/autodiff.hpp"

namespace kpd {

struct GradCheckReport {
    bool pass = false;
    double max_rel_err = 0.0;
    int worst_input = -1;
    int64_t worst_index = -1;
    std::string note;
};

// f builds a scalar loss on the given tape from the given differentiable inputs.
using ScalarFn = std::function<Var<double>(Tape<double>&, const std::vector<Var<double>>&)>;

// Central finite differences vs reverse-mode gradients, 64-bit only.
inline GradCheckReport grad_check(const ScalarFn& f, std::vector<TensorD> inputs, double epsilon,
                                  double tolerance) {
    GradCheckReport rep;

    auto eval = [&](const std::vector<TensorD>& ins) -> double {
        Tape<double> tape;
        std::vector<Var<double>> vars;
        vars.reserve(ins.size());
        for (const auto& t : ins) vars.push_back(tape.leaf(t, false));
        return f(tape, vars)->value.data[0];
    };

    // analytic gradients
    std::vector<TensorD> analytic;
    {
        Tape<double> tape;
        std::vector<Var<double>> vars;
        vars.reserve(inputs.size());
        for (const auto& t : inputs) vars.push_back(tape.leaf(t, true));
        auto loss = f(tape, vars);
        if (!std::isfinite(loss->value.data[0])) {
            rep.note = "non-finite loss value";
            return rep;
        }
        tape.backward(loss);
        for (const auto& v : vars) analytic.push_back(v->grad);
    }

    double max_err = 0.0;
    for (size_t k = 0; k < inputs.size(); ++k) {
        for (int64_t i = 0; i < inputs[k].size(); ++i) {
            const double orig = inputs[k].data[i];
            inputs[k].data[i] = orig + epsilon;
            const double fp = eval(inputs);
            inputs[k].data[i] = orig - epsilon;
            const double fm = eval(inputs);
            inputs[k].data[i] = orig;
            if (!std::isfinite(fp) || !std::isfinite(fm)) {
                rep.note = "non-finite intermediate at input " + std::to_string(k) + " index " +
                           std::to_string(i);
                return rep;
            }
            const double numeric = (fp - fm) / (2.0 * epsilon);
            const double a = analytic[k].data[i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-3});
            const double err = std::fabs(a - numeric) / denom;
            if (err > max_err) {
                max_err = err;
                rep.worst_input = static_cast<int>(k);
                rep.worst_index = i;
            }
        }
    }
    rep.max_rel_err = max_err;
    rep.pass = max_err <= tolerance;
    return rep;
}

}  // namespace kpd
