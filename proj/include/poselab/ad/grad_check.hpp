#pragma once

// Central finite differences against the tape — the universal numerical
// oracle of this repo. Deliberately uses nothing from the reverse pass: the
// numeric side re-runs the forward closure with perturbed parameter data.

#include <cmath>
#include <functional>
#include <span>
#include <string>

#include "poselab/ad/tensor.hpp"
#include "poselab/util/error.hpp"

namespace poselab::ad {

// f must be a deterministic closure that rebuilds its graph from `params`
// (captured by handle) on every call and returns a scalar. Returns
// max over all parameter entries of |analytic - central| / max(1, |central|).
inline double grad_check(const std::function<Tensor()>& f,
                         std::span<const Tensor> params, double step) {
    if (step <= 0.0) throw std::invalid_argument("grad_check: step must be > 0");

    // Analytic pass on a private tape.
    std::vector<std::vector<double>> analytic;
    {
        Tape tape;
        TapeScope scope(tape);
        for (const Tensor& p : params) const_cast<Tensor&>(p).zero_grad();
        Tensor out = f();
        backward(out);
        for (const Tensor& p : params)
            analytic.push_back(p.has_grad()
                                   ? p.grad()
                                   : std::vector<double>(p.numel(), 0.0));
        for (const Tensor& p : params) const_cast<Tensor&>(p).zero_grad();
    }

    // Numeric pass: no tape active, pure forward evaluations.
    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& data = const_cast<Tensor&>(params[pi]).data();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double saved = data[i];
            data[i] = saved + step;
            const double f_plus = f().item();
            data[i] = saved - step;
            const double f_minus = f().item();
            data[i] = saved;
            const double numeric = (f_plus - f_minus) / (2.0 * step);
            const double a = analytic[pi][i];
            if (!std::isfinite(f_plus) || !std::isfinite(f_minus) ||
                !std::isfinite(a))
                throw NumericalError(
                    "grad_check: non-finite value at parameter " +
                    std::to_string(pi) + " entry " + std::to_string(i));
            const double rel =
                std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
            if (rel > max_rel) max_rel = rel;
        }
    }
    return max_rel;
}

}  // namespace poselab::ad
