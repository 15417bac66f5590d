#pragma once

// Pose regression losses. Both combine Euclidean residual norms (not
// squares); the norm is epsilon-stabilized in the autodiff layer so a
// perfect prediction still has a finite gradient.
//
//   fixed:    |x - x'| + beta * |q - q'|
//   adaptive: |x - x'| e^{-s_x} + s_x + |q - q'| e^{-s_q} + s_q
//
// with s_x, s_q free scalars trained by backpropagation (log task
// variances). With s_x = s_q = 0 the adaptive form reduces bit-exactly to
// the fixed form at beta = 1.

#include <cmath>

#include "poselab/ad/ops.hpp"
#include "poselab/geometry/pose.hpp"
#include "poselab/util/error.hpp"

namespace poselab::train {

struct AdaptiveLossState {
    ad::Tensor s_x;
    ad::Tensor s_q;

    // The orientation residual is the smaller one on the unit manifold;
    // starting s_q below s_x up-weights it (e^3 ~ 20x) from step one.
    explicit AdaptiveLossState(double s_x0 = 0.0, double s_q0 = -3.0)
        : s_x(ad::Tensor::scalar(s_x0, true)),
          s_q(ad::Tensor::scalar(s_q0, true)) {}

    bool finite() const {
        return std::isfinite(s_x.item()) && std::isfinite(s_q.item());
    }
};

namespace detail {

inline void check_loss_inputs(const ad::Tensor& x, const ad::Tensor& x_pred,
                              const ad::Tensor& q, const ad::Tensor& q_pred) {
    if (x.shape() != ad::Shape{3} || x_pred.shape() != ad::Shape{3})
        throw std::invalid_argument("loss: positions must be 3-vectors");
    if (q.shape() != ad::Shape{4} || q_pred.shape() != ad::Shape{4})
        throw std::invalid_argument("loss: orientations must be 4-vectors");
    for (const ad::Tensor* t : {&x, &x_pred, &q, &q_pred})
        for (double v : t->data())
            if (!std::isfinite(v))
                throw NumericalError("loss: non-finite input value");
}

}  // namespace detail

inline ad::Tensor fixed_beta_loss(const ad::Tensor& x, const ad::Tensor& x_pred,
                                  const ad::Tensor& q, const ad::Tensor& q_pred,
                                  double beta) {
    detail::check_loss_inputs(x, x_pred, q, q_pred);
    if (!(beta > 0.0))
        throw std::invalid_argument("fixed_beta_loss: beta must be > 0");
    const auto pos_term = ad::l2norm(ad::sub(x_pred, x));
    const auto ori_term = ad::scale(ad::l2norm(ad::sub(q_pred, q)), beta);
    return ad::add(pos_term, ori_term);
}

// Gradients flow into the predictions and into s_x, s_q:
// dLoss/ds_x = -|x - x'| e^{-s_x} + 1.
inline ad::Tensor adaptive_loss(const ad::Tensor& x, const ad::Tensor& x_pred,
                                const ad::Tensor& q, const ad::Tensor& q_pred,
                                const AdaptiveLossState& state) {
    detail::check_loss_inputs(x, x_pred, q, q_pred);
    if (!state.finite())
        throw NumericalError("adaptive_loss: non-finite uncertainty state");
    const auto pos_term = ad::mul(ad::l2norm(ad::sub(x_pred, x)),
                                  ad::exp(ad::scale(state.s_x, -1.0)));
    const auto ori_term = ad::mul(ad::l2norm(ad::sub(q_pred, q)),
                                  ad::exp(ad::scale(state.s_q, -1.0)));
    return ad::add(ad::add(pos_term, state.s_x),
                   ad::add(ori_term, state.s_q));
}

// label -> target tensors (orientation is the canonical unit quaternion)
inline ad::Tensor position_target(const geometry::Pose& pose) {
    return ad::Tensor({3}, {pose.position.x, pose.position.y, pose.position.z});
}

inline ad::Tensor orientation_target(const geometry::Pose& pose) {
    const auto& q = pose.orientation;
    return ad::Tensor({4}, {q.w(), q.x(), q.y(), q.z()});
}

}  // namespace poselab::train
