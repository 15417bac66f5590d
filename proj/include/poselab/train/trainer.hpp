#pragma once

// One optimization step: forward over the batch on a fresh tape, mean loss,
// one backward pass, one optimizer step (covering s_x/s_q when the adaptive
// loss is active). Any failure propagates before parameters change.

#include <span>
#include <vector>

#include "poselab/model/network.hpp"
#include "poselab/train/adam.hpp"
#include "poselab/train/loss.hpp"

namespace poselab::train {

enum class LossKind { fixed_beta, adaptive };

struct LossSpec {
    LossKind kind = LossKind::adaptive;
    double beta = 500.0;  // fixed_beta only
};

// One batch item: preprocessed input tensor(s) plus the target pose of the
// last (or only) frame.
struct TrainItem {
    std::vector<ad::Tensor> inputs;
    geometry::Pose label;
};

struct StepMetrics {
    double loss = 0.0;
    double grad_norm = 0.0;
    double s_x = 0.0;
    double s_q = 0.0;
};

inline StepMetrics training_step(model::PoseRegressor& model,
                                 std::span<const TrainItem> batch,
                                 const LossSpec& loss_spec,
                                 AdamOptimizer& optimizer,
                                 AdaptiveLossState* adaptive_state) {
    if (batch.empty())
        throw std::invalid_argument("training_step: empty batch");
    if (loss_spec.kind == LossKind::adaptive && adaptive_state == nullptr)
        throw std::invalid_argument(
            "training_step: adaptive loss needs its state");

    for (const auto& p : optimizer.params())
        const_cast<ad::Tensor&>(p).zero_grad();

    ad::Tape tape;
    ad::TapeScope scope(tape);

    ad::Tensor total;
    for (const auto& item : batch) {
        const auto pred = model.predict(item.inputs);
        const auto x = position_target(item.label);
        const auto q = orientation_target(item.label);
        const auto item_loss =
            loss_spec.kind == LossKind::fixed_beta
                ? fixed_beta_loss(x, pred.position, q, pred.orientation,
                                  loss_spec.beta)
                : adaptive_loss(x, pred.position, q, pred.orientation,
                                *adaptive_state);
        total = total.defined() ? ad::add(total, item_loss) : item_loss;
    }
    const auto mean_loss =
        ad::scale(total, 1.0 / static_cast<double>(batch.size()));
    ad::backward(mean_loss);

    double sq_norm = 0.0;
    for (const auto& p : optimizer.params())
        if (p.has_grad())
            for (double g : p.grad()) sq_norm += g * g;

    optimizer.step();  // throws before mutating on non-finite gradients

    StepMetrics metrics;
    metrics.loss = mean_loss.item();
    metrics.grad_norm = std::sqrt(sq_norm);
    if (adaptive_state != nullptr) {
        metrics.s_x = adaptive_state->s_x.item();
        metrics.s_q = adaptive_state->s_q.item();
    }
    return metrics;
}

}  // namespace poselab::train
