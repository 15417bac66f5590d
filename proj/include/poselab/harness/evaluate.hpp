#pragma once

// Per-frame (or per-window) pose errors and their medians: position error in
// meters as the Euclidean distance, orientation error in degrees between the
// label and the normalized prediction.

#include <span>
#include <vector>

#include "poselab/harness/metrics.hpp"
#include "poselab/model/network.hpp"
#include "poselab/train/trainer.hpp"

namespace poselab::harness {

struct EvalReport {
    std::vector<double> position_errors;     // meters, one per item
    std::vector<double> orientation_errors;  // degrees, one per item
    double median_position = 0.0;
    double median_orientation = 0.0;
};

inline EvalReport evaluate(const model::PoseRegressor& net,
                           std::span<const train::TrainItem> items) {
    if (items.empty())
        throw std::invalid_argument("evaluate: empty evaluation set");
    EvalReport report;
    report.position_errors.reserve(items.size());
    report.orientation_errors.reserve(items.size());
    for (const auto& item : items) {
        const auto pred = net.predict(item.inputs);
        const auto& xp = pred.position.data();
        const geometry::Vec3 x_hat{xp[0], xp[1], xp[2]};
        report.position_errors.push_back(
            geometry::distance(x_hat, item.label.position));

        const auto& qp = pred.orientation.data();
        const auto q_hat =
            geometry::UnitQuaternion::normalized(qp[0], qp[1], qp[2], qp[3]);
        report.orientation_errors.push_back(
            geometry::angular_distance_deg(item.label.orientation, q_hat));
    }
    report.median_position = median(report.position_errors);
    report.median_orientation = median(report.orientation_errors);
    return report;
}

}  // namespace poselab::harness
