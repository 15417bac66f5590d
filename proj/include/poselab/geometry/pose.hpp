#pragma once

#include "poselab/geometry/quaternion.hpp"
#include "poselab/geometry/vec3.hpp"

namespace poselab::geometry {

// Camera-to-world pose: `position` is the camera center in world coordinates,
// `orientation` maps camera-frame directions into the world frame. Every pose
// in this codebase uses this convention; ingestion converts at the boundary.
struct Pose {
    Vec3 position;
    UnitQuaternion orientation = UnitQuaternion::identity();
};

// Composition side and sign of the in-plane augmentation label rewrite:
// right-multiplying by a +theta rotation about the camera's optical axis
// (+z, camera x right / y down / z forward) corresponds to rotate_image's
// +theta. Fixed empirically by the render-rotate equivariance test and
// frozen here.
inline constexpr double kRollCompositionSign = 1.0;

// Same position, orientation composed with a roll about the optical axis.
inline Pose apply_roll_augmentation(const Pose& label, double theta_deg) {
    const UnitQuaternion roll = UnitQuaternion::from_axis_angle(
        Vec3{0.0, 0.0, 1.0}, kRollCompositionSign * theta_deg);
    return Pose{label.position, label.orientation * roll};
}

}  // namespace poselab::geometry
