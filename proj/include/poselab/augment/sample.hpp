#pragma once

#include <string>

#include "poselab/geometry/pose.hpp"
#include "poselab/imaging/image.hpp"

namespace poselab::augment {

// One labeled training item: image plus camera-to-world pose. `synthetic`
// marks rotation-augmented copies, which sequence windowing skips.
struct Sample {
    imaging::Image image;
    geometry::Pose label;
    std::string sequence_id;
    int frame_index = 0;
    bool synthetic = false;
};

}  // namespace poselab::augment
