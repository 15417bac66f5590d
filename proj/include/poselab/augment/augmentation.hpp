#pragma once

// Epoch-doubling rotation augmentation: each epoch every training image is
// additionally presented rotated by a fresh theta ~ Uniform[lo, hi], with the
// orientation label rewritten to match (same position, different roll).

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "poselab/augment/sample.hpp"
#include "poselab/imaging/pipelines.hpp"
#include "poselab/util/rng.hpp"

namespace poselab::augment {

// Rotates the image and rewrites the orientation label by the same angle.
// Position is copied bit-for-bit; the copy is flagged synthetic.
inline Sample augment_sample(const Sample& s, double theta_deg) {
    if (std::abs(theta_deg) > 20.0)
        throw std::invalid_argument("augment_sample: |theta| must be <= 20");
    Sample out;
    out.image = imaging::rotate_image(s.image, theta_deg);
    out.label = geometry::apply_roll_augmentation(s.label, theta_deg);
    out.sequence_id = s.sequence_id;
    out.frame_index = s.frame_index;
    out.synthetic = true;
    return out;
}

struct AugmentRange {
    double lo = -20.0;
    double hi = 20.0;
};

// Theta for sample `index` of epoch `epoch`; derived seeds keep the mapping
// deterministic and independent of evaluation order.
inline double augment_theta(AugmentRange range, std::uint64_t base_seed,
                            std::uint64_t epoch, std::uint64_t index) {
    rng::Generator gen(rng::mix(base_seed, epoch, index));
    return gen.uniform(range.lo, range.hi);
}

// Originals first (unmodified), then one augmented copy per original with a
// fresh theta each epoch. Output size is exactly 2N.
inline std::vector<Sample> augment_epoch(const std::vector<Sample>& dataset,
                                         AugmentRange range,
                                         std::uint64_t base_seed,
                                         std::uint64_t epoch) {
    if (range.lo > range.hi)
        throw std::invalid_argument("augment_epoch: lo must be <= hi");
    std::vector<Sample> out;
    out.reserve(dataset.size() * 2);
    for (const Sample& s : dataset) out.push_back(s);
    for (std::size_t i = 0; i < dataset.size(); ++i)
        out.push_back(augment_sample(
            dataset[i], augment_theta(range, base_seed, epoch, i)));
    return out;
}

}  // namespace poselab::augment
