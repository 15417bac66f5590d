#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "poselab/augment/augmentation.hpp"
#include "poselab/synth/scene.hpp"
#include "poselab/util/rng.hpp"
#include "testing_helpers.hpp"

using namespace poselab;
using augment::AugmentRange;
using augment::Sample;
using geometry::Pose;
using geometry::UnitQuaternion;
using geometry::Vec3;
using imaging::Image;

namespace {

UnitQuaternion down_orientation() { return UnitQuaternion::normalized(0, 1, 0, 0); }

synth::SceneConfig small_scene() {
    synth::SceneConfig s;
    s.pattern_seed = 5;
    s.image_h = 96;
    s.image_w = 96;
    s.focal_px = 96.0;
    return s;
}

Sample make_sample(double x, double y, rng::Generator& gen, int index = 0) {
    Sample s;
    s.label = Pose{{x, y, 2.0},
                   down_orientation() * UnitQuaternion::from_axis_angle(
                                            {0, 0, 1}, gen.uniform(-10, 10))};
    s.image = synth::render(s.label, small_scene());
    s.sequence_id = "seq-00";
    s.frame_index = index;
    return s;
}

double interior_mean_abs_diff(const Image& a, const Image& b, double margin = 3.0) {
    const double cy = (a.height - 1) / 2.0, cx = (a.width - 1) / 2.0;
    const double r_max = std::min(a.height, a.width) / 2.0 - margin;
    double acc = 0.0;
    std::size_t n = 0;
    for (int r = 0; r < a.height; ++r)
        for (int c = 0; c < a.width; ++c) {
            if (std::hypot(r - cy, c - cx) > r_max) continue;
            for (int ch = 0; ch < 3; ++ch) {
                acc += std::abs(static_cast<double>(a.at(r, c, ch)) -
                                b.at(r, c, ch));
                ++n;
            }
        }
    return acc / static_cast<double>(n);
}

}  // namespace

TEST_CASE("augment_sample with theta 0 changes nothing") {
    rng::Generator gen(1);
    Sample s = make_sample(0.2, -0.1, gen);
    Sample out = augment::augment_sample(s, 0.0);
    CHECK(out.image.data == s.image.data);
    CHECK(geometry::angular_distance_deg(out.label.orientation,
                                         s.label.orientation) < 1e-12);
    CHECK(out.label.position == s.label.position);
    CHECK(out.synthetic);
}

TEST_CASE("augment_sample never touches position") {
    rng::Generator gen(2);
    Sample s = make_sample(-0.3, 0.4, gen);
    for (double theta : {-20.0, -7.3, 0.01, 11.9, 20.0}) {
        Sample out = augment::augment_sample(s, theta);
        CHECK(out.label.position == s.label.position);  // bit-exact
        CHECK(out.sequence_id == s.sequence_id);
        CHECK(out.frame_index == s.frame_index);
    }
    CHECK_THROWS_AS(augment::augment_sample(s, 21.0), std::invalid_argument);
}

TEST_CASE("augmented image matches a render of the rewritten label") {
    // the augmented (image, label) pair stays consistent: rendering the new
    // label reproduces the rotated image up to interpolation
    rng::Generator gen(3);
    Sample s = make_sample(0.1, 0.3, gen);
    for (double theta : {-20.0, -10.0, 5.0, 10.0, 20.0}) {
        Sample out = augment::augment_sample(s, theta);
        Image rerender = synth::render(out.label, small_scene());
        INFO("theta = " << theta);
        CHECK(interior_mean_abs_diff(out.image, rerender) < 0.02);
    }
}

TEST_CASE("augmented orientation moves by exactly |theta|") {
    rng::Generator gen(4);
    Sample s = make_sample(0.0, 0.0, gen);
    for (int i = 0; i < 50; ++i) {
        const double theta = gen.uniform(-20, 20);
        Sample out = augment::augment_sample(s, theta);
        CHECK(geometry::angular_distance_deg(s.label.orientation,
                                             out.label.orientation) ==
              Catch::Approx(std::abs(theta)).margin(1e-6));
    }
}

TEST_CASE("augment_epoch doubles the dataset and keeps originals") {
    rng::Generator gen(5);
    std::vector<Sample> dataset;
    for (int i = 0; i < 7; ++i) dataset.push_back(make_sample(0.05 * i, 0.0, gen, i));

    auto out = augment::augment_epoch(dataset, {-20.0, 20.0}, 123, 0);
    REQUIRE(out.size() == 14);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        CHECK(out[i].image.data == dataset[i].image.data);
        CHECK(out[i].label.position == dataset[i].label.position);
        CHECK_FALSE(out[i].synthetic);
        // the paired copy keeps the position bit-exactly
        CHECK(out[dataset.size() + i].label.position == dataset[i].label.position);
        CHECK(out[dataset.size() + i].synthetic);
    }
}

TEST_CASE("augment_epoch with a degenerate range copies orientations") {
    rng::Generator gen(6);
    std::vector<Sample> dataset{make_sample(0.1, 0.1, gen)};
    auto out = augment::augment_epoch(dataset, {0.0, 0.0}, 9, 3);
    REQUIRE(out.size() == 2);
    CHECK(geometry::angular_distance_deg(out[1].label.orientation,
                                         dataset[0].label.orientation) < 1e-12);
}

TEST_CASE("augment_epoch is deterministic and fresh per epoch") {
    rng::Generator gen(7);
    std::vector<Sample> dataset{make_sample(0.0, 0.2, gen),
                                make_sample(0.2, 0.0, gen, 1)};
    auto a = augment::augment_epoch(dataset, {-20.0, 20.0}, 42, 5);
    auto b = augment::augment_epoch(dataset, {-20.0, 20.0}, 42, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].image.data == b[i].image.data);
        CHECK(a[i].label.orientation.w() == b[i].label.orientation.w());
    }

    auto c = augment::augment_epoch(dataset, {-20.0, 20.0}, 42, 6);
    bool any_different = false;
    for (std::size_t i = dataset.size(); i < a.size(); ++i)
        any_different = any_different ||
                        a[i].label.orientation.dot(c[i].label.orientation) < 1.0 - 1e-12;
    CHECK(any_different);

    CHECK_THROWS_AS(augment::augment_epoch(dataset, {5.0, -5.0}, 1, 0),
                    std::invalid_argument);
}

TEST_CASE("thetas stay in range and are uniform across epochs") {
    const AugmentRange range{-20.0, 20.0};
    const int kEpochs = 200, kPerEpoch = 100, kBins = 20;
    std::vector<std::size_t> bins(kBins, 0);
    std::size_t total = 0;
    for (int e = 0; e < kEpochs; ++e)
        for (int i = 0; i < kPerEpoch; ++i) {
            const double t = augment::augment_theta(range, 77, e, i);
            REQUIRE(t >= range.lo);
            REQUIRE(t <= range.hi);
            const int b = std::min(
                kBins - 1, static_cast<int>((t - range.lo) / (range.hi - range.lo) *
                                            kBins));
            ++bins[static_cast<std::size_t>(b)];
            ++total;
        }
    CHECK(testhelp::chi2_uniform_stat(bins, total) <
          testhelp::chi2_critical(kBins - 1));
}
