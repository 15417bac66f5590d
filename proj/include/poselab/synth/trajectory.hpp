#pragma once

// Camera trajectories over the synthetic plane and dataset emission. A
// trajectory is an arc flown at roughly constant height with a linear roll
// drift; the test split interleaves the train split spatially while its roll
// range is placed by the overlap knob: 1 = test rolls inside the train
// range, 0 = disjoint ranges.

#include <filesystem>
#include <utility>
#include <vector>

#include "poselab/data/manifest.hpp"
#include "poselab/imaging/image_io.hpp"
#include "poselab/synth/scene.hpp"
#include "poselab/util/rng.hpp"

namespace poselab::synth {

// Camera basis with x right, y down, z forward pointed straight at the
// plane (world -z): the identity view of this scene family.
inline geometry::UnitQuaternion nadir_orientation() {
    return geometry::UnitQuaternion::normalized(0, 1, 0, 0);
}

// Roll of `q` about the optical axis relative to the nadir view, degrees.
inline double roll_angle_deg(const geometry::UnitQuaternion& q) {
    const auto rel = nadir_orientation().conjugate() * q;
    return 2.0 * std::atan2(rel.z(), rel.w()) * geometry::kDegPerRad;
}

struct TrajectoryConfig {
    int length = 100;                  // frames per split
    double step_size = 0.02;           // meters per frame along the arc
    double drift_deg_per_frame = 0.2;  // roll drift per frame
    double overlap = 1.0;              // test-vs-train roll coverage, [0,1]
    double camera_height = 2.0;        // meters above the plane

    void validate() const {
        if (length < 1)
            throw std::invalid_argument("trajectory: length must be >= 1");
        if (step_size <= 0.0)
            throw std::invalid_argument("trajectory: step_size must be > 0");
        if (overlap < 0.0 || overlap > 1.0)
            throw std::invalid_argument("trajectory: overlap must be in [0,1]");
        if (camera_height <= 0.0)
            throw std::invalid_argument("trajectory: camera height must be > 0");
    }
};

namespace detail {

struct ArcParams {
    double center_x, center_y, radius, phase0, dphi;
};

inline ArcParams arc_params(const SceneConfig& scene, const TrajectoryConfig& traj,
                            std::uint64_t seed) {
    rng::Generator gen(rng::mix(seed, 0x41524321ull));
    ArcParams a;
    a.radius = 0.25 * scene.plane_extent;
    a.center_x = 0.30 * scene.plane_extent;
    a.center_y = 0.25 * scene.plane_extent;
    a.phase0 = gen.uniform(0.0, 0.5);
    a.dphi = traj.step_size / a.radius;
    return a;
}

}  // namespace detail

// Train and test poses share one arc; the test split is offset by half a
// step along it and 3% radially, so its positions are new but remain inside
// the training region. Roll ranges are controlled by the overlap knob.
inline std::vector<geometry::Pose> trajectory_poses(const SceneConfig& scene,
                                                    const TrajectoryConfig& traj,
                                                    std::uint64_t seed,
                                                    bool test_split) {
    scene.validate();
    traj.validate();
    const auto arc = detail::arc_params(scene, traj, seed);

    const double roll_span = traj.drift_deg_per_frame * (traj.length - 1);
    double roll_start = 0.0;
    if (test_split) {
        roll_start = roll_span * (1.0 - traj.overlap);
        if (traj.overlap == 0.0) roll_start += traj.drift_deg_per_frame;
    }
    const double phase_offset = test_split ? 0.5 * arc.dphi : 0.0;
    const double radius = arc.radius * (test_split ? 1.03 : 1.0);
    const double z_phase = test_split ? 1.3 : 0.0;

    std::vector<geometry::Pose> out;
    out.reserve(static_cast<std::size_t>(traj.length));
    for (int i = 0; i < traj.length; ++i) {
        const double phi = arc.phase0 + phase_offset + i * arc.dphi;
        geometry::Pose p;
        p.position = {arc.center_x + radius * std::cos(phi),
                      arc.center_y + radius * std::sin(phi),
                      traj.camera_height *
                          (1.0 + 0.05 * std::sin(3.0 * phi + z_phase))};
        p.orientation =
            nadir_orientation() *
            geometry::UnitQuaternion::from_axis_angle(
                {0, 0, 1}, roll_start + traj.drift_deg_per_frame * i);
        out.push_back(p);
    }
    return out;
}

namespace detail {

inline data::DatasetManifest render_split(const SceneConfig& scene,
                                          const TrajectoryConfig& traj,
                                          std::uint64_t seed,
                                          const std::string& split,
                                          const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    const bool is_test = split == "test";
    const auto poses = trajectory_poses(scene, traj, seed, is_test);
    fs::create_directories(out_dir / split);

    data::DatasetManifest m;
    m.name = "synthetic";
    m.split = split;
    m.source = data::SourceFormat::synthetic;
    m.add_meta("seed", std::to_string(seed));
    m.add_meta("pattern_seed", std::to_string(scene.pattern_seed));
    m.add_meta("border_info", std::to_string(scene.border_info));
    m.add_meta("overlap", std::to_string(traj.overlap));

    for (int i = 0; i < traj.length; ++i) {
        const auto img = render(poses[static_cast<std::size_t>(i)], scene);
        char name[32];
        std::snprintf(name, sizeof(name), "frame-%06d.png", i);
        imaging::write_png((out_dir / split / name).string(), img);

        data::ManifestEntry e;
        e.sequence_id = "traj-" + split;
        e.frame_index = i;
        e.image_path = split + "/" + name;
        e.pose = poses[static_cast<std::size_t>(i)];
        m.samples.push_back(std::move(e));
    }
    return m;
}

}  // namespace detail

// Renders both splits to out_dir/{train,test}/frame-NNNNNN.png, writes
// train.manifest and test.manifest beside them, and spot-checks that poses a
// step apart really produce distinct images (a degenerate scene is an error,
// not a silent bad dataset).
inline std::pair<data::DatasetManifest, data::DatasetManifest> generate_dataset(
    const SceneConfig& scene, const TrajectoryConfig& traj, std::uint64_t seed,
    const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path root(out_dir);
    auto train = detail::render_split(scene, traj, seed, "train", root);
    auto test = detail::render_split(scene, traj, seed, "test", root);

    // injectivity floor, sampled
    if (traj.length >= 2) {
        rng::Generator gen(rng::mix(seed, 0x494e4a45ull));
        const auto poses = trajectory_poses(scene, traj, seed, false);
        double worst = 1e300;
        for (int k = 0; k < 8; ++k) {
            const auto i = static_cast<std::size_t>(
                gen.below(static_cast<std::uint64_t>(traj.length - 1)));
            std::size_t j = i + 1;
            while (j + 1 < poses.size() &&
                   geometry::distance(poses[i].position, poses[j].position) <
                       traj.step_size)
                ++j;
            const auto a = render(poses[i], scene);
            const auto b = render(poses[j], scene);
            worst = std::min(worst, imaging::mean_abs_diff(a, b));
        }
        if (worst < 0.002)
            throw NumericalError(
                "generate_dataset: degenerate scene, images " +
                std::to_string(worst) +
                " apart for poses a full step apart (floor 0.002)");
    }

    data::write_manifest(train, (root / "train.manifest").string());
    data::write_manifest(test, (root / "test.manifest").string());
    return {std::move(train), std::move(test)};
}

}  // namespace poselab::synth
