#pragma once

// Kinect-style indoor dataset layout:
//   root/seq-NN/frame-NNNNNN.color.png + frame-NNNNNN.pose.txt
//   root/TrainSplit.txt, root/TestSplit.txt — one sequence name per line,
//   either "seq-NN" or "sequenceN".
// Pose files hold a 4x4 camera-to-world homogeneous matrix, four rows of
// four numbers. Malformed or incomplete frames are skipped with a warning
// and counted, never silently.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "poselab/data/manifest.hpp"
#include "poselab/geometry/mat3.hpp"

namespace poselab::data {

namespace detail {

inline std::optional<geometry::Pose> parse_pose_matrix_file(
    const std::filesystem::path& path, std::string& why) {
    std::ifstream in(path);
    if (!in) {
        why = "cannot open pose file";
        return std::nullopt;
    }
    double m[16];
    for (double& v : m)
        if (!(in >> v)) {
            why = "pose file does not contain 16 numbers";
            return std::nullopt;
        }
    // bottom row of a homogeneous transform
    if (std::abs(m[12]) > 1e-6 || std::abs(m[13]) > 1e-6 ||
        std::abs(m[14]) > 1e-6 || std::abs(m[15] - 1.0) > 1e-6) {
        why = "bottom row is not [0 0 0 1]";
        return std::nullopt;
    }
    geometry::Mat3 r;
    r.m = {m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]};
    try {
        geometry::Pose pose;
        pose.orientation = geometry::UnitQuaternion::from_rotation_matrix(r);
        pose.position = {m[3], m[7], m[11]};
        return pose;
    } catch (const std::invalid_argument& e) {
        why = e.what();
        return std::nullopt;
    }
}

// "sequence3" -> "seq-03"; "seq-03" passes through
inline std::string normalize_sequence_name(const std::string& raw) {
    if (raw.rfind("sequence", 0) == 0) {
        const int n = std::stoi(raw.substr(8));
        char buf[16];
        std::snprintf(buf, sizeof(buf), "seq-%02d", n);
        return buf;
    }
    return raw;
}

inline std::set<std::string> read_split_file(const std::filesystem::path& path) {
    std::set<std::string> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (!line.empty()) out.insert(normalize_sequence_name(line));
    }
    return out;
}

inline std::optional<int> trailing_number(const std::string& stem) {
    int end = static_cast<int>(stem.size());
    int begin = end;
    while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1])))
        --begin;
    if (begin == end) return std::nullopt;
    return std::stoi(stem.substr(static_cast<std::size_t>(begin)));
}

}  // namespace detail

// If invert_poses is set, stored transforms are treated as world-to-camera
// and inverted on ingest.
inline DatasetManifest parse_seven_scenes(const std::string& root,
                                          const std::string& split,
                                          bool invert_poses = false) {
    namespace fs = std::filesystem;
    if (split != "train" && split != "test")
        throw DataError("parse_seven_scenes: split must be 'train' or 'test'");
    const fs::path root_path(root);
    if (!fs::is_directory(root_path))
        throw DataError("parse_seven_scenes: not a directory: " + root);

    const fs::path split_file =
        root_path / (split == "train" ? "TrainSplit.txt" : "TestSplit.txt");
    std::set<std::string> wanted;
    if (fs::exists(split_file)) {
        wanted = detail::read_split_file(split_file);
    } else {
        std::cerr << "parse_seven_scenes: warning: no " << split_file.filename()
                  << ", taking every sequence\n";
    }

    std::vector<fs::path> seq_dirs;
    for (const auto& e : fs::directory_iterator(root_path))
        if (e.is_directory() &&
            (wanted.empty() || wanted.count(e.path().filename().string())))
            seq_dirs.push_back(e.path());
    std::sort(seq_dirs.begin(), seq_dirs.end());

    DatasetManifest m;
    m.name = root_path.filename().string();
    m.split = split;
    m.source = SourceFormat::seven_scenes;

    int skipped = 0;
    for (const auto& seq_dir : seq_dirs) {
        std::vector<fs::path> colors;
        for (const auto& e : fs::directory_iterator(seq_dir)) {
            const std::string name = e.path().filename().string();
            if (name.size() > 10 &&
                name.substr(name.size() - 10) == ".color.png")
                colors.push_back(e.path());
        }
        std::sort(colors.begin(), colors.end());

        for (const auto& color : colors) {
            std::string base = color.filename().string();
            base = base.substr(0, base.size() - 10);  // strip ".color.png"
            const fs::path pose_path = seq_dir / (base + ".pose.txt");
            if (!fs::exists(pose_path)) {
                std::cerr << "parse_seven_scenes: warning: no pose for "
                          << color.filename().string() << ", skipped\n";
                ++skipped;
                continue;
            }
            std::string why;
            auto pose = detail::parse_pose_matrix_file(pose_path, why);
            if (!pose) {
                std::cerr << "parse_seven_scenes: warning: "
                          << pose_path.filename().string() << ": " << why
                          << ", skipped\n";
                ++skipped;
                continue;
            }
            if (invert_poses) {
                const auto rt = pose->orientation.conjugate();
                pose = geometry::Pose{rt.rotate(pose->position * -1.0), rt};
            }
            ManifestEntry e;
            e.sequence_id = seq_dir.filename().string();
            const auto num = detail::trailing_number(base);
            e.frame_index = num ? *num : static_cast<int>(m.samples.size());
            e.image_path =
                fs::relative(color, root_path).generic_string();
            e.pose = *pose;
            m.samples.push_back(std::move(e));
        }
    }

    if (skipped > 0)
        std::cerr << "parse_seven_scenes: skipped " << skipped
                  << " frame(s) total\n";
    m.add_meta("skipped", std::to_string(skipped));
    m.add_meta("split_file", fs::exists(split_file)
                                 ? split_file.filename().string()
                                 : "(absent: all sequences)");
    m.validate();
    return m;
}

}  // namespace poselab::data
