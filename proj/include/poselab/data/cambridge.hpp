#pragma once

// Outdoor landmark dataset layout: root/dataset_train.txt and
// root/dataset_test.txt with three header lines, then per line
//   relative/image/path.png X Y Z W P Q R
// Quaternions are normalized and canonicalized on ingest. Lines with the
// wrong field count or a degenerate quaternion are rejected with their line
// number, counted, and parsing continues.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "poselab/data/manifest.hpp"

namespace poselab::data {

inline DatasetManifest parse_cambridge(const std::string& root,
                                       const std::string& split,
                                       bool invert_poses = false) {
    namespace fs = std::filesystem;
    if (split != "train" && split != "test")
        throw DataError("parse_cambridge: split must be 'train' or 'test'");
    const fs::path root_path(root);
    const fs::path list_path = root_path / ("dataset_" + split + ".txt");
    std::ifstream in(list_path);
    if (!in)
        throw DataError("parse_cambridge: cannot open " + list_path.string());

    DatasetManifest m;
    m.name = root_path.filename().string();
    m.split = split;
    m.source = SourceFormat::cambridge;

    std::string line;
    int line_no = 0, skipped = 0;
    for (int i = 0; i < 3 && std::getline(in, line); ++i) ++line_no;  // header

    std::vector<ManifestEntry> entries;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string path;
        double x, y, z, qw, qx, qy, qz;
        std::string extra;
        if (!(ls >> path >> x >> y >> z >> qw >> qx >> qy >> qz) || (ls >> extra)) {
            std::cerr << "parse_cambridge: warning: line " << line_no
                      << ": expected 'path X Y Z W P Q R', rejected\n";
            ++skipped;
            continue;
        }
        ManifestEntry e;
        try {
            e.pose.orientation =
                geometry::UnitQuaternion::normalized(qw, qx, qy, qz);
        } catch (const std::invalid_argument&) {
            std::cerr << "parse_cambridge: warning: line " << line_no
                      << ": near-zero quaternion, rejected\n";
            ++skipped;
            continue;
        }
        e.pose.position = {x, y, z};
        if (invert_poses) {
            const auto rt = e.pose.orientation.conjugate();
            e.pose = geometry::Pose{rt.rotate(e.pose.position * -1.0), rt};
        }
        const auto slash = path.find('/');
        e.sequence_id = slash == std::string::npos ? "seq0" : path.substr(0, slash);
        e.image_path = path;
        e.frame_index = static_cast<int>(entries.size());
        entries.push_back(std::move(e));
    }

    m.samples = std::move(entries);
    if (skipped > 0)
        std::cerr << "parse_cambridge: skipped " << skipped << " line(s)\n";
    m.add_meta("skipped", std::to_string(skipped));
    m.add_meta("list_file", list_path.filename().string());
    m.validate();
    return m;
}

}  // namespace poselab::data
