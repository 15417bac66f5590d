#pragma once

#include <filesystem>
#include <vector>

#include "poselab/augment/sample.hpp"
#include "poselab/data/manifest.hpp"
#include "poselab/imaging/image_io.hpp"

namespace poselab::data {

// Decodes every referenced image; paths resolve against base_dir (normally
// the manifest's directory). Missing files are an error, not a skip — a
// manifest refers to materialized data.
inline std::vector<augment::Sample> load_samples(const DatasetManifest& m,
                                                 const std::string& base_dir) {
    namespace fs = std::filesystem;
    std::vector<augment::Sample> out;
    out.reserve(m.samples.size());
    for (const auto& e : m.samples) {
        const fs::path p = fs::path(base_dir) / e.image_path;
        if (!fs::exists(p))
            throw DataError("load_samples: referenced image missing: " +
                            p.string());
        augment::Sample s;
        s.image = imaging::read_image(p.string());
        s.label = e.pose;
        s.sequence_id = e.sequence_id;
        s.frame_index = e.frame_index;
        s.synthetic = e.synthetic;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace poselab::data
