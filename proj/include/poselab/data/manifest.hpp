#pragma once

// Dataset manifests: an ordered list of (image path, pose) samples with
// sequence identity, serialized to a line-oriented text format. Poses are
// written with 17 significant digits so round-trips are bit-exact.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "poselab/geometry/pose.hpp"
#include "poselab/util/error.hpp"

namespace poselab::data {

inline constexpr const char* kManifestMagic = "poselab-manifest";
inline constexpr const char* kManifestVersion = "v1";

enum class SourceFormat { seven_scenes, cambridge, synthetic };

inline const char* to_string(SourceFormat f) {
    switch (f) {
        case SourceFormat::seven_scenes: return "seven_scenes";
        case SourceFormat::cambridge: return "cambridge";
        case SourceFormat::synthetic: return "synthetic";
    }
    return "synthetic";
}

inline SourceFormat source_format_from(const std::string& s) {
    if (s == "seven_scenes") return SourceFormat::seven_scenes;
    if (s == "cambridge") return SourceFormat::cambridge;
    if (s == "synthetic") return SourceFormat::synthetic;
    throw DataError("manifest: unknown source format '" + s + "'");
}

struct ManifestEntry {
    std::string sequence_id;
    int frame_index = 0;
    std::string image_path;  // relative to the manifest's directory
    geometry::Pose pose;
    bool synthetic = false;
};

struct DatasetManifest {
    std::string name = "dataset";
    std::string split = "train";
    SourceFormat source = SourceFormat::synthetic;
    std::vector<ManifestEntry> samples;
    // provenance: preprocessing / augmentation / split-file records
    std::vector<std::pair<std::string, std::string>> meta;

    void add_meta(const std::string& key, const std::string& value) {
        meta.emplace_back(key, value);
    }

    // frame indices must be strictly increasing within each sequence
    void validate() const {
        for (std::size_t i = 1; i < samples.size(); ++i) {
            const auto& prev = samples[i - 1];
            const auto& cur = samples[i];
            if (prev.sequence_id == cur.sequence_id &&
                prev.frame_index >= cur.frame_index)
                throw DataError("manifest: frame_index not strictly increasing "
                                "in sequence '" + cur.sequence_id + "' (" +
                                std::to_string(prev.frame_index) + " then " +
                                std::to_string(cur.frame_index) + ")");
        }
    }
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_manifest(const DatasetManifest& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("write_manifest: cannot open " + path);
    out << kManifestMagic << " " << kManifestVersion << " name=" << m.name
        << " split=" << m.split << " source=" << to_string(m.source) << "\n";
    for (const auto& [k, v] : m.meta) out << "meta " << k << " " << v << "\n";
    for (const auto& s : m.samples) {
        const auto& p = s.pose;
        out << s.sequence_id << " " << s.frame_index << " " << s.image_path
            << " " << detail::fmt17(p.position.x) << " "
            << detail::fmt17(p.position.y) << " " << detail::fmt17(p.position.z)
            << " " << detail::fmt17(p.orientation.w()) << " "
            << detail::fmt17(p.orientation.x()) << " "
            << detail::fmt17(p.orientation.y()) << " "
            << detail::fmt17(p.orientation.z()) << " " << (s.synthetic ? 1 : 0)
            << "\n";
    }
    if (!out) throw DataError("write_manifest: write failed for " + path);
}

inline DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("read_manifest: cannot open " + path);

    std::string line;
    if (!std::getline(in, line))
        throw DataError("read_manifest: empty file " + path);
    std::istringstream header(line);
    std::string magic, version;
    header >> magic >> version;
    if (magic != kManifestMagic)
        throw DataError("read_manifest: " + path + " is not a manifest");
    if (version != kManifestVersion)
        throw DataError("read_manifest: version mismatch, file is '" + version +
                        "', reader expects '" + kManifestVersion + "'");

    DatasetManifest m;
    std::string kv;
    while (header >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (key == "name") m.name = value;
        else if (key == "split") m.split = value;
        else if (key == "source") m.source = source_format_from(value);
    }

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string first;
        ls >> first;
        if (first == "meta") {
            std::string key, value;
            ls >> key;
            std::getline(ls, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            m.add_meta(key, value);
            continue;
        }
        ManifestEntry e;
        e.sequence_id = first;
        double x, y, z, qw, qx, qy, qz;
        int synth_flag;
        if (!(ls >> e.frame_index >> e.image_path >> x >> y >> z >> qw >> qx >>
              qy >> qz >> synth_flag))
            throw DataError("read_manifest: malformed sample at " + path + ":" +
                            std::to_string(line_no));
        e.pose.position = {x, y, z};
        e.pose.orientation = geometry::UnitQuaternion::normalized(qw, qx, qy, qz);
        e.synthetic = synth_flag != 0;
        m.samples.push_back(std::move(e));
    }
    m.validate();
    return m;
}

// --- sequence windowing -----------------------------------------------------

// Indices into manifest.samples; L consecutive non-synthetic frames of one
// sequence, prediction target = last frame.
struct SequenceWindow {
    std::vector<std::size_t> indices;
    std::size_t target() const { return indices.back(); }
};

// Sliding windows that never cross sequence boundaries and skip augmented
// frames. The subsampled Cambridge streams carry no usable temporal
// adjacency, so windowing them requires force_temporal.
inline std::vector<SequenceWindow> sequence_windows(const DatasetManifest& m,
                                                    int length, int stride = 1,
                                                    bool force_temporal = false) {
    if (length < 1)
        throw std::invalid_argument("sequence_windows: length must be >= 1");
    if (stride < 1)
        throw std::invalid_argument("sequence_windows: stride must be >= 1");
    if (m.source == SourceFormat::cambridge && length > 1 && !force_temporal)
        throw DataError(
            "sequence_windows: this dataset's frame stream is subsampled and "
            "carries no temporal adjacency; pass force_temporal to window it "
            "anyway");

    std::vector<SequenceWindow> out;
    std::size_t i = 0;
    while (i < m.samples.size()) {
        // consecutive run of one sequence_id, synthetic frames dropped
        const std::string& seq = m.samples[i].sequence_id;
        std::vector<std::size_t> run;
        while (i < m.samples.size() && m.samples[i].sequence_id == seq) {
            if (!m.samples[i].synthetic) run.push_back(i);
            ++i;
        }
        if (static_cast<int>(run.size()) < length) continue;
        const std::size_t n_windows =
            (run.size() - static_cast<std::size_t>(length)) /
                static_cast<std::size_t>(stride) + 1;
        for (std::size_t w = 0; w < n_windows; ++w) {
            SequenceWindow win;
            const std::size_t start = w * static_cast<std::size_t>(stride);
            win.indices.assign(run.begin() + static_cast<std::ptrdiff_t>(start),
                               run.begin() + static_cast<std::ptrdiff_t>(
                                                 start + length));
            out.push_back(std::move(win));
        }
    }
    return out;
}

}  // namespace poselab::data
