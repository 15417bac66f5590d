#pragma once

// Versioned text checkpoints: config echo lines, then one named flat array
// per parameter at 17 significant digits — round-trips are bit-exact.
//
//   poselab-checkpoint v1
//   config <key> = <value>
//   param <name> <rank> <dim...>
//   <numel values on one line>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "poselab/model/params.hpp"
#include "poselab/util/error.hpp"

namespace poselab::model {

inline constexpr const char* kCheckpointMagic = "poselab-checkpoint";
inline constexpr const char* kCheckpointVersion = "v1";

struct Checkpoint {
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, ad::Tensor>> params;

    const std::string* find_config(const std::string& key) const {
        for (const auto& [k, v] : config)
            if (k == key) return &v;
        return nullptr;
    }
};

inline void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& config,
    const ParamRegistry& params) {
    std::ofstream out(path);
    if (!out) throw DataError("save_checkpoint: cannot open " + path);
    out << kCheckpointMagic << " " << kCheckpointVersion << "\n";
    for (const auto& [k, v] : config) out << "config " << k << " = " << v << "\n";
    char buf[40];
    for (const auto& [name, t] : params.entries()) {
        out << "param " << name << " " << t.shape().size();
        for (int d : t.shape()) out << " " << d;
        out << "\n";
        for (std::size_t i = 0; i < t.numel(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", t.data()[i]);
            out << (i ? " " : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw DataError("save_checkpoint: write failed for " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_checkpoint: cannot open " + path);
    std::string magic, version;
    in >> magic >> version;
    if (magic != kCheckpointMagic)
        throw DataError("load_checkpoint: " + path + " is not a checkpoint");
    if (version != kCheckpointVersion)
        throw DataError("load_checkpoint: version mismatch, file is '" + version +
                        "', reader expects '" + kCheckpointVersion + "'");

    Checkpoint ckpt;
    std::string tok;
    while (in >> tok) {
        if (tok == "config") {
            std::string key, eq, value, rest;
            in >> key >> eq;
            std::getline(in, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            ckpt.config.emplace_back(key, value);
        } else if (tok == "param") {
            std::string name;
            std::size_t rank;
            if (!(in >> name >> rank))
                throw DataError("load_checkpoint: malformed param header");
            ad::Shape shape(rank);
            for (auto& d : shape)
                if (!(in >> d))
                    throw DataError("load_checkpoint: malformed shape for " + name);
            std::vector<double> values(ad::shape_numel(shape));
            for (auto& v : values)
                if (!(in >> v))
                    throw DataError("load_checkpoint: truncated values for " + name);
            ckpt.params.emplace_back(name,
                                     ad::Tensor(std::move(shape), std::move(values)));
        } else {
            throw DataError("load_checkpoint: unexpected token '" + tok + "'");
        }
    }
    return ckpt;
}

// Copies checkpoint values into an existing registry; names and shapes must
// match exactly (the registry layout is part of the network config).
inline void restore_params(ParamRegistry& params, const Checkpoint& ckpt) {
    if (ckpt.params.size() != params.entries().size())
        throw DataError("restore_params: checkpoint has " +
                        std::to_string(ckpt.params.size()) + " tensors, model has " +
                        std::to_string(params.entries().size()));
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
        const auto& [name, value] = ckpt.params[i];
        const auto& [expect_name, target] = params.entries()[i];
        if (name != expect_name)
            throw DataError("restore_params: parameter order mismatch: '" + name +
                            "' vs '" + expect_name + "'");
        if (value.shape() != target.shape())
            throw DataError("restore_params: shape mismatch for '" + name + "': " +
                            ad::shape_str(value.shape()) + " vs " +
                            ad::shape_str(target.shape()));
        const_cast<ad::Tensor&>(target).data() = value.data();
    }
}

}  // namespace poselab::model
