#pragma once

// Line-oriented "key = value" configuration files, echoed verbatim into every
// output for provenance, plus the experiment configuration assembled from
// them. The POSELAB_OUT environment variable roots all relative output
// paths.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "poselab/model/network.hpp"
#include "poselab/train/trainer.hpp"
#include "poselab/util/error.hpp"

namespace poselab::harness {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

inline ConfigEntries parse_config_text(std::istream& in, const std::string& origin) {
    ConfigEntries entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw DataError(origin + ":" + std::to_string(line_no) +
                            ": expected 'key = value'");
        entries.emplace_back(detail::trim(t.substr(0, eq)),
                             detail::trim(t.substr(eq + 1)));
    }
    return entries;
}

inline ConfigEntries parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("config: cannot open " + path);
    return parse_config_text(in, path);
}

inline const std::string* find_entry(const ConfigEntries& entries,
                                     const std::string& key) {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

enum class Preprocessing { centered_crop, whole_fov, random_crop };

inline const char* to_string(Preprocessing p) {
    switch (p) {
        case Preprocessing::centered_crop: return "centered_crop";
        case Preprocessing::whole_fov: return "whole_fov";
        case Preprocessing::random_crop: return "random_crop";
    }
    return "whole_fov";
}

inline Preprocessing preprocessing_from(const std::string& s) {
    if (s == "centered_crop") return Preprocessing::centered_crop;
    if (s == "whole_fov") return Preprocessing::whole_fov;
    if (s == "random_crop") return Preprocessing::random_crop;
    throw DataError("config: unknown preprocessing '" + s + "'");
}

struct ExperimentConfig {
    std::string name = "run";
    std::string train_manifest;
    std::string test_manifest;
    Preprocessing preprocessing = Preprocessing::whole_fov;
    bool augment = false;
    double augment_lo = -20.0;
    double augment_hi = 20.0;
    bool augment_in_windows = false;  // ablation flag; default keeps windows real
    model::NetworkConfig network;
    train::LossSpec loss;
    double s_x_init = 0.0;
    double s_q_init = -3.0;
    int epochs = 50;
    int batch_size = 16;
    int eval_every = 1;
    int window_stride = 1;
    std::uint64_t seed = 1;
    std::string out;  // output directory; relative paths root at POSELAB_OUT

    // one canonical key per table-column role, used by the report grids
    std::string column_key() const {
        std::string key =
            network.head.kind == model::HeadKind::fc
                ? "fc"
                : "lstm" + std::to_string(network.head.sequence_length);
        key += "+";
        key += to_string(preprocessing);
        if (augment) key += "+aug";
        return key;
    }
};

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw DataError("config: boolean expected for '" + key + "', got '" + v + "'");
}

inline model::BackboneConfig backbone_from(const std::string& name) {
    if (name == "standard") return model::BackboneConfig::standard();
    if (name == "compact") return model::BackboneConfig::compact();
    throw DataError("config: unknown backbone '" + name +
                    "' (expected standard or compact)");
}

}  // namespace detail

inline ExperimentConfig experiment_from_entries(const ConfigEntries& entries) {
    ExperimentConfig cfg;
    bool fc_hidden_given = false;
    for (const auto& [key, value] : entries) {
        if (key == "name") cfg.name = value;
        else if (key == "train_manifest") cfg.train_manifest = value;
        else if (key == "test_manifest") cfg.test_manifest = value;
        else if (key == "preprocessing") cfg.preprocessing = preprocessing_from(value);
        else if (key == "augment") cfg.augment = detail::parse_bool(value, key);
        else if (key == "augment_range") {
            std::istringstream ss(value);
            if (!(ss >> cfg.augment_lo >> cfg.augment_hi))
                throw DataError("config: augment_range wants 'lo hi'");
        } else if (key == "augment_in_windows")
            cfg.augment_in_windows = detail::parse_bool(value, key);
        else if (key == "backbone") cfg.network.backbone = detail::backbone_from(value);
        else if (key == "inception")
            cfg.network.backbone.inception_block = detail::parse_bool(value, key);
        else if (key == "head") {
            if (value == "fc") cfg.network.head.kind = model::HeadKind::fc;
            else if (value == "lstm") cfg.network.head.kind = model::HeadKind::lstm;
            else throw DataError("config: head must be fc or lstm");
        } else if (key == "sequence_length")
            cfg.network.head.sequence_length = std::stoi(value);
        else if (key == "fc_hidden") {
            cfg.network.head.fc_hidden = std::stoi(value);
            fc_hidden_given = true;
        } else if (key == "lstm_units") cfg.network.head.lstm_units = std::stoi(value);
        else if (key == "lstm_layers") cfg.network.head.lstm_layers = std::stoi(value);
        else if (key == "lstm_shared")
            cfg.network.head.lstm_shared = detail::parse_bool(value, key);
        else if (key == "loss") {
            if (value == "adaptive") cfg.loss.kind = train::LossKind::adaptive;
            else if (value == "fixed_beta") cfg.loss.kind = train::LossKind::fixed_beta;
            else throw DataError("config: loss must be adaptive or fixed_beta");
        } else if (key == "beta") cfg.loss.beta = std::stod(value);
        else if (key == "s_x_init") cfg.s_x_init = std::stod(value);
        else if (key == "s_q_init") cfg.s_q_init = std::stod(value);
        else if (key == "epochs") cfg.epochs = std::stoi(value);
        else if (key == "batch_size") cfg.batch_size = std::stoi(value);
        else if (key == "eval_every") cfg.eval_every = std::stoi(value);
        else if (key == "window_stride") cfg.window_stride = std::stoi(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "out") cfg.out = value;
        else throw DataError("config: unknown key '" + key + "'");
    }
    // a compact backbone pairs with a narrower hidden layer unless overridden
    if (!fc_hidden_given && cfg.network.backbone.feature_dim() < 2048)
        cfg.network.head.fc_hidden = 256;
    if (cfg.train_manifest.empty())
        throw DataError("config: train_manifest is required");
    if (cfg.epochs < 0 || cfg.batch_size < 1 || cfg.eval_every < 1)
        throw DataError("config: epochs >= 0, batch_size >= 1, eval_every >= 1");
    cfg.network.validate();
    return cfg;
}

inline ExperimentConfig parse_experiment_config(const std::string& path) {
    return experiment_from_entries(parse_config_file(path));
}

// every knob, serialized back out (the provenance echo)
inline ConfigEntries experiment_entries(const ExperimentConfig& cfg) {
    ConfigEntries e;
    e.emplace_back("name", cfg.name);
    e.emplace_back("train_manifest", cfg.train_manifest);
    if (!cfg.test_manifest.empty()) e.emplace_back("test_manifest", cfg.test_manifest);
    e.emplace_back("preprocessing", to_string(cfg.preprocessing));
    e.emplace_back("augment", cfg.augment ? "true" : "false");
    e.emplace_back("augment_range", std::to_string(cfg.augment_lo) + " " +
                                        std::to_string(cfg.augment_hi));
    e.emplace_back("augment_in_windows", cfg.augment_in_windows ? "true" : "false");
    e.emplace_back("backbone",
                   cfg.network.backbone.feature_dim() ==
                           model::BackboneConfig::standard().feature_dim()
                       ? "standard"
                       : "compact");
    e.emplace_back("inception", cfg.network.backbone.inception_block ? "true" : "false");
    e.emplace_back("head",
                   cfg.network.head.kind == model::HeadKind::fc ? "fc" : "lstm");
    e.emplace_back("sequence_length",
                   std::to_string(cfg.network.head.sequence_length));
    e.emplace_back("fc_hidden", std::to_string(cfg.network.head.fc_hidden));
    e.emplace_back("lstm_units", std::to_string(cfg.network.head.lstm_units));
    e.emplace_back("lstm_layers", std::to_string(cfg.network.head.lstm_layers));
    e.emplace_back("lstm_shared", cfg.network.head.lstm_shared ? "true" : "false");
    e.emplace_back("loss", cfg.loss.kind == train::LossKind::adaptive
                               ? "adaptive"
                               : "fixed_beta");
    e.emplace_back("beta", std::to_string(cfg.loss.beta));
    e.emplace_back("s_x_init", std::to_string(cfg.s_x_init));
    e.emplace_back("s_q_init", std::to_string(cfg.s_q_init));
    e.emplace_back("epochs", std::to_string(cfg.epochs));
    e.emplace_back("batch_size", std::to_string(cfg.batch_size));
    e.emplace_back("eval_every", std::to_string(cfg.eval_every));
    e.emplace_back("window_stride", std::to_string(cfg.window_stride));
    e.emplace_back("seed", std::to_string(cfg.seed));
    e.emplace_back("column_key", cfg.column_key());
    return e;
}

// output root: $POSELAB_OUT when set, else the working directory
inline std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::path out = cfg.out.empty() ? fs::path(cfg.name) : fs::path(cfg.out);
    if (out.is_absolute()) return out;
    const char* root = std::getenv("POSELAB_OUT");
    return (root != nullptr ? fs::path(root) : fs::path(".")) / out;
}

}  // namespace poselab::harness
