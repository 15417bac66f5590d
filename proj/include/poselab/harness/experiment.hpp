#pragma once

// End-to-end experiment runner: load manifests, train per configuration
// (epoch-doubling augmentation, FC frames or LSTM windows), evaluate train
// and test at the configured cadence, and write every artifact (config echo,
// step log, learning curves + SVG charts, per-frame error arrays, summary,
// checkpoint) deterministically from config + seed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>

#include "poselab/augment/augmentation.hpp"
#include "poselab/data/loader.hpp"
#include "poselab/harness/config.hpp"
#include "poselab/harness/evaluate.hpp"
#include "poselab/harness/svg.hpp"
#include "poselab/harness/tables.hpp"
#include "poselab/imaging/pipelines.hpp"
#include "poselab/model/checkpoint.hpp"
#include "poselab/synth/trajectory.hpp"

namespace poselab::harness {

inline imaging::Image apply_preprocessing(const imaging::Image& img,
                                          Preprocessing prep,
                                          std::uint64_t crop_seed) {
    switch (prep) {
        case Preprocessing::centered_crop:
            return imaging::centered_crop_pipeline(img);
        case Preprocessing::whole_fov:
            return imaging::whole_fov_resize(img);
        case Preprocessing::random_crop:
            return imaging::random_crop_pipeline(img, crop_seed);
    }
    throw std::logic_error("unreachable");
}

namespace detail {

// one logical training/eval item: sample indices (one for FC, a window for
// LSTM; the last index is the prediction target)
struct ItemSpec {
    std::vector<std::size_t> sample_indices;
};

inline std::vector<ItemSpec> item_specs(
    const std::vector<augment::Sample>& samples, const model::HeadConfig& head,
    int stride, bool include_synthetic) {
    std::vector<ItemSpec> items;
    if (head.kind == model::HeadKind::fc) {
        for (std::size_t i = 0; i < samples.size(); ++i)
            items.push_back({{i}});
        return items;
    }
    const int length = head.sequence_length;
    std::size_t i = 0;
    while (i < samples.size()) {
        const std::string& seq = samples[i].sequence_id;
        std::vector<std::size_t> run;
        while (i < samples.size() && samples[i].sequence_id == seq &&
               (run.empty() ||
                samples[i].synthetic == samples[run.back()].synthetic)) {
            if (include_synthetic || !samples[i].synthetic) run.push_back(i);
            ++i;
        }
        if (static_cast<int>(run.size()) < length) continue;
        for (std::size_t s = 0; s + static_cast<std::size_t>(length) <= run.size();
             s += static_cast<std::size_t>(stride))
            items.push_back({{run.begin() + static_cast<std::ptrdiff_t>(s),
                              run.begin() + static_cast<std::ptrdiff_t>(
                                                s + static_cast<std::size_t>(length))}});
    }
    return items;
}

inline train::TrainItem build_item(const std::vector<augment::Sample>& samples,
                                   const ItemSpec& spec, Preprocessing prep,
                                   std::uint64_t crop_seed_base) {
    train::TrainItem item;
    item.inputs.reserve(spec.sample_indices.size());
    for (std::size_t idx : spec.sample_indices)
        item.inputs.push_back(model::image_to_input(apply_preprocessing(
            samples[idx].image, prep, rng::mix(crop_seed_base, idx))));
    item.label = samples[spec.sample_indices.back()].label;
    return item;
}

struct StreamEval {
    EvalReport report;
    void add(const model::PoseRegressor& net, const train::TrainItem& item) {
        const auto pred = net.predict(item.inputs);
        const auto& xp = pred.position.data();
        report.position_errors.push_back(geometry::distance(
            geometry::Vec3{xp[0], xp[1], xp[2]}, item.label.position));
        const auto& qp = pred.orientation.data();
        report.orientation_errors.push_back(geometry::angular_distance_deg(
            item.label.orientation, geometry::UnitQuaternion::normalized(
                                        qp[0], qp[1], qp[2], qp[3])));
    }
    EvalReport finish() {
        if (report.position_errors.empty())
            throw std::invalid_argument("evaluate: empty evaluation set");
        report.median_position = median(report.position_errors);
        report.median_orientation = median(report.orientation_errors);
        return std::move(report);
    }
};

inline EvalReport evaluate_samples(const model::PoseRegressor& net,
                                   const std::vector<augment::Sample>& samples,
                                   const model::HeadConfig& head,
                                   Preprocessing prep, int stride) {
    StreamEval ev;
    for (const auto& spec : item_specs(samples, head, stride, false))
        ev.add(net, build_item(samples, spec, prep, 0));
    return ev.finish();
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_errors_csv(const std::filesystem::path& path,
                             const EvalReport& report) {
    std::ofstream out(path);
    out << "index,position_error_m,orientation_error_deg\n";
    for (std::size_t i = 0; i < report.position_errors.size(); ++i)
        out << i << "," << fmt(report.position_errors[i]) << ","
            << fmt(report.orientation_errors[i]) << "\n";
}

}  // namespace detail

struct RunResult {
    std::filesystem::path out_dir;
    EvalReport untrained_train, untrained_test;
    EvalReport final_train, final_test;
    bool has_test = false;
    // mean cosine similarity of consecutive-frame features through the
    // trained backbone (0 when fewer than two usable frames)
    double consecutive_feature_similarity = 0.0;
};

inline RunResult run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    RunResult result;
    result.out_dir = resolve_output_dir(cfg);
    fs::create_directories(result.out_dir);

    const auto echo = experiment_entries(cfg);
    {
        std::ofstream out(result.out_dir / "config.txt");
        for (const auto& [k, v] : echo) out << k << " = " << v << "\n";
    }

    const auto train_manifest = data::read_manifest(cfg.train_manifest);
    const auto train_samples = data::load_samples(
        train_manifest, fs::path(cfg.train_manifest).parent_path().string());
    if (train_samples.empty())
        throw DataError("run_experiment: empty training set");

    std::optional<data::DatasetManifest> test_manifest;
    std::vector<augment::Sample> test_samples;
    if (!cfg.test_manifest.empty()) {
        test_manifest = data::read_manifest(cfg.test_manifest);
        test_samples = data::load_samples(
            *test_manifest, fs::path(cfg.test_manifest).parent_path().string());
        result.has_test = !test_samples.empty();
    }

    model::PoseRegressor net(cfg.network, cfg.seed);
    train::AdaptiveLossState state(cfg.s_x_init, cfg.s_q_init);
    if (cfg.loss.kind == train::LossKind::adaptive) {
        net.params().add("loss.s_x", state.s_x);
        net.params().add("loss.s_q", state.s_q);
    }
    train::AdamOptimizer optimizer(net.params().tensors());

    // deterministic evaluation view; random crops evaluate on the centered
    // window
    const Preprocessing eval_prep = cfg.preprocessing == Preprocessing::random_crop
                                        ? Preprocessing::centered_crop
                                        : cfg.preprocessing;
    const auto& head = cfg.network.head;

    std::ofstream metrics_csv(result.out_dir / "metrics.csv");
    metrics_csv << "step,epoch,loss,s_x,s_q,grad_norm\n";
    std::ofstream curves_csv(result.out_dir / "curves.csv");
    curves_csv << "epoch,train_pos_m,train_ori_deg,test_pos_m,test_ori_deg\n";

    std::vector<double> curve_epochs, curve_train_pos, curve_train_ori,
        curve_test_pos, curve_test_ori;
    const auto run_eval = [&](int epoch) {
        auto tr = detail::evaluate_samples(net, train_samples, head, eval_prep,
                                           cfg.window_stride);
        curves_csv << epoch << "," << detail::fmt(tr.median_position) << ","
                   << detail::fmt(tr.median_orientation);
        curve_epochs.push_back(epoch);
        curve_train_pos.push_back(tr.median_position);
        curve_train_ori.push_back(tr.median_orientation);
        EvalReport te;
        if (result.has_test) {
            te = detail::evaluate_samples(net, test_samples, head, eval_prep,
                                          cfg.window_stride);
            curves_csv << "," << detail::fmt(te.median_position) << ","
                       << detail::fmt(te.median_orientation) << "\n";
            curve_test_pos.push_back(te.median_position);
            curve_test_ori.push_back(te.median_orientation);
        } else {
            curves_csv << ",,\n";
        }
        curves_csv.flush();
        return std::pair{std::move(tr), std::move(te)};
    };

    std::tie(result.untrained_train, result.untrained_test) = run_eval(0);
    result.final_train = result.untrained_train;
    result.final_test = result.untrained_test;

    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<augment::Sample>& epoch_samples =
            cfg.augment ? augment::augment_epoch(
                              train_samples, {cfg.augment_lo, cfg.augment_hi},
                              cfg.seed, static_cast<std::uint64_t>(epoch))
                        : train_samples;

        auto specs = detail::item_specs(epoch_samples, head, cfg.window_stride,
                                        cfg.augment_in_windows);
        rng::Generator shuffle_gen(
            rng::mix(cfg.seed, static_cast<std::uint64_t>(epoch), 0x5348ull));
        shuffle_gen.shuffle(specs);

        const std::uint64_t crop_seed_base =
            rng::mix(cfg.seed, static_cast<std::uint64_t>(epoch), 0x43524fll);
        for (std::size_t start = 0; start < specs.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(specs.size(),
                         start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<train::TrainItem> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i)
                batch.push_back(detail::build_item(epoch_samples, specs[i],
                                                   cfg.preprocessing,
                                                   crop_seed_base));
            const auto m = train::training_step(
                net, batch, cfg.loss, optimizer,
                cfg.loss.kind == train::LossKind::adaptive ? &state : nullptr);
            ++step;
            metrics_csv << step << "," << epoch + 1 << "," << detail::fmt(m.loss)
                        << "," << detail::fmt(m.s_x) << "," << detail::fmt(m.s_q)
                        << "," << detail::fmt(m.grad_norm) << "\n";
        }
        metrics_csv.flush();

        if ((epoch + 1) % cfg.eval_every == 0 || epoch + 1 == cfg.epochs)
            std::tie(result.final_train, result.final_test) = run_eval(epoch + 1);
    }

    // artifacts
    detail::write_errors_csv(result.out_dir / "eval_train.csv",
                             result.final_train);
    if (result.has_test)
        detail::write_errors_csv(result.out_dir / "eval_test.csv",
                                 result.final_test);

    write_svg_chart((result.out_dir / "curves_position.svg").string(),
                    "median position error [m]",
                    {{"train", "#1f77b4", curve_epochs, curve_train_pos},
                     {"test", "#d62728", curve_epochs, curve_test_pos}});
    write_svg_chart((result.out_dir / "curves_orientation.svg").string(),
                    "median orientation error [deg]",
                    {{"train", "#1f77b4", curve_epochs, curve_train_ori},
                     {"test", "#d62728", curve_epochs, curve_test_ori}});

    model::save_checkpoint((result.out_dir / "checkpoint.ckpt").string(), echo,
                           net.params());

    // consecutive-frame feature similarity through the trained backbone
    {
        double acc = 0.0;
        int pairs = 0;
        for (std::size_t i = 0; i + 1 < train_samples.size() && pairs < 50; ++i) {
            const auto& a = train_samples[i];
            const auto& b = train_samples[i + 1];
            if (a.sequence_id != b.sequence_id || a.synthetic || b.synthetic)
                continue;
            const auto fa = net.features(model::image_to_input(
                apply_preprocessing(a.image, eval_prep, 0)));
            const auto fb = net.features(model::image_to_input(
                apply_preprocessing(b.image, eval_prep, 0)));
            acc += model::feature_similarity(fa, fb);
            ++pairs;
        }
        if (pairs > 0) result.consecutive_feature_similarity = acc / pairs;
    }

    const std::string dataset_name =
        test_manifest ? test_manifest->name : train_manifest.name;
    {
        std::ofstream out(result.out_dir / "summary.txt");
        out << "name = " << cfg.name << "\n";
        out << "dataset = " << dataset_name << "\n";
        out << "column_key = " << cfg.column_key() << "\n";
        const auto& rep = result.has_test ? result.final_test : result.final_train;
        out << "median_position_m = " << detail::fmt(rep.median_position) << "\n";
        out << "median_orientation_deg = " << detail::fmt(rep.median_orientation)
            << "\n";
        out << "train_median_position_m = "
            << detail::fmt(result.final_train.median_position) << "\n";
        out << "train_median_orientation_deg = "
            << detail::fmt(result.final_train.median_orientation) << "\n";
        out << "untrained_median_position_m = "
            << detail::fmt(result.has_test
                               ? result.untrained_test.median_position
                               : result.untrained_train.median_position)
            << "\n";
        out << "consecutive_feature_similarity = "
            << detail::fmt(result.consecutive_feature_similarity) << "\n";
        out << "frames = " << train_samples.size() << "\n";
    }
    {
        // single-row markdown fragment; `report` assembles full tables
        std::ofstream out(result.out_dir / "table_row.md");
        const auto& rep = result.has_test ? result.final_test : result.final_train;
        out << "| " << dataset_name << " | " << format_meters(rep.median_position)
            << ", " << format_degrees(rep.median_orientation) << " | "
            << cfg.column_key() << " |\n";
    }
    return result;
}

// `report` subcommand support: collect summary.txt files under a directory
inline std::vector<RunSummary> collect_run_summaries(const std::string& runs_dir) {
    namespace fs = std::filesystem;
    std::vector<RunSummary> out;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(runs_dir))
        if (e.is_regular_file() && e.path().filename() == "summary.txt")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const auto entries = parse_config_file(f.string());
        RunSummary s;
        if (const auto* v = find_entry(entries, "dataset")) s.dataset = *v;
        if (const auto* v = find_entry(entries, "column_key")) s.column_key = *v;
        if (const auto* v = find_entry(entries, "median_position_m"))
            s.median_position = std::stod(*v);
        if (const auto* v = find_entry(entries, "median_orientation_deg"))
            s.median_orientation = std::stod(*v);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace poselab::harness
