#pragma once

// The two interchangeable regression heads. Both map backbone features to a
// 3-vector position and a 4-vector orientation; the orientation output is
// deliberately NOT normalized here — the loss penalizes the raw 4-vector
// against a unit-norm label, and normalization happens only at evaluation.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poselab/ad/ops.hpp"
#include "poselab/model/params.hpp"
#include "poselab/util/error.hpp"

namespace poselab::model {

enum class HeadKind { fc, lstm };

struct HeadConfig {
    HeadKind kind = HeadKind::fc;
    int fc_hidden = 2048;     // FC head only
    int lstm_units = 64;      // LSTM head only
    int sequence_length = 1;  // 1 for FC
    int lstm_layers = 1;      // stacked cells when > 1
    bool lstm_shared = false; // one cell feeding both output layers

    void validate() const {
        if (kind == HeadKind::fc && sequence_length != 1)
            throw std::invalid_argument("head: FC head requires sequence_length 1");
        if (sequence_length < 1)
            throw std::invalid_argument("head: sequence_length must be >= 1");
        if (fc_hidden < 1 || lstm_units < 1 || lstm_layers < 1)
            throw std::invalid_argument("head: sizes must be >= 1");
    }
};

namespace detail {

struct Linear {
    ad::Tensor w, b;
    Linear() = default;
    Linear(ParamRegistry& reg, const std::string& prefix, int out, int in)
        : w(reg.fan_in_uniform(prefix + ".w", {out, in}, in)),
          b(reg.constant(prefix + ".b", {out}, 0.0)) {}
    ad::Tensor forward(const ad::Tensor& x) const {
        return ad::add(ad::matmul(w, x), b);
    }
};

}  // namespace detail

struct PosePrediction {
    ad::Tensor position;     // {3}
    ad::Tensor orientation;  // {4}, raw (not unit norm)
};

// feature -> hidden ReLU layer -> parallel 3-unit and 4-unit linear layers
class FcHead {
public:
    FcHead(int feature_dim, const HeadConfig& cfg, ParamRegistry& reg)
        : hidden_(reg, "head.fc.hidden", cfg.fc_hidden, feature_dim),
          pos_(reg, "head.fc.pos", 3, cfg.fc_hidden),
          ori_(reg, "head.fc.ori", 4, cfg.fc_hidden) {}

    PosePrediction forward(const ad::Tensor& feature) const {
        const auto h = ad::relu(hidden_.forward(feature));
        return {pos_.forward(h), ori_.forward(h)};
    }

    // weights + biases of the hidden layer and the two output layers
    static std::size_t parameter_count(int feature_dim, int hidden) {
        return static_cast<std::size_t>(feature_dim) * hidden + hidden +
               static_cast<std::size_t>(hidden) * 3 + 3 +
               static_cast<std::size_t>(hidden) * 4 + 4;
    }

private:
    detail::Linear hidden_, pos_, ori_;
};

// One LSTM cell; gate order (input, forget, candidate, output) packed into a
// single [4U x (in + U)] weight. Forget-gate bias starts at 1, everything
// else at 0.
class LstmCell {
public:
    LstmCell(int input_dim, int units, ParamRegistry& reg,
             const std::string& prefix)
        : units_(units), input_dim_(input_dim) {
        const int fan_in = input_dim + units;
        w_ = reg.fan_in_uniform(prefix + ".w", {4 * units, fan_in}, fan_in);
        std::vector<double> bias(static_cast<std::size_t>(4) * units, 0.0);
        for (int i = units; i < 2 * units; ++i)
            bias[static_cast<std::size_t>(i)] = 1.0;  // forget gate block
        b_ = reg.add(prefix + ".b",
                     ad::Tensor({4 * units}, std::move(bias), true));
    }

    std::pair<ad::Tensor, ad::Tensor> zero_state() const {
        return {ad::Tensor::zeros({units_}), ad::Tensor::zeros({units_})};
    }

    // returns (h', c')
    std::pair<ad::Tensor, ad::Tensor> step(const ad::Tensor& x,
                                           const ad::Tensor& h,
                                           const ad::Tensor& c) const {
        if (h.shape() != ad::Shape{units_} || c.shape() != ad::Shape{units_})
            throw std::invalid_argument("lstm: state vectors must have length " +
                                        std::to_string(units_));
        const auto z = ad::add(ad::matmul(w_, ad::concat({x, h}, 0)), b_);
        const auto i = ad::sigmoid(ad::slice(z, 0, 0, units_));
        const auto f = ad::sigmoid(ad::slice(z, 0, units_, units_));
        const auto g = ad::tanh(ad::slice(z, 0, 2 * units_, units_));
        const auto o = ad::sigmoid(ad::slice(z, 0, 3 * units_, units_));
        const auto c_next = ad::add(ad::mul(f, c), ad::mul(i, g));
        const auto h_next = ad::mul(o, ad::tanh(c_next));
        return {h_next, c_next};
    }

    // final hidden state after consuming a feature sequence from zero state
    ad::Tensor run(std::span<const ad::Tensor> features) const {
        auto [h, c] = zero_state();
        for (const auto& x : features) {
            auto [h2, c2] = step(x, h, c);
            h = h2;
            c = c2;
        }
        return h;
    }

    int units() const { return units_; }

private:
    int units_, input_dim_;
    ad::Tensor w_, b_;
};

// Two parallel cells (or one shared, or stacks) consume the L-frame feature
// sequence oldest to newest; each final hidden state feeds a linear output
// layer. The prediction targets the newest frame.
class LstmHead {
public:
    LstmHead(int feature_dim, const HeadConfig& cfg, ParamRegistry& reg)
        : cfg_(cfg) {
        build_stack(feature_dim, reg, "head.lstm.pos", pos_cells_);
        if (!cfg.lstm_shared)
            build_stack(feature_dim, reg, "head.lstm.ori", ori_cells_);
        pos_out_ = detail::Linear(reg, "head.lstm.pos_out", 3, cfg.lstm_units);
        ori_out_ = detail::Linear(reg, "head.lstm.ori_out", 4, cfg.lstm_units);
    }

    PosePrediction forward(std::span<const ad::Tensor> features) const {
        if (static_cast<int>(features.size()) != cfg_.sequence_length)
            throw std::invalid_argument(
                "lstm head: got " + std::to_string(features.size()) +
                " frames, configured sequence_length is " +
                std::to_string(cfg_.sequence_length));
        const auto h_pos = run_stack(pos_cells_, features);
        const auto h_ori =
            cfg_.lstm_shared ? h_pos : run_stack(ori_cells_, features);
        return {pos_out_.forward(h_pos), ori_out_.forward(h_ori)};
    }

private:
    void build_stack(int feature_dim, ParamRegistry& reg,
                     const std::string& prefix, std::vector<LstmCell>& out) {
        int in_dim = feature_dim;
        for (int layer = 0; layer < cfg_.lstm_layers; ++layer) {
            out.emplace_back(in_dim, cfg_.lstm_units, reg,
                             prefix + std::to_string(layer));
            in_dim = cfg_.lstm_units;
        }
    }

    // layer k consumes the full hidden sequence of layer k-1
    ad::Tensor run_stack(const std::vector<LstmCell>& stack,
                         std::span<const ad::Tensor> features) const {
        std::vector<ad::Tensor> seq(features.begin(), features.end());
        ad::Tensor last;
        for (const auto& cell : stack) {
            auto [h, c] = cell.zero_state();
            std::vector<ad::Tensor> next;
            next.reserve(seq.size());
            for (const auto& x : seq) {
                auto [h2, c2] = cell.step(x, h, c);
                h = h2;
                c = c2;
                next.push_back(h);
            }
            last = h;
            seq = std::move(next);
        }
        return last;
    }

    HeadConfig cfg_;
    std::vector<LstmCell> pos_cells_, ori_cells_;
    detail::Linear pos_out_, ori_out_;
};

// Cosine similarity of two equal-length feature vectors.
inline double feature_similarity(const ad::Tensor& f1, const ad::Tensor& f2) {
    if (f1.shape() != f2.shape())
        throw std::invalid_argument("feature_similarity: shape mismatch " +
                                    ad::shape_str(f1.shape()) + " vs " +
                                    ad::shape_str(f2.shape()));
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < f1.numel(); ++i) {
        dot += f1.data()[i] * f2.data()[i];
        n1 += f1.data()[i] * f1.data()[i];
        n2 += f2.data()[i] * f2.data()[i];
    }
    if (n1 == 0.0 || n2 == 0.0)
        throw std::invalid_argument("feature_similarity: zero vector");
    return std::clamp(dot / std::sqrt(n1 * n2), -1.0, 1.0);
}

}  // namespace poselab::model
