#pragma once

// Small trainable convolutional feature extractor: a few conv/ReLU/max-pool
// stages with an optional four-branch inception block, flattened to a
// feature vector. Two presets: `standard` (deeper, for full-scale runs) and
// `compact` (stride-heavy, fast enough to train on a single CPU core).

#include <string>
#include <vector>

#include "poselab/ad/ops.hpp"
#include "poselab/model/params.hpp"

namespace poselab::model {

struct ConvStage {
    int out_channels = 16;
    int kernel = 3;
    int stride = 1;
    bool pool = true;  // 2x2 max-pool after the activation
};

// branch widths: 1x1, 1x1->3x3 (reduce, out), 1x1->5x5 (reduce, out),
// 3x3 max-pool -> 1x1
struct InceptionConfig {
    int b1 = 8;
    int reduce3 = 4, b3 = 8;
    int reduce5 = 2, b5 = 4;
    int pool_proj = 4;
    int out_channels() const { return b1 + b3 + b5 + pool_proj; }
};

struct BackboneConfig {
    std::vector<ConvStage> stages;
    bool inception_block = false;
    InceptionConfig inception;
    int input_h = 224;
    int input_w = 224;

    static BackboneConfig standard() {
        BackboneConfig c;
        c.stages = {{16, 3, 1, true}, {32, 3, 1, true},
                    {64, 3, 1, true}, {64, 3, 1, true}};
        return c;
    }

    static BackboneConfig compact() {
        BackboneConfig c;
        c.stages = {{8, 5, 4, true}, {16, 3, 2, true}};
        return c;
    }

    std::pair<int, int> spatial_out() const {
        int h = input_h, w = input_w;
        for (const auto& s : stages) {
            const int pad = s.kernel / 2;
            h = (h + 2 * pad - s.kernel) / s.stride + 1;
            w = (w + 2 * pad - s.kernel) / s.stride + 1;
            if (s.pool) {
                h = (h - 2) / 2 + 1;
                w = (w - 2) / 2 + 1;
            }
        }
        return {h, w};
    }

    int channels_out() const {
        int c = stages.empty() ? 3 : stages.back().out_channels;
        if (inception_block) c = inception.out_channels();
        return c;
    }

    // flattened length of the final stage's output
    int feature_dim() const {
        const auto [h, w] = spatial_out();
        return channels_out() * h * w;
    }
};

namespace detail {

inline ad::Tensor conv_relu(const ad::Tensor& x, const ad::Tensor& w,
                            const ad::Tensor& b, int stride, int pad) {
    return ad::relu(ad::conv2d(x, w, b, stride, pad));
}

}  // namespace detail

// Four parallel branches over the same input, concatenated along channels;
// spatial size preserved via padding. Rejects inputs smaller than the
// largest branch kernel.
class InceptionBlock {
public:
    InceptionBlock(const InceptionConfig& cfg, int in_channels,
                   ParamRegistry& reg, const std::string& prefix)
        : cfg_(cfg) {
        auto conv = [&](const std::string& name, int out_c, int in_c, int k) {
            const int fan_in = in_c * k * k;
            w_.push_back(reg.fan_in_uniform(prefix + "." + name + ".w",
                                            {out_c, in_c, k, k}, fan_in));
            b_.push_back(reg.constant(prefix + "." + name + ".b", {out_c}, 0.0));
        };
        conv("b1", cfg.b1, in_channels, 1);
        conv("r3", cfg.reduce3, in_channels, 1);
        conv("b3", cfg.b3, cfg.reduce3, 3);
        conv("r5", cfg.reduce5, in_channels, 1);
        conv("b5", cfg.b5, cfg.reduce5, 5);
        conv("pp", cfg.pool_proj, in_channels, 1);
    }

    ad::Tensor forward(const ad::Tensor& x) const {
        if (x.shape().size() != 3 || x.shape()[1] < 5 || x.shape()[2] < 5)
            throw std::invalid_argument(
                "inception: input must be CxHxW with H, W >= 5, got " +
                ad::shape_str(x.shape()));
        auto branch1 = detail::conv_relu(x, w_[0], b_[0], 1, 0);
        auto branch3 = detail::conv_relu(
            detail::conv_relu(x, w_[1], b_[1], 1, 0), w_[2], b_[2], 1, 1);
        auto branch5 = detail::conv_relu(
            detail::conv_relu(x, w_[3], b_[3], 1, 0), w_[4], b_[4], 1, 2);
        auto pooled = detail::conv_relu(ad::max_pool2d(x, 3, 1, 1), w_[5], b_[5],
                                        1, 0);
        return ad::concat({branch1, branch3, branch5, pooled}, 0);
    }

private:
    InceptionConfig cfg_;
    std::vector<ad::Tensor> w_, b_;
};

class Backbone {
public:
    Backbone(const BackboneConfig& cfg, ParamRegistry& reg) : cfg_(cfg) {
        int in_c = 3;
        for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
            const auto& s = cfg.stages[i];
            const std::string prefix = "backbone.conv" + std::to_string(i);
            const int fan_in = in_c * s.kernel * s.kernel;
            w_.push_back(reg.fan_in_uniform(
                prefix + ".w", {s.out_channels, in_c, s.kernel, s.kernel},
                fan_in));
            b_.push_back(reg.constant(prefix + ".b", {s.out_channels}, 0.0));
            in_c = s.out_channels;
        }
        if (cfg.inception_block)
            inception_.emplace(cfg.inception, in_c, reg, "backbone.mixed");
    }

    // img: {3, input_h, input_w} -> {feature_dim}
    ad::Tensor forward(const ad::Tensor& img) const {
        const ad::Shape expected{3, cfg_.input_h, cfg_.input_w};
        if (img.shape() != expected)
            throw std::invalid_argument("backbone: expected input " +
                                        ad::shape_str(expected) + ", got " +
                                        ad::shape_str(img.shape()));
        ad::Tensor x = img;
        for (std::size_t i = 0; i < cfg_.stages.size(); ++i) {
            const auto& s = cfg_.stages[i];
            x = detail::conv_relu(x, w_[i], b_[i], s.stride, s.kernel / 2);
            if (s.pool) x = ad::max_pool2d(x, 2, 2);
        }
        if (inception_) x = inception_->forward(x);
        return ad::reshape(x, {cfg_.feature_dim()});
    }

    const BackboneConfig& config() const { return cfg_; }

private:
    BackboneConfig cfg_;
    std::vector<ad::Tensor> w_, b_;
    std::optional<InceptionBlock> inception_;
};

}  // namespace poselab::model
