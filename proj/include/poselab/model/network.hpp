#pragma once

// Backbone + head glued into one pose regressor, plus the image-to-tensor
// conversion (per-image, per-channel mean subtraction after the pipeline).

#include <memory>
#include <optional>
#include <span>

#include "poselab/imaging/image.hpp"
#include "poselab/model/backbone.hpp"
#include "poselab/model/heads.hpp"

namespace poselab::model {

struct NetworkConfig {
    BackboneConfig backbone;
    HeadConfig head;

    void validate() const { head.validate(); }
};

// Mean-subtracted {3, H, W} network input from a [0,1] image.
inline ad::Tensor image_to_input(const imaging::Image& img) {
    const auto means = imaging::channel_means(img);
    std::vector<double> v(static_cast<std::size_t>(3) * img.height * img.width);
    for (int ch = 0; ch < 3; ++ch)
        for (int r = 0; r < img.height; ++r)
            for (int c = 0; c < img.width; ++c)
                v[(static_cast<std::size_t>(ch) * img.height + r) * img.width + c] =
                    static_cast<double>(img.at(r, c, ch)) -
                    means[static_cast<std::size_t>(ch)];
    return ad::Tensor({3, img.height, img.width}, std::move(v));
}

class PoseRegressor {
public:
    PoseRegressor(const NetworkConfig& cfg, std::uint64_t seed)
        : cfg_(cfg), params_(seed) {
        cfg_.validate();
        backbone_.emplace(cfg_.backbone, params_);
        const int fdim = cfg_.backbone.feature_dim();
        if (cfg_.head.kind == HeadKind::fc)
            fc_head_.emplace(fdim, cfg_.head, params_);
        else
            lstm_head_.emplace(fdim, cfg_.head, params_);
    }

    ad::Tensor features(const ad::Tensor& image) const {
        return backbone_->forward(image);
    }

    // One image for the FC head, sequence_length images (oldest to newest,
    // target = last) for the LSTM head.
    PosePrediction predict(std::span<const ad::Tensor> images) const {
        if (cfg_.head.kind == HeadKind::fc) {
            if (images.size() != 1)
                throw std::invalid_argument(
                    "predict: FC head takes exactly one image");
            return fc_head_->forward(features(images[0]));
        }
        std::vector<ad::Tensor> feats;
        feats.reserve(images.size());
        for (const auto& img : images) feats.push_back(features(img));
        return lstm_head_->forward(feats);
    }

    PosePrediction predict_one(const ad::Tensor& image) const {
        return predict(std::span<const ad::Tensor>(&image, 1));
    }

    const NetworkConfig& config() const { return cfg_; }
    ParamRegistry& params() { return params_; }
    const ParamRegistry& params() const { return params_; }

private:
    NetworkConfig cfg_;
    ParamRegistry params_;
    std::optional<Backbone> backbone_;
    std::optional<FcHead> fc_head_;
    std::optional<LstmHead> lstm_head_;
};

}  // namespace poselab::model
