#pragma once

// Adam with bias correction. Defaults are lr 1e-4, beta1 0.9, beta2 0.999,
// eps 1e-8. A non-finite gradient rejects the whole step before any state
// (moments, counter, parameters) is touched.

#include <cmath>
#include <iostream>
#include <vector>

#include "poselab/ad/tensor.hpp"
#include "poselab/util/error.hpp"

namespace poselab::train {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class AdamOptimizer {
public:
    explicit AdamOptimizer(std::vector<ad::Tensor> params, AdamConfig cfg = {})
        : cfg_(cfg), params_(std::move(params)) {
        m_.reserve(params_.size());
        v_.reserve(params_.size());
        for (const auto& p : params_) {
            m_.emplace_back(p.numel(), 0.0);
            v_.emplace_back(p.numel(), 0.0);
        }
    }

    // Absent gradients count as zero (a parameter the loss did not reach).
    void step() {
        for (std::size_t pi = 0; pi < params_.size(); ++pi) {
            if (!params_[pi].has_grad()) continue;
            for (double g : params_[pi].grad())
                if (!std::isfinite(g)) {
                    std::cerr << "adam: non-finite gradient in parameter " << pi
                              << ", step " << (t_ + 1)
                              << " rejected, parameters untouched\n";
                    throw NumericalError("adam: non-finite gradient, step rejected");
                }
        }

        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t pi = 0; pi < params_.size(); ++pi) {
            auto& data = params_[pi].data();
            auto& m = m_[pi];
            auto& v = v_[pi];
            const bool has = params_[pi].has_grad();
            for (std::size_t i = 0; i < data.size(); ++i) {
                const double g = has ? params_[pi].grad()[i] : 0.0;
                m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
                v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
                const double m_hat = m[i] / bc1;
                const double v_hat = v[i] / bc2;
                data[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
            }
        }
    }

    long step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<ad::Tensor>& params() const { return params_; }

private:
    AdamConfig cfg_;
    std::vector<ad::Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    long t_ = 0;
};

}  // namespace poselab::train
