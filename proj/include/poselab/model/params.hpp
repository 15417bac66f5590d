#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "poselab/ad/tensor.hpp"
#include "poselab/util/error.hpp"
#include "poselab/util/rng.hpp"

namespace poselab::model {

// Owns every learnable tensor of a network, in registration order. The
// optimizer iterates this list; checkpoints serialize it by name.
class ParamRegistry {
public:
    explicit ParamRegistry(std::uint64_t seed) : gen_(rng::mix(seed, 0x70617261ull)) {}

    // uniform in [-bound, bound]
    ad::Tensor uniform(const std::string& name, ad::Shape shape, double bound) {
        std::vector<double> v(ad::shape_numel(shape));
        for (auto& x : v) x = gen_.uniform(-bound, bound);
        return add(name, ad::Tensor(std::move(shape), std::move(v), true));
    }

    // fan-in scaled init: bound = 1/sqrt(fan_in)
    ad::Tensor fan_in_uniform(const std::string& name, ad::Shape shape,
                              int fan_in) {
        return uniform(name, std::move(shape), 1.0 / std::sqrt(fan_in));
    }

    ad::Tensor constant(const std::string& name, ad::Shape shape, double value) {
        std::vector<double> v(ad::shape_numel(shape), value);
        return add(name, ad::Tensor(std::move(shape), std::move(v), true));
    }

    ad::Tensor add(const std::string& name, ad::Tensor t) {
        if (find(name) != nullptr)
            throw std::invalid_argument("params: duplicate name '" + name + "'");
        entries_.emplace_back(name, t);
        return t;
    }

    const ad::Tensor* find(const std::string& name) const {
        for (const auto& [n, t] : entries_)
            if (n == name) return &t;
        return nullptr;
    }

    const std::vector<std::pair<std::string, ad::Tensor>>& entries() const {
        return entries_;
    }

    std::vector<ad::Tensor> tensors() const {
        std::vector<ad::Tensor> out;
        out.reserve(entries_.size());
        for (const auto& [n, t] : entries_) out.push_back(t);
        return out;
    }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& [name, t] : entries_) n += t.numel();
        return n;
    }

    void zero_grad() {
        for (auto& [name, t] : entries_) t.zero_grad();
    }

    bool all_finite() const {
        for (const auto& [name, t] : entries_)
            for (double v : t.data())
                if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::vector<std::pair<std::string, ad::Tensor>> entries_;
    rng::Generator gen_;
};

}  // namespace poselab::model
