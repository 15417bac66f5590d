#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace poselab::ad {

using Shape = std::vector<int>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

class Tape;

struct TensorNode {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until backward reaches this node
    bool requires_grad = false;
    const Tape* tape = nullptr;  // tape that recorded the producing op
    std::uint64_t tape_generation = 0;
};

// Cheap shared handle to a tensor node; copies alias the same storage.
// Values are 64-bit throughout: the gradient checker needs the headroom.
class Tensor {
public:
    Tensor() = default;

    Tensor(Shape shape, std::vector<double> value, bool requires_grad = false)
        : node_(std::make_shared<TensorNode>()) {
        if (shape_numel(shape) != value.size())
            throw std::invalid_argument("tensor: shape " + shape_str(shape) +
                                        " does not match " +
                                        std::to_string(value.size()) + " values");
        for (int d : shape)
            if (d <= 0)
                throw std::invalid_argument("tensor: non-positive dimension in " +
                                            shape_str(shape));
        node_->shape = std::move(shape);
        node_->value = std::move(value);
        node_->requires_grad = requires_grad;
    }

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        std::vector<double> v(shape_numel(shape), 0.0);
        return Tensor(std::move(shape), std::move(v), requires_grad);
    }

    static Tensor scalar(double v, bool requires_grad = false) {
        return Tensor({1}, {v}, requires_grad);
    }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t numel() const { return node_->value.size(); }
    bool requires_grad() const { return node_->requires_grad; }

    std::vector<double>& data() { return node_->value; }
    const std::vector<double>& data() const { return node_->value; }

    bool has_grad() const { return !node_->grad.empty(); }
    const std::vector<double>& grad() const {
        if (node_->grad.empty())
            throw std::runtime_error("tensor: gradient absent (no backward pass "
                                     "reached this tensor)");
        return node_->grad;
    }
    void zero_grad() { node_->grad.clear(); }

    double item() const {
        if (numel() != 1)
            throw std::invalid_argument("tensor: item() on non-scalar shape " +
                                        shape_str(shape()));
        return node_->value[0];
    }

    bool is_scalar() const { return numel() == 1; }

    TensorNode* node() const { return node_.get(); }
    const std::shared_ptr<TensorNode>& node_ptr() const { return node_; }

private:
    std::shared_ptr<TensorNode> node_;
};

// Ordered record of executed operations. One tape per training step; reset
// drops all closures and thus all tensor references. Single-threaded.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape*& active() {
        static thread_local Tape* current = nullptr;
        return current;
    }

    void record(std::shared_ptr<TensorNode> output,
                std::function<void()> backward_fn) {
        ops_.push_back({std::move(output), std::move(backward_fn)});
    }

    std::size_t size() const { return ops_.size(); }
    std::uint64_t generation() const { return generation_; }

    void reset() {
        ops_.clear();
        ++generation_;
    }

    // Replays recorded ops in exact reverse execution order. Gradients of op
    // outputs are transient per pass; only leaf gradients accumulate across
    // repeated backward calls.
    void run_backward() {
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) it->fn();
    }

    void clear_output_grads() {
        for (auto& op : ops_) op.output->grad.clear();
    }

private:
    struct Entry {
        std::shared_ptr<TensorNode> output;
        std::function<void()> fn;
    };
    std::vector<Entry> ops_;
    std::uint64_t generation_ = 1;
};

class TapeScope {
public:
    explicit TapeScope(Tape& tape) : prev_(Tape::active()) {
        Tape::active() = &tape;
    }
    ~TapeScope() { Tape::active() = prev_; }
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

private:
    Tape* prev_;
};

inline void ensure_grad(TensorNode* n) {
    if (n->grad.empty()) n->grad.assign(n->value.size(), 0.0);
}

// Seeds d(output)/d(output) = 1 and replays the active tape backward.
inline void backward(const Tensor& output) {
    if (!output.is_scalar())
        throw std::invalid_argument("backward: output must be scalar, got " +
                                    shape_str(output.shape()));
    Tape* tape = Tape::active();
    if (tape == nullptr)
        throw std::runtime_error("backward: no active tape");
    if (output.node()->tape != tape ||
        output.node()->tape_generation != tape->generation())
        throw std::runtime_error("backward: output was not produced on the "
                                 "active tape (or the tape was reset)");
    tape->clear_output_grads();
    ensure_grad(output.node());
    output.node()->grad[0] = 1.0;
    tape->run_backward();
}

}  // namespace poselab::ad
