#pragma once

#include <functional>
#include <vector>

#include "xda/tensor.hpp"

namespace xda {

class Tape;

/// Result of Tape::backward — one gradient per recorded node, with leaves
/// guaranteed present (zeros when the loss does not reach them).
class GradMap {
 public:
    /// Gradient of the loss w.r.t. a watched leaf.
    const Tensor& at(const Tensor& leaf) const;
    bool contains(const Tensor& t) const;

 private:
    friend class Tape;
    std::uint64_t serial_ = 0;
    std::vector<Tensor> grads_;
    std::vector<bool> is_leaf_;
};

/// Single-writer record of a forward computation: an append-only list of
/// primitive ops in topological order. Ops record themselves onto the tape
/// that is active in the current thread (see TapeScope); tensors bound to any
/// other tape are treated as constants, which is what detaches the
/// segmentation outputs between the alternating min-max passes.
class Tape {
 public:
    // Returns the gradient w.r.t. each input slot; an input that needs no
    // gradient may be left default-constructed.
    using BackwardFn = std::function<std::vector<Tensor>(const Tensor& grad_out)>;

    Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Registers `leaf` as a differentiable input and binds it to this tape.
    int watch(Tensor& leaf);

    /// Records one primitive op whose output is `out`. `inputs` holds the
    /// node ids of the op's tracked inputs (-1 for constants).
    int record(Tensor& out, std::vector<int> inputs, BackwardFn backward);

    /// Reverse sweep from a recorded scalar loss. Visits every node exactly
    /// once, in reverse topological order.
    GradMap backward(const Tensor& loss) const;

    std::uint64_t serial() const { return serial_; }
    std::size_t node_count() const { return nodes_.size(); }

    static Tape* active();

 private:
    friend class TapeScope;

    struct Node {
        std::vector<int> inputs;
        Shape shape;
        BackwardFn backward;  // empty for leaves
    };

    std::vector<Node> nodes_;
    std::uint64_t serial_;
};

/// RAII guard making a tape the active recording target for this thread.
class TapeScope {
 public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

 private:
    Tape* previous_;
};

/// Node id of `t` on the active tape, or -1 when `t` is a constant there.
int live_node(const Tensor& t);

}  // namespace xda
