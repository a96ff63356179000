#include "xda/tape.hpp"

#include <atomic>
#include <utility>

#include "xda/error.hpp"

namespace xda {

namespace {
std::atomic<std::uint64_t> g_next_serial{1};
thread_local Tape* g_active_tape = nullptr;
}  // namespace

Tape::Tape() : serial_(g_next_serial.fetch_add(1)) {}

Tape* Tape::active() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }

TapeScope::~TapeScope() { g_active_tape = previous_; }

int live_node(const Tensor& t) {
    Tape* tape = Tape::active();
    if (tape == nullptr || t.tape_node() < 0 || t.tape_serial() != tape->serial()) return -1;
    return t.tape_node();
}

int Tape::watch(Tensor& leaf) {
    if (!leaf.defined()) throw ContractError("cannot watch an undefined tensor");
    Node node;
    node.shape = leaf.shape();
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(node));
    leaf.bind_tape(serial_, id);
    return id;
}

int Tape::record(Tensor& out, std::vector<int> inputs, BackwardFn backward) {
    Node node;
    node.inputs = std::move(inputs);
    node.shape = out.shape();
    node.backward = std::move(backward);
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(node));
    out.bind_tape(serial_, id);
    return id;
}

GradMap Tape::backward(const Tensor& loss) const {
    if (!loss.is_scalar()) {
        throw ContractError("backward requires a scalar loss, got shape " + shape_str(loss.shape()));
    }
    if (loss.tape_serial() != serial_ || loss.tape_node() < 0) {
        throw ContractError("loss is not recorded on this tape");
    }

    GradMap result;
    result.serial_ = serial_;
    result.grads_.resize(nodes_.size());
    result.is_leaf_.resize(nodes_.size());

    for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
        result.is_leaf_[idx] = !nodes_[idx].backward;
    }

    const int loss_id = loss.tape_node();
    result.grads_[static_cast<std::size_t>(loss_id)] = Tensor::scalar(1.0);

    for (int id = loss_id; id >= 0; --id) {
        const std::size_t idx = static_cast<std::size_t>(id);
        const Node& node = nodes_[idx];
        if (!node.backward) continue;
        Tensor& grad_out = result.grads_[idx];
        if (!grad_out.defined()) continue;  // unreachable from the loss

        std::vector<Tensor> grad_in = node.backward(grad_out);
        for (std::size_t k = 0; k < node.inputs.size(); ++k) {
            const int src = node.inputs[k];
            if (src < 0 || !grad_in[k].defined()) continue;
            Tensor& slot = result.grads_[static_cast<std::size_t>(src)];
            if (!slot.defined()) {
                slot = std::move(grad_in[k]);
            } else {
                double* acc = slot.data();
                const double* add = grad_in[k].data();
                const std::size_t n = slot.size();
                for (std::size_t i = 0; i < n; ++i) acc[i] += add[i];
            }
        }
        grad_out = Tensor{};  // release intermediate gradients as we go
    }

    // Leaves the loss never reached still get a (zero) gradient.
    for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
        if (result.is_leaf_[idx] && !result.grads_[idx].defined()) {
            result.grads_[idx] = Tensor::zeros(nodes_[idx].shape);
        }
    }
    return result;
}

const Tensor& GradMap::at(const Tensor& leaf) const {
    if (!contains(leaf)) {
        throw ContractError("tensor is not a watched leaf of the tape backward() ran on");
    }
    return grads_[static_cast<std::size_t>(leaf.tape_node())];
}

bool GradMap::contains(const Tensor& t) const {
    if (t.tape_serial() != serial_ || t.tape_node() < 0) return false;
    const std::size_t idx = static_cast<std::size_t>(t.tape_node());
    return idx < grads_.size() && is_leaf_[idx];
}

}  // namespace xda
