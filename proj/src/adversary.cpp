#include "xda/adversary.hpp"

#include <cmath>

#include "xda/error.hpp"
#include "xda/init.hpp"
#include "xda/ops.hpp"
#include "xda/segnet.hpp"

namespace xda {

std::vector<int> DiscriminatorParams::widths(double width_mult) {
    std::vector<int> w;
    for (const int base : {64, 128, 256, 512}) {
        w.push_back(std::max(1, static_cast<int>(std::lround(base * width_mult))));
    }
    w.push_back(1);
    return w;
}

DiscriminatorParams DiscriminatorParams::init(int in_channels, double width_mult,
                                              std::mt19937_64& rng) {
    if (width_mult <= 0.0) throw ContractError("discriminator width multiplier must be positive");
    const std::vector<int> w = widths(width_mult);
    const double gain = leaky_gain(kLeakySlope);

    DiscriminatorParams p;
    int c_in = in_channels;
    for (int layer = 0; layer < kLayers; ++layer) {
        const int c_out = w[static_cast<std::size_t>(layer)];
        const double g = layer + 1 < kLayers ? gain : 1.0;
        p.weights.push_back(kaiming_uniform({c_out, c_in, 4, 4}, c_in * 16, g, rng));
        p.biases.push_back(Tensor::zeros({c_out}));
        c_in = c_out;
    }
    return p;
}

std::vector<Tensor*> DiscriminatorParams::params() {
    std::vector<Tensor*> out;
    for (int layer = 0; layer < kLayers; ++layer) {
        out.push_back(&weights[static_cast<std::size_t>(layer)]);
        out.push_back(&biases[static_cast<std::size_t>(layer)]);
    }
    return out;
}

Tensor discriminate(const DiscriminatorParams& d, const Tensor& seg, std::vector<Tensor>* trace) {
    if (seg.rank() != 3 || seg.dim(0) != d.weights[0].dim(1)) {
        throw DimensionError("discriminate: input " + shape_str(seg.shape()) + " does not have " +
                             std::to_string(d.weights[0].dim(1)) + " channels");
    }
    Tensor x = seg;
    for (int layer = 0; layer < DiscriminatorParams::kLayers; ++layer) {
        const std::size_t l = static_cast<std::size_t>(layer);
        x = conv2d(x, d.weights[l], d.biases[l], 2, 1);
        if (layer + 1 < DiscriminatorParams::kLayers) {
            x = leaky_relu(x, DiscriminatorParams::kLeakySlope);
        }
        if (trace != nullptr) trace->push_back(x);
    }
    return x;
}

Tensor adv_loss_d(const DiscriminatorParams& d, const Tensor& src_out, const Tensor& tgt_out) {
    // -log sigmoid(z) = softplus(-z),  -log(1 - sigmoid(z)) = softplus(z)
    const Tensor src_logits = discriminate(d, src_out);
    const Tensor tgt_logits = discriminate(d, tgt_out);
    return add(mean(softplus(scale(src_logits, -1.0))), mean(softplus(tgt_logits)));
}

Tensor adv_loss_g(const DiscriminatorParams& d, const Tensor& tgt_out) {
    return mean(softplus(scale(discriminate(d, tgt_out), -1.0)));
}

AdvLoss total_adv_loss_g(const DiscriminatorParams& d1, const DiscriminatorParams* d2,
                         const DiscriminatorParams* d3, const SegOutputs& outputs) {
    AdvLoss loss;
    loss.total = adv_loss_g(d1, outputs.z_t);
    loss.components[0] = loss.total.item();
    if (d2 != nullptr) {
        const Tensor term = adv_loss_g(*d2, outputs.a_t);
        loss.components[1] = term.item();
        loss.total = add(loss.total, term);
    }
    if (d3 != nullptr) {
        const Tensor term = adv_loss_g(*d3, outputs.b_t);
        loss.components[2] = term.item();
        loss.total = add(loss.total, term);
    }
    return loss;
}

AdvLoss total_adv_loss_d(const DiscriminatorParams& d1, const DiscriminatorParams* d2,
                         const DiscriminatorParams* d3, const SegOutputs& outputs) {
    AdvLoss loss;
    loss.total = adv_loss_d(d1, outputs.z_s, outputs.z_t);
    loss.components[0] = loss.total.item();
    if (d2 != nullptr) {
        const Tensor term = adv_loss_d(*d2, outputs.a_s, outputs.a_t);
        loss.components[1] = term.item();
        loss.total = add(loss.total, term);
    }
    if (d3 != nullptr) {
        const Tensor term = adv_loss_d(*d3, outputs.b_s, outputs.b_t);
        loss.components[2] = term.item();
        loss.total = add(loss.total, term);
    }
    return loss;
}

void SgdMomentum::step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
                       double lr) {
    if (velocity_.empty()) {
        for (const Tensor* p : params) velocity_.push_back(Tensor::zeros(p->shape()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        Tensor& v = velocity_[i];
        const Tensor& g = grads[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
            v[k] = momentum_ * v[k] + g[k];
            p[k] -= lr * v[k];
        }
    }
}

void Adam::step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads, double lr) {
    if (m_.empty()) {
        for (const Tensor* p : params) {
            m_.push_back(Tensor::zeros(p->shape()));
            v_.push_back(Tensor::zeros(p->shape()));
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        const Tensor& g = grads[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
            v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
            p[k] -= lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + eps_);
        }
    }
}

}  // namespace xda
