#pragma once

#include <array>
#include <random>
#include <vector>

#include "xda/tensor.hpp"

namespace xda {

/// Fully convolutional patch discriminator: 5 conv layers, kernel 4, stride
/// 2, padding 1, leaky ReLU 0.2 after every layer but the last. Channel
/// widths are {64,128,256,512}*width_mult followed by a single logit channel.
struct DiscriminatorParams {
    static constexpr double kLeakySlope = 0.2;
    static constexpr int kLayers = 5;

    std::vector<Tensor> weights;  // kLayers entries
    std::vector<Tensor> biases;

    static DiscriminatorParams init(int in_channels, double width_mult, std::mt19937_64& rng);
    static std::vector<int> widths(double width_mult);
    std::vector<Tensor*> params();
};

/// Raw patch logits, 1 x h x w. `trace` (when given) receives the activation
/// after every layer, in order.
Tensor discriminate(const DiscriminatorParams& d, const Tensor& seg,
                    std::vector<Tensor>* trace = nullptr);

/// Discriminator objective: source patches labeled real, target patches
/// fake; mean sigmoid cross-entropy per side.
Tensor adv_loss_d(const DiscriminatorParams& d, const Tensor& src_out, const Tensor& tgt_out);

/// Non-saturating generator objective: push target patches toward the
/// source label.
Tensor adv_loss_g(const DiscriminatorParams& d, const Tensor& tgt_out);

struct SegOutputs;  // segnet.hpp

struct AdvLoss {
    Tensor total;
    std::array<double, 3> components{};  // d1, d2, d3; zero for dropped terms
};

/// Sum of the generator-side losses over the three target-branch outputs.
/// D1 pairs the aggregated outputs, D2 the spatial branch, D3 the channel
/// branch; pass nullptr to drop a disabled branch.
AdvLoss total_adv_loss_g(const DiscriminatorParams& d1, const DiscriminatorParams* d2,
                         const DiscriminatorParams* d3, const SegOutputs& outputs);

/// Sum of the discriminator-side losses over the three output pairs.
AdvLoss total_adv_loss_d(const DiscriminatorParams& d1, const DiscriminatorParams* d2,
                         const DiscriminatorParams* d3, const SegOutputs& outputs);

/// Momentum SGD; the segmentation side of the min-max objective.
class SgdMomentum {
 public:
    explicit SgdMomentum(double momentum) : momentum_(momentum) {}
    void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads, double lr);

 private:
    double momentum_;
    std::vector<Tensor> velocity_;
};

/// Adam; drives the discriminators.
class Adam {
 public:
    Adam(double beta1, double beta2, double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}
    void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads, double lr);

 private:
    double beta1_, beta2_, eps_;
    int t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace xda
