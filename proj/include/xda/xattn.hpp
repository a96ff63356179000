#pragma once

#include <random>
#include <vector>

#include "xda/tensor.hpp"

namespace xda {

/// Matched source/target spatial feature maps, both C x H x W.
struct SpatialPair {
    Tensor a_s;
    Tensor a_t;
};

/// Matched source/target channel feature maps, both C x H x W.
struct ChannelPair {
    Tensor b_s;
    Tensor b_t;
};

/// Projection weights and residual coefficients of the spatial module.
/// The query conv reads the source feature, the key conv the target feature,
/// and one value conv is shared by both domains. All are 1x1, bias-free.
struct SamParams {
    Tensor w_q;  // C_r x C x 1 x 1
    Tensor w_k;  // C_r x C x 1 x 1 (ignored when share_qk)
    Tensor w_v;  // C   x C x 1 x 1
    double lambda_s = 1.0;
    double lambda_t = 1.0;
    bool share_qk = false;

    static SamParams init(int c, int c_r, std::mt19937_64& rng, bool share_qk = false);
    std::vector<Tensor*> params();
};

/// Residual coefficients of the channel module; the channel features are
/// used directly, so there is nothing to learn here.
struct CamParams {
    double xi_s = 1.0;
    double xi_t = 1.0;
};

/// Pairwise position similarities, N_s x N_t (row = source position).
struct SpatialEnergy {
    Tensor phi;
};

/// Pairwise channel similarities, C x C (row = source channel).
struct ChannelEnergy {
    Tensor theta;
};

struct SpatialEnergyResult {
    SpatialEnergy energy;
    Tensor v_s;  // C x N
    Tensor v_t;  // C x N
};

SpatialEnergyResult spatial_energy(const Tensor& a_s, const Tensor& a_t, const SamParams& p);

/// Row-stochastic source-to-target attention: softmax of phi over the target
/// index.
Tensor spatial_forward_attention(const SpatialEnergy& energy);

/// Column-stochastic target-to-source attention: softmax of phi over the
/// source index.
Tensor spatial_backward_attention(const SpatialEnergy& energy);

/// Bidirectional spatial cross-attention. Each side is the original feature
/// plus its coefficient times the attention-weighted value features of the
/// opposite domain; a zero coefficient leaves that side exactly unchanged.
SpatialPair cd_sam(const SpatialPair& pair, const SamParams& p);

ChannelEnergy channel_energy(const Tensor& b_s, const Tensor& b_t);
Tensor channel_forward_attention(const ChannelEnergy& energy);
Tensor channel_backward_attention(const ChannelEnergy& energy);

/// Bidirectional channel cross-attention over the raw channel features.
ChannelPair cd_cam(const ChannelPair& pair, const CamParams& p);

}  // namespace xda
