#pragma once

#include <array>
#include <random>
#include <utility>
#include <vector>

#include "xda/label_map.hpp"
#include "xda/tensor.hpp"
#include "xda/xattn.hpp"

namespace xda {

/// Three stride-2 conv blocks (3x3, pad 1, leaky 0.2) taking 3xHxW images to
/// C x H/8 x W/8 features.
struct EncoderParams {
    static constexpr double kLeakySlope = 0.2;
    Tensor w1, b1;  // 8 x 3 x 3 x 3
    Tensor w2, b2;  // 16 x 8 x 3 x 3
    Tensor w3, b3;  // C x 16 x 3 x 3

    static EncoderParams init(int c, std::mt19937_64& rng);
    std::vector<Tensor*> params();
};

Tensor extract_features(const Tensor& image, const EncoderParams& p);

/// Resizes the feature with the larger spatial area to the other's H x W
/// (ties resize the second argument); equal sizes pass through untouched.
std::pair<Tensor, Tensor> match_sizes(const Tensor& f_s, const Tensor& f_t);

/// The two parallel 1x1 convs producing the spatial (A) and channel (B)
/// feature pairs; shared across domains.
struct ProjectionParams {
    Tensor w_a, b_a;  // C x C x 1 x 1
    Tensor w_b, b_b;

    static ProjectionParams init(int c, std::mt19937_64& rng);
    std::vector<Tensor*> params();
};

struct ProjectedPairs {
    SpatialPair spatial;
    ChannelPair channel;
};

ProjectedPairs project(const Tensor& f_s, const Tensor& f_t, const ProjectionParams& p);

/// 1x1 conv fusing the concatenated attention outputs back to C channels.
struct AggregationParams {
    Tensor w, b;  // C x 2C x 1 x 1

    static AggregationParams init(int c, std::mt19937_64& rng);
    std::vector<Tensor*> params();
};

Tensor aggregate(const Tensor& a, const Tensor& b, const AggregationParams& p);

/// 1x1 conv to L class logits, bilinear upsample, per-pixel softmax.
struct ClassifierParams {
    Tensor w, b;  // L x C x 1 x 1

    static ClassifierParams init(int num_classes, int c, std::mt19937_64& rng);
    std::vector<Tensor*> params();
};

/// Per-pixel class probabilities, L x out_h x out_w.
Tensor classify(const Tensor& z, const ClassifierParams& p, int out_h, int out_w);

/// Mean negative log-probability of the labeled class over non-ignored
/// pixels; 0 (with no gradient) when every pixel is ignored.
Tensor segmentation_loss(const Tensor& pred, const LabelMap& label);

/// The six classifier outputs scored in the overall segmentation loss.
struct SegOutputs {
    Tensor z_s, z_t;  // aggregated features
    Tensor a_s, a_t;  // spatial-branch features
    Tensor b_s, b_t;  // channel-branch features

    std::array<const Tensor*, 6> ordered() const { return {&z_s, &z_t, &a_s, &a_t, &b_s, &b_t}; }
};

struct SegLoss {
    Tensor total;
    std::array<double, 6> components{};  // z_s, z_t, a_s, a_t, b_s, b_t
};

/// Unweighted sum of the six per-output losses; source outputs score against
/// y_s, target outputs against the pseudo-labels y_t.
SegLoss total_seg_loss(const SegOutputs& outputs, const LabelMap& y_s, const LabelMap& y_t);

}  // namespace xda
