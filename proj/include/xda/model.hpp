#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "xda/adversary.hpp"
#include "xda/segnet.hpp"
#include "xda/xattn.hpp"

namespace xda {

struct ModelConfig {
    int channels = 16;       // C
    int attn_channels = 4;   // C_r
    int num_classes = 5;     // L
    double disc_width_mult = 1.0;
    bool share_qk = false;
    double lambda_s = 1.0, lambda_t = 1.0;
    double xi_s = 1.0, xi_t = 1.0;
    double lambda_adv = 0.001;
};

/// Everything trainable plus the attention coefficients: encoder E,
/// projections, spatial/channel attention parameters, classifier G, and the
/// three output discriminators.
struct ModelBundle {
    ModelConfig config;
    EncoderParams encoder;
    ProjectionParams projection;
    SamParams sam;
    CamParams cam;
    AggregationParams aggregation;
    ClassifierParams classifier;
    DiscriminatorParams d1, d2, d3;

    static ModelBundle init(const ModelConfig& cfg, std::uint64_t seed);

    /// Parameters updated by the segmentation side of the min-max objective.
    std::vector<Tensor*> seg_params();
    /// Parameters updated by the discriminator side.
    std::vector<Tensor*> disc_params();
    std::vector<std::pair<std::string, Tensor*>> named_params();
};

struct PipelineToggles {
    bool cdsam = true;
    bool cdcam = true;
};

/// Full two-domain forward pass: encoder, size matching, projections,
/// cross-attention (bypassed per toggle), aggregation, and the classifier
/// applied to all six feature maps.
SegOutputs forward_pair(const ModelBundle& m, const Tensor& src_image, const Tensor& tgt_image,
                        const PipelineToggles& toggles);

/// Single-image inference: the cross-domain residuals need a second domain,
/// so they drop out and the pipeline reduces to encoder, projections,
/// aggregation, classifier. Used for evaluation and pseudo-labeling.
Tensor infer_probs(const ModelBundle& m, const Tensor& image);

/// Attention matrices of an image pair, for export and inspection.
struct AttentionMaps {
    Tensor phi;       // N x N
    Tensor gamma_st;  // N x N, row-stochastic
    Tensor gamma_ts;  // N x N, column-stochastic
    Tensor theta;     // C x C
    Tensor psi_st;    // C x C, row-stochastic
    Tensor psi_ts;    // C x C, column-stochastic
    int feat_h = 0;
    int feat_w = 0;
};

AttentionMaps compute_attention(const ModelBundle& m, const Tensor& src_image,
                                const Tensor& tgt_image);

/// Checkpoint directory: manifest.txt ("name file" per line) plus one tensor
/// file per parameter.
void save_checkpoint(const std::filesystem::path& dir, ModelBundle& model);
void load_checkpoint(const std::filesystem::path& dir, ModelBundle& model);

}  // namespace xda
