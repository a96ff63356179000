#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "xda/config.hpp"
#include "xda/model.hpp"
#include "xda/scenegen.hpp"
#include "xda/selftrain.hpp"
#include "xda/trainer.hpp"

namespace xda {

/// In-memory two-domain dataset. Target training labels are withheld by
/// construction; only the eval split carries them.
struct Dataset {
    std::vector<Tensor> source_images;
    std::vector<LabelMap> source_labels;
    std::vector<Tensor> target_images;
    std::vector<Tensor> eval_images;
    std::vector<LabelMap> eval_labels;
};

/// Deterministic synthetic benchmark per the config (sizes, counts, seed).
Dataset synth_dataset(const RunConfig& cfg);

ModelConfig model_config_from(const RunConfig& cfg);
AdversarialConfig adversarial_config_from(const RunConfig& cfg);

inline constexpr const char* kTrainCsvHeader =
    "iteration,seg_z_s,seg_z_t,seg_a_s,seg_a_t,seg_b_s,seg_b_t,"
    "adv_g_d1,adv_g_d2,adv_g_d3,adv_d_d1,adv_d_d2,adv_d_d3,lr_seg,lr_disc";

struct TrainSinks {
    std::ostream* csv = nullptr;  // receives the header plus one row per step
    std::function<void(int round, const std::vector<LabelMap>&)> on_pseudo_labels;
};

/// Full training run: pseudo-label rounds wrapping the alternating min-max
/// steps. Deterministic in the config.
ModelBundle train_model(const RunConfig& cfg, const Dataset& ds, const TrainSinks& sinks = {});

/// Argmax segmentation of one image through the single-image path.
LabelMap predict_labels(const ModelBundle& model, const Tensor& image);

/// Dataset-level IoU over the eval split (pooled confusion counts).
IoUReport evaluate_model(const ModelBundle& model, const Dataset& ds);

struct GradCheckEntry {
    std::string name;
    double error = 0.0;
    bool pass = false;
};

/// Finite-difference sweep over every primitive op plus the full forward
/// chain on 3x8x8 inputs; failures are entries above the 1e-4 gate.
std::vector<GradCheckEntry> run_gradient_suite(std::uint64_t seed);

}  // namespace xda
