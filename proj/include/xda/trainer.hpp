#pragma once

#include <array>

#include "xda/model.hpp"

namespace xda {

struct AdversarialConfig {
    double lambda_adv = 0.001;
    double lr_seg = 2.5e-4;
    double lr_disc = 1e-4;
    double momentum = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.99;
    double poly_power = 0.9;
    int max_iterations = 2000;  // horizon of the polynomial decay
    bool enable_cdsam = true;
    bool enable_cdcam = true;
};

struct Batch {
    Tensor src_image;
    LabelMap y_s;
    Tensor tgt_image;
    LabelMap y_t;  // pseudo-labels; may be fully ignored
};

struct StepReport {
    std::array<double, 6> seg{};    // z_s z_t a_s a_t b_s b_t
    std::array<double, 3> adv_g{};  // d1 d2 d3 generator-side
    std::array<double, 3> adv_d{};  // d1 d2 d3 discriminator-side
    double lr_seg = 0.0;
    double lr_disc = 0.0;
};

/// Alternating min-max step: first the segmentation side (encoder,
/// projections, attention, classifier) descends L_seg + lambda * L_adv^G
/// with the discriminators held fixed, then the discriminators ascend their
/// own objective on detached segmentation outputs. The two passes run on
/// separate tapes over disjoint leaf sets, so gradients cannot cross sides.
class Trainer {
 public:
    Trainer(ModelBundle& model, const AdversarialConfig& cfg);

    /// Throws NumericError naming the offending term when a loss goes
    /// non-finite.
    StepReport train_step(const Batch& batch);

    int iteration() const { return iter_; }

 private:
    ModelBundle& model_;
    AdversarialConfig cfg_;
    SgdMomentum seg_opt_;
    Adam disc_opt_;
    std::vector<Tensor*> seg_params_;
    std::vector<Tensor*> disc_params_;
    int iter_ = 0;
};

}  // namespace xda
