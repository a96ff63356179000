#include "xda/trainer.hpp"

#include <cmath>

#include "xda/error.hpp"
#include "xda/ops.hpp"
#include "xda/tape.hpp"

namespace xda {

namespace {

void require_finite(double v, const char* term, int iter) {
    if (!std::isfinite(v)) {
        throw NumericError(std::string("non-finite ") + term + " at iteration " +
                           std::to_string(iter));
    }
}

std::vector<Tensor> collect(const GradMap& grads, const std::vector<Tensor*>& params) {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const Tensor* p : params) out.push_back(grads.at(*p));
    return out;
}

}  // namespace

Trainer::Trainer(ModelBundle& model, const AdversarialConfig& cfg)
    : model_(model),
      cfg_(cfg),
      seg_opt_(cfg.momentum),
      disc_opt_(cfg.adam_beta1, cfg.adam_beta2),
      seg_params_(model.seg_params()),
      disc_params_(model.disc_params()) {}

StepReport Trainer::train_step(const Batch& batch) {
    static const char* kSegTerms[6] = {"seg_z_s", "seg_z_t", "seg_a_s",
                                       "seg_a_t", "seg_b_s", "seg_b_t"};
    static const char* kAdvGTerms[3] = {"adv_g_d1", "adv_g_d2", "adv_g_d3"};
    static const char* kAdvDTerms[3] = {"adv_d_d1", "adv_d_d2", "adv_d_d3"};

    StepReport report;
    const double progress =
        cfg_.max_iterations > 0 ? static_cast<double>(iter_) / cfg_.max_iterations : 0.0;
    const double decay = std::pow(1.0 - progress, cfg_.poly_power);
    report.lr_seg = cfg_.lr_seg * decay;
    report.lr_disc = cfg_.lr_disc * decay;

    const PipelineToggles toggles{cfg_.enable_cdsam, cfg_.enable_cdcam};
    SegOutputs detached;

    {  // segmentation update; discriminators enter as constants only
        Tape tape;
        TapeScope scope(tape);
        for (Tensor* p : seg_params_) tape.watch(*p);

        const SegOutputs out = forward_pair(model_, batch.src_image, batch.tgt_image, toggles);
        const SegLoss seg = total_seg_loss(out, batch.y_s, batch.y_t);
        report.seg = seg.components;
        for (int i = 0; i < 6; ++i) require_finite(report.seg[i], kSegTerms[i], iter_);

        Tensor loss = seg.total;
        if (cfg_.lambda_adv > 0.0) {
            const AdvLoss adv =
                total_adv_loss_g(model_.d1, toggles.cdsam ? &model_.d2 : nullptr,
                                 toggles.cdcam ? &model_.d3 : nullptr, out);
            report.adv_g = adv.components;
            for (int i = 0; i < 3; ++i) require_finite(report.adv_g[i], kAdvGTerms[i], iter_);
            loss = add(loss, scale(adv.total, cfg_.lambda_adv));
        }

        const GradMap grads = tape.backward(loss);
        seg_opt_.step(seg_params_, collect(grads, seg_params_), report.lr_seg);

        detached.z_s = out.z_s.detached();
        detached.z_t = out.z_t.detached();
        detached.a_s = out.a_s.detached();
        detached.a_t = out.a_t.detached();
        detached.b_s = out.b_s.detached();
        detached.b_t = out.b_t.detached();
    }

    {  // discriminator update on detached outputs
        Tape tape;
        TapeScope scope(tape);
        for (Tensor* p : disc_params_) tape.watch(*p);

        const AdvLoss adv = total_adv_loss_d(model_.d1, toggles.cdsam ? &model_.d2 : nullptr,
                                             toggles.cdcam ? &model_.d3 : nullptr, detached);
        report.adv_d = adv.components;
        for (int i = 0; i < 3; ++i) require_finite(report.adv_d[i], kAdvDTerms[i], iter_);

        const GradMap grads = tape.backward(adv.total);
        disc_opt_.step(disc_params_, collect(grads, disc_params_), report.lr_disc);
    }

    ++iter_;
    return report;
}

}  // namespace xda
