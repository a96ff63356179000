#include "xda/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "xda/error.hpp"
#include "xda/gradcheck.hpp"
#include "xda/ops.hpp"

namespace xda {

namespace {

constexpr std::uint32_t kSourceSplit = 0;
constexpr std::uint32_t kTargetSplit = 1;
constexpr std::uint32_t kEvalSplit = 2;

std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Dataset synth_dataset(const RunConfig& cfg) {
    Dataset ds;
    const DomainStyle src_style = DomainStyle::source_default();
    const DomainStyle tgt_style = DomainStyle::target_default();

    SceneSpec spec;
    spec.height = cfg.image_size;
    spec.width = cfg.image_size;

    for (int i = 0; i < cfg.n_source; ++i) {
        spec.seed = scene_seed(cfg.seed, kSourceSplit, static_cast<std::uint32_t>(i));
        Scene s = generate_scene(spec, src_style);
        ds.source_images.push_back(std::move(s.image));
        ds.source_labels.push_back(std::move(s.label));
    }
    for (int i = 0; i < cfg.n_target; ++i) {
        spec.seed = scene_seed(cfg.seed, kTargetSplit, static_cast<std::uint32_t>(i));
        ds.target_images.push_back(generate_scene(spec, tgt_style).image);
    }
    for (int i = 0; i < cfg.n_eval; ++i) {
        spec.seed = scene_seed(cfg.seed, kEvalSplit, static_cast<std::uint32_t>(i));
        Scene s = generate_scene(spec, tgt_style);
        ds.eval_images.push_back(std::move(s.image));
        ds.eval_labels.push_back(std::move(s.label));
    }
    return ds;
}

ModelConfig model_config_from(const RunConfig& cfg) {
    ModelConfig m;
    m.channels = cfg.channels;
    m.attn_channels = cfg.resolved_attn_channels();
    m.num_classes = cfg.num_classes;
    m.disc_width_mult = cfg.disc_width_mult;
    m.share_qk = cfg.share_qk;
    m.lambda_s = cfg.lambda_s;
    m.lambda_t = cfg.lambda_t;
    m.xi_s = cfg.xi_s;
    m.xi_t = cfg.xi_t;
    m.lambda_adv = cfg.lambda_adv;
    return m;
}

AdversarialConfig adversarial_config_from(const RunConfig& cfg) {
    AdversarialConfig a;
    a.lambda_adv = cfg.lambda_adv;
    a.lr_seg = cfg.lr_seg;
    a.lr_disc = cfg.lr_disc;
    a.momentum = cfg.momentum;
    a.adam_beta1 = cfg.adam_beta1;
    a.adam_beta2 = cfg.adam_beta2;
    a.poly_power = cfg.poly_power;
    a.max_iterations = cfg.iterations;
    a.enable_cdsam = cfg.enable_cdsam;
    a.enable_cdcam = cfg.enable_cdcam;
    return a;
}

ModelBundle train_model(const RunConfig& cfg, const Dataset& ds, const TrainSinks& sinks) {
    if (ds.source_images.empty() || ds.target_images.empty()) {
        throw DataError("training needs at least one source and one target image");
    }

    ModelBundle model = ModelBundle::init(model_config_from(cfg), cfg.seed);
    Trainer trainer(model, adversarial_config_from(cfg));
    std::mt19937_64 batch_rng(cfg.seed ^ 0xD1B54A32D192ED03ULL);
    std::uniform_int_distribution<int> pick_src(0, static_cast<int>(ds.source_images.size()) - 1);
    std::uniform_int_distribution<int> pick_tgt(0, static_cast<int>(ds.target_images.size()) - 1);

    if (sinks.csv != nullptr) *sinks.csv << kTrainCsvHeader << "\n";

    const int rounds = std::max(1, cfg.pseudo_rounds);
    int remaining = cfg.iterations;
    for (int round = 0; round < rounds; ++round) {
        std::vector<LabelMap> pseudo;
        if (cfg.enable_selftrain) {
            pseudo = generate_pseudo_labels(model, ds.target_images,
                                            PseudoLabelConfig{cfg.pseudo_threshold});
        } else {
            pseudo.assign(ds.target_images.size(),
                          LabelMap::filled(cfg.image_size, cfg.image_size, LabelMap::kIgnore));
        }
        if (sinks.on_pseudo_labels) sinks.on_pseudo_labels(round, pseudo);

        const int segment = round + 1 == rounds ? remaining : cfg.iterations / rounds;
        remaining -= segment;
        for (int step = 0; step < segment; ++step) {
            Batch batch;
            const int i = pick_src(batch_rng);
            const int j = pick_tgt(batch_rng);
            batch.src_image = ds.source_images[static_cast<std::size_t>(i)];
            batch.y_s = ds.source_labels[static_cast<std::size_t>(i)];
            batch.tgt_image = ds.target_images[static_cast<std::size_t>(j)];
            batch.y_t = pseudo[static_cast<std::size_t>(j)];

            const StepReport r = trainer.train_step(batch);
            if (sinks.csv != nullptr) {
                std::ostream& os = *sinks.csv;
                os << trainer.iteration() - 1;
                for (const double v : r.seg) os << "," << csv_double(v);
                for (const double v : r.adv_g) os << "," << csv_double(v);
                for (const double v : r.adv_d) os << "," << csv_double(v);
                os << "," << csv_double(r.lr_seg) << "," << csv_double(r.lr_disc) << "\n";
            }
        }
    }
    return model;
}

LabelMap predict_labels(const ModelBundle& model, const Tensor& image) {
    const Tensor probs = infer_probs(model, image);
    const int num_classes = probs.dim(0);
    const int h = probs.dim(1), w = probs.dim(2);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    LabelMap out = LabelMap::filled(h, w, 0);
    for (std::size_t i = 0; i < plane; ++i) {
        int best = 0;
        double best_p = probs[i];
        for (int c = 1; c < num_classes; ++c) {
            const double p = probs[static_cast<std::size_t>(c) * plane + i];
            if (p > best_p) {
                best_p = p;
                best = c;
            }
        }
        out.values[i] = static_cast<std::uint8_t>(best);
    }
    return out;
}

IoUReport evaluate_model(const ModelBundle& model, const Dataset& ds) {
    if (ds.eval_images.empty()) throw DataError("evaluation needs a non-empty eval split");
    IoUAccumulator acc(model.config.num_classes);
    for (std::size_t i = 0; i < ds.eval_images.size(); ++i) {
        acc.add(predict_labels(model, ds.eval_images[i]), ds.eval_labels[i]);
    }
    return acc.report();
}

std::vector<GradCheckEntry> run_gradient_suite(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    const auto randn = [&](Shape shape) {
        Tensor t = Tensor::zeros(std::move(shape));
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
        return t;
    };

    std::vector<GradCheckEntry> entries;
    const auto run = [&entries](const std::string& name, const TensorFn& f,
                                std::vector<Tensor> inputs) {
        GradCheckEntry e;
        e.name = name;
        e.error = finite_diff_check(f, std::move(inputs), 1e-5);
        e.pass = e.error <= 1e-4;
        entries.push_back(e);
    };

    const Tensor v = randn({6});
    const Tensor v2 = randn({6});
    run("add", [](const std::vector<Tensor>& in) { return sum(add(in[0], in[1])); }, {v, v2});
    run("sub", [](const std::vector<Tensor>& in) { return sum(sub(in[0], in[1])); }, {v, v2});
    run("mul", [](const std::vector<Tensor>& in) { return sum(mul(in[0], in[1])); }, {v, v2});
    run("scale", [](const std::vector<Tensor>& in) { return sum(scale(in[0], -2.3)); }, {v});
    run("softplus", [](const std::vector<Tensor>& in) { return mean(softplus(in[0])); }, {v});
    run("softmax", [](const std::vector<Tensor>& in) { return sum(mul(softmax(in[0], 0), in[1])); },
        {v, v2});
    Tensor pos = v;
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = std::abs(pos[i]) + 0.5;
    run("log", [](const std::vector<Tensor>& in) { return sum(log(in[0])); }, {pos});
    Tensor off = v;
    for (std::size_t i = 0; i < off.size(); ++i)
        if (std::abs(off[i]) < 1e-3) off[i] = 0.25;
    run("leaky_relu", [](const std::vector<Tensor>& in) { return sum(leaky_relu(in[0], 0.2)); },
        {off});
    run("sum", [](const std::vector<Tensor>& in) { return sum(in[0]); }, {v});
    run("mean", [](const std::vector<Tensor>& in) { return mean(in[0]); }, {v});

    const Tensor m1 = randn({3, 4});
    const Tensor m2 = randn({4, 2});
    run("matmul", [](const std::vector<Tensor>& in) { return sum(matmul(in[0], in[1])); }, {m1, m2});
    run("transpose", [](const std::vector<Tensor>& in) { return sum(mul(transpose(in[0]), in[1])); },
        {m1, randn({4, 3})});
    run("reshape", [](const std::vector<Tensor>& in) { return sum(reshape(in[0], {12})); }, {m1});

    const Tensor img = randn({2, 4, 4});
    run("conv2d",
        [](const std::vector<Tensor>& in) { return sum(conv2d(in[0], in[1], in[2], 2, 1)); },
        {img, randn({3, 2, 3, 3}), randn({3})});
    run("bilinear_resize",
        [](const std::vector<Tensor>& in) { return sum(bilinear_resize(in[0], 7, 3)); }, {img});
    run("concat_channels",
        [](const std::vector<Tensor>& in) { return sum(concat_channels(in[0], in[1])); },
        {img, randn({1, 4, 4})});

    // Full chain on 3x8x8 inputs: encoder -> attention -> aggregate ->
    // classify -> segmentation loss, probed through every parameter group.
    ModelConfig mc;
    mc.channels = 4;
    mc.attn_channels = 2;
    mc.num_classes = 3;
    mc.disc_width_mult = 0.0625;
    const ModelBundle model = ModelBundle::init(mc, seed ^ 0x5bd1e995);
    Tensor src = randn({3, 8, 8});
    Tensor tgt = randn({3, 8, 8});
    for (std::size_t i = 0; i < src.size(); ++i) src[i] = 0.3 * std::abs(src[i]);
    for (std::size_t i = 0; i < tgt.size(); ++i) tgt[i] = 0.3 * std::abs(tgt[i]);
    LabelMap y_s = LabelMap::filled(8, 8, 0);
    LabelMap y_t = LabelMap::filled(8, 8, 1);
    for (int x = 0; x < 8; ++x) {
        y_s.at(4, x) = 2;
        y_t.at(2, x) = LabelMap::kIgnore;
    }

    std::vector<Tensor> chain_inputs;
    std::vector<Tensor*> slots;
    ModelBundle probe = model;
    for (Tensor* p : probe.seg_params()) {
        chain_inputs.push_back(*p);
        slots.push_back(p);
    }
    chain_inputs.push_back(src);
    chain_inputs.push_back(tgt);

    run("full_chain",
        [&probe, &slots, &y_s, &y_t](const std::vector<Tensor>& in) {
            for (std::size_t i = 0; i < slots.size(); ++i) *slots[i] = in[i];
            const Tensor src_img = in[slots.size()];
            const Tensor tgt_img = in[slots.size() + 1];
            const SegOutputs out = forward_pair(probe, src_img, tgt_img, {});
            return total_seg_loss(out, y_s, y_t).total;
        },
        chain_inputs);

    return entries;
}

}  // namespace xda
