#include "xda/model.hpp"

#include <fstream>
#include <sstream>

#include "xda/error.hpp"
#include "xda/ops.hpp"
#include "xda/serialize.hpp"

namespace xda {

ModelBundle ModelBundle::init(const ModelConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ModelBundle m;
    m.config = cfg;
    m.encoder = EncoderParams::init(cfg.channels, rng);
    m.projection = ProjectionParams::init(cfg.channels, rng);
    m.sam = SamParams::init(cfg.channels, cfg.attn_channels, rng, cfg.share_qk);
    m.sam.lambda_s = cfg.lambda_s;
    m.sam.lambda_t = cfg.lambda_t;
    m.cam.xi_s = cfg.xi_s;
    m.cam.xi_t = cfg.xi_t;
    m.aggregation = AggregationParams::init(cfg.channels, rng);
    m.classifier = ClassifierParams::init(cfg.num_classes, cfg.channels, rng);
    m.d1 = DiscriminatorParams::init(cfg.num_classes, cfg.disc_width_mult, rng);
    m.d2 = DiscriminatorParams::init(cfg.num_classes, cfg.disc_width_mult, rng);
    m.d3 = DiscriminatorParams::init(cfg.num_classes, cfg.disc_width_mult, rng);
    return m;
}

std::vector<Tensor*> ModelBundle::seg_params() {
    std::vector<Tensor*> out;
    for (Tensor* p : encoder.params()) out.push_back(p);
    for (Tensor* p : projection.params()) out.push_back(p);
    for (Tensor* p : sam.params()) out.push_back(p);
    for (Tensor* p : aggregation.params()) out.push_back(p);
    for (Tensor* p : classifier.params()) out.push_back(p);
    return out;
}

std::vector<Tensor*> ModelBundle::disc_params() {
    std::vector<Tensor*> out;
    for (Tensor* p : d1.params()) out.push_back(p);
    for (Tensor* p : d2.params()) out.push_back(p);
    for (Tensor* p : d3.params()) out.push_back(p);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> ModelBundle::named_params() {
    std::vector<std::pair<std::string, Tensor*>> out = {
        {"encoder.w1", &encoder.w1}, {"encoder.b1", &encoder.b1},
        {"encoder.w2", &encoder.w2}, {"encoder.b2", &encoder.b2},
        {"encoder.w3", &encoder.w3}, {"encoder.b3", &encoder.b3},
        {"projection.wa", &projection.w_a}, {"projection.ba", &projection.b_a},
        {"projection.wb", &projection.w_b}, {"projection.bb", &projection.b_b},
        {"sam.wq", &sam.w_q}, {"sam.wk", &sam.w_k}, {"sam.wv", &sam.w_v},
        {"aggregation.w", &aggregation.w}, {"aggregation.b", &aggregation.b},
        {"classifier.w", &classifier.w}, {"classifier.b", &classifier.b},
    };
    const auto add_disc = [&out](const std::string& prefix, DiscriminatorParams& d) {
        for (int layer = 0; layer < DiscriminatorParams::kLayers; ++layer) {
            const std::size_t l = static_cast<std::size_t>(layer);
            out.emplace_back(prefix + ".w" + std::to_string(layer), &d.weights[l]);
            out.emplace_back(prefix + ".b" + std::to_string(layer), &d.biases[l]);
        }
    };
    add_disc("d1", d1);
    add_disc("d2", d2);
    add_disc("d3", d3);
    return out;
}

SegOutputs forward_pair(const ModelBundle& m, const Tensor& src_image, const Tensor& tgt_image,
                        const PipelineToggles& toggles) {
    Tensor f_s = extract_features(src_image, m.encoder);
    Tensor f_t = extract_features(tgt_image, m.encoder);
    std::tie(f_s, f_t) = match_sizes(f_s, f_t);
    const ProjectedPairs pp = project(f_s, f_t, m.projection);
    const SpatialPair sp = toggles.cdsam ? cd_sam(pp.spatial, m.sam) : pp.spatial;
    const ChannelPair cp = toggles.cdcam ? cd_cam(pp.channel, m.cam) : pp.channel;
    const Tensor z_s = aggregate(sp.a_s, cp.b_s, m.aggregation);
    const Tensor z_t = aggregate(sp.a_t, cp.b_t, m.aggregation);

    const int sh = src_image.dim(1), sw = src_image.dim(2);
    const int th = tgt_image.dim(1), tw = tgt_image.dim(2);
    SegOutputs out;
    out.z_s = classify(z_s, m.classifier, sh, sw);
    out.z_t = classify(z_t, m.classifier, th, tw);
    out.a_s = classify(sp.a_s, m.classifier, sh, sw);
    out.a_t = classify(sp.a_t, m.classifier, th, tw);
    out.b_s = classify(cp.b_s, m.classifier, sh, sw);
    out.b_t = classify(cp.b_t, m.classifier, th, tw);
    return out;
}

Tensor infer_probs(const ModelBundle& m, const Tensor& image) {
    const Tensor f = extract_features(image, m.encoder);
    const Tensor a = conv2d(f, m.projection.w_a, m.projection.b_a, 1, 0);
    const Tensor b = conv2d(f, m.projection.w_b, m.projection.b_b, 1, 0);
    const Tensor z = aggregate(a, b, m.aggregation);
    return classify(z, m.classifier, image.dim(1), image.dim(2));
}

AttentionMaps compute_attention(const ModelBundle& m, const Tensor& src_image,
                                const Tensor& tgt_image) {
    Tensor f_s = extract_features(src_image, m.encoder);
    Tensor f_t = extract_features(tgt_image, m.encoder);
    std::tie(f_s, f_t) = match_sizes(f_s, f_t);
    const ProjectedPairs pp = project(f_s, f_t, m.projection);

    AttentionMaps maps;
    maps.feat_h = f_s.dim(1);
    maps.feat_w = f_s.dim(2);
    const SpatialEnergyResult se = spatial_energy(pp.spatial.a_s, pp.spatial.a_t, m.sam);
    maps.phi = se.energy.phi;
    maps.gamma_st = spatial_forward_attention(se.energy);
    maps.gamma_ts = spatial_backward_attention(se.energy);
    const ChannelEnergy ce = channel_energy(pp.channel.b_s, pp.channel.b_t);
    maps.theta = ce.theta;
    maps.psi_st = channel_forward_attention(ce);
    maps.psi_ts = channel_backward_attention(ce);
    return maps;
}

void save_checkpoint(const std::filesystem::path& dir, ModelBundle& model) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) throw IoError("cannot write checkpoint manifest in " + dir.string());
    for (const auto& [name, tensor] : model.named_params()) {
        const std::string file = name + ".xten";
        save_tensor(dir / file, *tensor);
        manifest << name << " " << file << "\n";
    }
    if (!manifest) throw IoError("checkpoint manifest write failed in " + dir.string());
}

void load_checkpoint(const std::filesystem::path& dir, ModelBundle& model) {
    std::ifstream manifest(dir / "manifest.txt");
    if (!manifest) throw IoError("missing checkpoint manifest: " + (dir / "manifest.txt").string());
    std::vector<std::pair<std::string, Tensor*>> params = model.named_params();
    std::size_t loaded = 0;
    std::string name, file;
    while (manifest >> name >> file) {
        Tensor t = load_tensor(dir / file);
        bool found = false;
        for (auto& [pname, ptensor] : params) {
            if (pname != name) continue;
            if (t.shape() != ptensor->shape()) {
                throw DataError("checkpoint tensor " + name + " has shape " + shape_str(t.shape()) +
                                ", model expects " + shape_str(ptensor->shape()));
            }
            *ptensor = std::move(t);
            found = true;
            ++loaded;
            break;
        }
        if (!found) throw DataError("checkpoint names unknown parameter: " + name);
    }
    if (loaded != params.size()) {
        throw DataError("checkpoint in " + dir.string() + " holds " + std::to_string(loaded) +
                        " of " + std::to_string(params.size()) + " parameters");
    }
}

}  // namespace xda
