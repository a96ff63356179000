#include "xda/segnet.hpp"

#include <cmath>

#include "xda/error.hpp"
#include "xda/init.hpp"
#include "xda/ops.hpp"
#include "xda/tape.hpp"

namespace xda {

EncoderParams EncoderParams::init(int c, std::mt19937_64& rng) {
    const double gain = leaky_gain(kLeakySlope);
    EncoderParams p;
    p.w1 = kaiming_uniform({8, 3, 3, 3}, 3 * 9, gain, rng);
    p.b1 = Tensor::zeros({8});
    p.w2 = kaiming_uniform({16, 8, 3, 3}, 8 * 9, gain, rng);
    p.b2 = Tensor::zeros({16});
    p.w3 = kaiming_uniform({c, 16, 3, 3}, 16 * 9, gain, rng);
    p.b3 = Tensor::zeros({c});
    return p;
}

std::vector<Tensor*> EncoderParams::params() { return {&w1, &b1, &w2, &b2, &w3, &b3}; }

Tensor extract_features(const Tensor& image, const EncoderParams& p) {
    if (image.rank() != 3 || image.dim(0) != 3) {
        throw DimensionError("extract_features: expected 3xHxW image, got " +
                             shape_str(image.shape()));
    }
    if (image.dim(1) % 8 != 0 || image.dim(2) % 8 != 0) {
        throw ContractError("extract_features: image size " + shape_str(image.shape()) +
                            " is not divisible by 8");
    }
    Tensor x = leaky_relu(conv2d(image, p.w1, p.b1, 2, 1), EncoderParams::kLeakySlope);
    x = leaky_relu(conv2d(x, p.w2, p.b2, 2, 1), EncoderParams::kLeakySlope);
    x = leaky_relu(conv2d(x, p.w3, p.b3, 2, 1), EncoderParams::kLeakySlope);
    return x;
}

std::pair<Tensor, Tensor> match_sizes(const Tensor& f_s, const Tensor& f_t) {
    if (f_s.rank() != 3 || f_t.rank() != 3 || f_s.dim(0) != f_t.dim(0)) {
        throw DimensionError("match_sizes: channel mismatch " + shape_str(f_s.shape()) + " vs " +
                             shape_str(f_t.shape()));
    }
    const std::int64_t area_s = static_cast<std::int64_t>(f_s.dim(1)) * f_s.dim(2);
    const std::int64_t area_t = static_cast<std::int64_t>(f_t.dim(1)) * f_t.dim(2);
    if (f_s.dim(1) == f_t.dim(1) && f_s.dim(2) == f_t.dim(2)) return {f_s, f_t};
    if (area_s > area_t) return {bilinear_resize(f_s, f_t.dim(1), f_t.dim(2)), f_t};
    return {f_s, bilinear_resize(f_t, f_s.dim(1), f_s.dim(2))};
}

ProjectionParams ProjectionParams::init(int c, std::mt19937_64& rng) {
    ProjectionParams p;
    p.w_a = kaiming_uniform({c, c, 1, 1}, c, 1.0, rng);
    p.b_a = Tensor::zeros({c});
    p.w_b = kaiming_uniform({c, c, 1, 1}, c, 1.0, rng);
    p.b_b = Tensor::zeros({c});
    return p;
}

std::vector<Tensor*> ProjectionParams::params() { return {&w_a, &b_a, &w_b, &b_b}; }

ProjectedPairs project(const Tensor& f_s, const Tensor& f_t, const ProjectionParams& p) {
    ProjectedPairs out;
    out.spatial.a_s = conv2d(f_s, p.w_a, p.b_a, 1, 0);
    out.spatial.a_t = conv2d(f_t, p.w_a, p.b_a, 1, 0);
    out.channel.b_s = conv2d(f_s, p.w_b, p.b_b, 1, 0);
    out.channel.b_t = conv2d(f_t, p.w_b, p.b_b, 1, 0);
    return out;
}

AggregationParams AggregationParams::init(int c, std::mt19937_64& rng) {
    AggregationParams p;
    p.w = kaiming_uniform({c, 2 * c, 1, 1}, 2 * c, 1.0, rng);
    p.b = Tensor::zeros({c});
    return p;
}

std::vector<Tensor*> AggregationParams::params() { return {&w, &b}; }

Tensor aggregate(const Tensor& a, const Tensor& b, const AggregationParams& p) {
    if (!a.same_shape(b)) {
        throw DimensionError("aggregate: shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
    return conv2d(concat_channels(a, b), p.w, p.b, 1, 0);
}

ClassifierParams ClassifierParams::init(int num_classes, int c, std::mt19937_64& rng) {
    ClassifierParams p;
    p.w = kaiming_uniform({num_classes, c, 1, 1}, c, 1.0, rng);
    p.b = Tensor::zeros({num_classes});
    return p;
}

std::vector<Tensor*> ClassifierParams::params() { return {&w, &b}; }

Tensor classify(const Tensor& z, const ClassifierParams& p, int out_h, int out_w) {
    if (out_h < z.dim(1) || out_w < z.dim(2)) {
        throw ContractError("classify: output size " + std::to_string(out_h) + "x" +
                            std::to_string(out_w) + " is smaller than the feature map " +
                            shape_str(z.shape()));
    }
    const Tensor logits = conv2d(z, p.w, p.b, 1, 0);
    return softmax(bilinear_resize(logits, out_h, out_w), 0);
}

Tensor segmentation_loss(const Tensor& pred, const LabelMap& label) {
    if (pred.rank() != 3 || pred.dim(1) != label.height || pred.dim(2) != label.width) {
        throw DimensionError("segmentation_loss: prediction " + shape_str(pred.shape()) +
                             " does not cover a " + std::to_string(label.height) + "x" +
                             std::to_string(label.width) + " label map");
    }
    const int num_classes = pred.dim(0);
    const std::size_t plane = static_cast<std::size_t>(label.height) * label.width;

    // Gathers only the labeled entries, so zero-probability cells elsewhere
    // never enter a log.
    std::vector<std::size_t> picks;
    picks.reserve(plane);
    for (std::size_t i = 0; i < plane; ++i) {
        const std::uint8_t cls = label.values[i];
        if (cls == LabelMap::kIgnore) continue;
        if (cls >= num_classes) {
            throw DataError("segmentation_loss: label value " + std::to_string(cls) +
                            " exceeds class count " + std::to_string(num_classes));
        }
        picks.push_back(static_cast<std::size_t>(cls) * plane + i);
    }
    if (picks.empty()) return Tensor::scalar(0.0);

    const double inv = 1.0 / static_cast<double>(picks.size());
    double acc = 0.0;
    for (const std::size_t idx : picks) acc += std::log(pred[idx]);
    Tensor loss = Tensor::scalar(-acc * inv);

    const int node = live_node(pred);
    if (node >= 0) {
        const Tensor saved = pred.detached();
        Tape::active()->record(loss, {node},
                               [saved, picks = std::move(picks), inv](const Tensor& g) {
                                   std::vector<Tensor> r(1);
                                   Tensor gp = Tensor::zeros(saved.shape());
                                   for (const std::size_t idx : picks) {
                                       gp[idx] = -inv * g[0] / saved[idx];
                                   }
                                   r[0] = std::move(gp);
                                   return r;
                               });
    }
    return loss;
}

SegLoss total_seg_loss(const SegOutputs& outputs, const LabelMap& y_s, const LabelMap& y_t) {
    const std::array<const LabelMap*, 6> labels = {&y_s, &y_t, &y_s, &y_t, &y_s, &y_t};
    const auto preds = outputs.ordered();

    SegLoss loss;
    loss.total = Tensor::scalar(0.0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const Tensor term = segmentation_loss(*preds[i], *labels[i]);
        loss.components[i] = term.item();
        loss.total = add(loss.total, term);
    }
    return loss;
}

}  // namespace xda
