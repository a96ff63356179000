#include "xda/selftrain.hpp"

#include "xda/error.hpp"

namespace xda {

LabelMap pseudo_labels_from_probs(const Tensor& probs, double threshold) {
    if (threshold <= 0.0 || threshold > 1.0) {
        throw ContractError("pseudo-label threshold must lie in (0, 1]");
    }
    if (probs.rank() != 3) {
        throw DimensionError("pseudo_labels_from_probs: expected LxHxW probabilities, got " +
                             shape_str(probs.shape()));
    }
    const int num_classes = probs.dim(0);
    const int h = probs.dim(1), w = probs.dim(2);
    const std::size_t plane = static_cast<std::size_t>(h) * w;

    LabelMap out = LabelMap::filled(h, w, LabelMap::kIgnore);
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
        if (best_p >= threshold) out.values[i] = static_cast<std::uint8_t>(best);
    }
    return out;
}

std::vector<LabelMap> generate_pseudo_labels(const ModelBundle& model,
                                             const std::vector<Tensor>& images,
                                             const PseudoLabelConfig& cfg) {
    std::vector<LabelMap> out;
    out.reserve(images.size());
    for (const Tensor& image : images) {
        out.push_back(pseudo_labels_from_probs(infer_probs(model, image), cfg.confidence_threshold));
    }
    return out;
}

double ignore_fraction(const std::vector<LabelMap>& labels) {
    std::size_t total = 0, ignored = 0;
    for (const LabelMap& m : labels) {
        total += m.size();
        for (const std::uint8_t v : m.values) {
            if (v == LabelMap::kIgnore) ++ignored;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(ignored) / static_cast<double>(total);
}

}  // namespace xda
