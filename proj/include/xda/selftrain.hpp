#pragma once

#include <vector>

#include "xda/label_map.hpp"
#include "xda/model.hpp"

namespace xda {

struct PseudoLabelConfig {
    double confidence_threshold = 0.9;  // in (0, 1]
};

/// Per-pixel argmax where the winning probability clears the threshold,
/// ignore otherwise.
LabelMap pseudo_labels_from_probs(const Tensor& probs, double threshold);

/// Inference-only pseudo-labels for a batch of target images.
std::vector<LabelMap> generate_pseudo_labels(const ModelBundle& model,
                                             const std::vector<Tensor>& images,
                                             const PseudoLabelConfig& cfg);

/// Fraction of ignored pixels across a set of label maps.
double ignore_fraction(const std::vector<LabelMap>& labels);

}  // namespace xda
