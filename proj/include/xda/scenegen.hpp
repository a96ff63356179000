#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "xda/label_map.hpp"
#include "xda/tensor.hpp"

namespace xda {

namespace scene {
inline constexpr int kNumClasses = 5;
inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kRoad = 1;
inline constexpr std::uint8_t kSky = 2;
inline constexpr std::uint8_t kBuilding = 3;
inline constexpr std::uint8_t kVehicle = 4;
}  // namespace scene

struct SceneSpec {
    std::uint64_t seed = 0;
    int height = 64;  // divisible by 8
    int width = 64;
    int min_buildings = 2, max_buildings = 4;
    int min_vehicles = 1, max_vehicles = 3;
};

enum class Domain { source, target };

/// Appearance of one domain. Styles change pixels only; the label map of a
/// scene depends solely on the spec.
struct DomainStyle {
    Domain domain = Domain::source;
    double illumination = 0.0;   // additive brightness offset
    std::array<std::array<double, 3>, scene::kNumClasses> base_colors{};
    double noise_amplitude = 0.05;
    double hue_rotation = 0.0;  // radians about the gray axis

    static DomainStyle source_default();
    static DomainStyle target_default();
};

struct Scene {
    Tensor image;  // 3 x H x W in [0, 1]
    LabelMap label;
};

/// Deterministic in (spec.seed, style): sky band on top, road band below,
/// building rectangles in between, vehicle ellipses on the road.
Scene generate_scene(const SceneSpec& spec, const DomainStyle& style);

/// Stable per-scene seed derivation for dataset splits.
std::uint64_t scene_seed(std::uint64_t base_seed, std::uint32_t split_tag, std::uint32_t index);

struct IoUReport {
    std::vector<double> per_class;  // NaN where the class never occurs
    double miou = 0.0;              // mean over defined classes
};

/// Confusion-count accumulator; truth pixels marked ignore are excluded,
/// predictions without a valid class count as misses only.
class IoUAccumulator {
 public:
    explicit IoUAccumulator(int num_classes);
    void add(const LabelMap& pred, const LabelMap& truth);
    IoUReport report() const;

 private:
    int num_classes_;
    std::vector<std::int64_t> tp_, fp_, fn_;
};

IoUReport compute_iou(const LabelMap& pred, const LabelMap& truth, int num_classes);

}  // namespace xda
