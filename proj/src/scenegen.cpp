#include "xda/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "xda/error.hpp"

namespace xda {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    std::uniform_int_distribution<int> dist(lo, hi);
    return dist(rng);
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng);
}

// rotation about the gray axis (1,1,1)/sqrt(3)
std::array<std::array<double, 3>, 3> hue_matrix(double angle) {
    const double r = std::cos(angle);
    const double s = std::sin(angle) / std::sqrt(3.0);
    const double t = (1.0 - std::cos(angle)) / 3.0;
    return {{{r + t, t - s, t + s}, {t + s, r + t, t - s}, {t - s, t + s, r + t}}};
}

}  // namespace

std::uint64_t scene_seed(std::uint64_t base_seed, std::uint32_t split_tag, std::uint32_t index) {
    return splitmix64(base_seed ^ splitmix64((static_cast<std::uint64_t>(split_tag) << 32) | index));
}

DomainStyle DomainStyle::source_default() {
    DomainStyle s;
    s.domain = Domain::source;
    s.illumination = 0.0;
    s.noise_amplitude = 0.05;
    s.hue_rotation = 0.0;
    s.base_colors = {{
        {0.42, 0.36, 0.27},  // background: dry ground
        {0.34, 0.34, 0.36},  // road: asphalt gray
        {0.52, 0.68, 0.88},  // sky: light blue
        {0.58, 0.33, 0.26},  // building: brick
        {0.82, 0.18, 0.16},  // vehicle: red
    }};
    return s;
}

DomainStyle DomainStyle::target_default() {
    DomainStyle s = source_default();
    s.domain = Domain::target;
    s.illumination = -0.12;
    s.noise_amplitude = 0.10;
    s.hue_rotation = 2.1;
    return s;
}

Scene generate_scene(const SceneSpec& spec, const DomainStyle& style) {
    if (spec.height < 8 || spec.width < 8 || spec.height % 8 != 0 || spec.width % 8 != 0) {
        throw ContractError("scene size must be a positive multiple of 8, got " +
                            std::to_string(spec.height) + "x" + std::to_string(spec.width));
    }
    const int h = spec.height, w = spec.width;

    // Layout depends on the seed only, never on the style.
    std::mt19937_64 layout_rng(splitmix64(spec.seed));
    LabelMap label = LabelMap::filled(h, w, scene::kBackground);

    const int sky_h = std::max(1, static_cast<int>(std::lround(h * uniform_real(layout_rng, 0.20, 0.32))));
    const int road_top = std::min(h - 2, static_cast<int>(std::lround(h * uniform_real(layout_rng, 0.62, 0.75))));
    for (int y = 0; y < sky_h; ++y)
        for (int x = 0; x < w; ++x) label.at(y, x) = scene::kSky;
    for (int y = road_top; y < h; ++y)
        for (int x = 0; x < w; ++x) label.at(y, x) = scene::kRoad;

    const int n_buildings = uniform_int(layout_rng, spec.min_buildings, spec.max_buildings);
    for (int b = 0; b < n_buildings; ++b) {
        const int bw = std::max(2, static_cast<int>(std::lround(w * uniform_real(layout_rng, 0.12, 0.28))));
        const int x0 = uniform_int(layout_rng, 0, std::max(0, w - bw));
        const int top = std::clamp(static_cast<int>(std::lround(h * uniform_real(layout_rng, 0.12, 0.45))),
                                   0, road_top - 1);
        for (int y = top; y < road_top; ++y)
            for (int x = x0; x < std::min(w, x0 + bw); ++x) label.at(y, x) = scene::kBuilding;
    }

    const int n_vehicles = uniform_int(layout_rng, spec.min_vehicles, spec.max_vehicles);
    for (int v = 0; v < n_vehicles; ++v) {
        const int rx = std::max(2, static_cast<int>(std::lround(w * uniform_real(layout_rng, 0.06, 0.11))));
        const int ry = std::max(2, static_cast<int>(std::lround(h * uniform_real(layout_rng, 0.04, 0.08))));
        if (road_top + ry >= h - ry) continue;
        const int cx = uniform_int(layout_rng, rx, w - 1 - rx);
        const int cy = uniform_int(layout_rng, road_top + ry, h - 1 - ry);
        for (int y = cy - ry; y <= cy + ry; ++y)
            for (int x = cx - rx; x <= cx + rx; ++x) {
                const double dx = static_cast<double>(x - cx) / rx;
                const double dy = static_cast<double>(y - cy) / ry;
                if (dx * dx + dy * dy <= 1.0) label.at(y, x) = scene::kVehicle;
            }
    }

    // Pixels depend on seed, domain tag, and style parameters.
    const std::uint64_t domain_salt = style.domain == Domain::source ? 0x736F757263ULL : 0x746172676574ULL;
    std::mt19937_64 pixel_rng(splitmix64(spec.seed ^ domain_salt));
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto rot = hue_matrix(style.hue_rotation);
    const double scene_jitter = uniform_real(pixel_rng, -0.05, 0.05);

    std::array<std::array<double, 3>, scene::kNumClasses> palette{};
    for (int c = 0; c < scene::kNumClasses; ++c) {
        for (int ch = 0; ch < 3; ++ch) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += rot[ch][k] * style.base_colors[c][k];
            palette[c][ch] = acc + style.illumination + scene_jitter;
        }
    }

    Scene out;
    out.image = Tensor::zeros({3, h, w});
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::size_t i = 0; i < plane; ++i) {
        const std::uint8_t cls = label.values[i];
        for (int ch = 0; ch < 3; ++ch) {
            const double v = palette[cls][ch] + style.noise_amplitude * noise(pixel_rng);
            out.image[static_cast<std::size_t>(ch) * plane + i] = std::clamp(v, 0.0, 1.0);
        }
    }
    out.label = std::move(label);
    return out;
}

IoUAccumulator::IoUAccumulator(int num_classes)
    : num_classes_(num_classes),
      tp_(static_cast<std::size_t>(num_classes), 0),
      fp_(static_cast<std::size_t>(num_classes), 0),
      fn_(static_cast<std::size_t>(num_classes), 0) {}

void IoUAccumulator::add(const LabelMap& pred, const LabelMap& truth) {
    if (pred.height != truth.height || pred.width != truth.width) {
        throw DimensionError("compute_iou: size mismatch " + std::to_string(pred.height) + "x" +
                             std::to_string(pred.width) + " vs " + std::to_string(truth.height) +
                             "x" + std::to_string(truth.width));
    }
    for (std::size_t i = 0; i < truth.values.size(); ++i) {
        const std::uint8_t t = truth.values[i];
        if (t == LabelMap::kIgnore) continue;
        if (t >= num_classes_) {
            throw DataError("compute_iou: truth label " + std::to_string(t) +
                            " exceeds class count " + std::to_string(num_classes_));
        }
        const std::uint8_t p = pred.values[i];
        if (p == t) {
            ++tp_[t];
        } else {
            ++fn_[t];
            if (p != LabelMap::kIgnore && p < num_classes_) ++fp_[p];
        }
    }
}

IoUReport IoUAccumulator::report() const {
    IoUReport r;
    r.per_class.resize(static_cast<std::size_t>(num_classes_));
    double total = 0.0;
    int defined = 0;
    for (int c = 0; c < num_classes_; ++c) {
        const std::size_t i = static_cast<std::size_t>(c);
        const std::int64_t denom = tp_[i] + fp_[i] + fn_[i];
        if (denom == 0) {
            r.per_class[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        r.per_class[i] = static_cast<double>(tp_[i]) / static_cast<double>(denom);
        total += r.per_class[i];
        ++defined;
    }
    r.miou = defined > 0 ? total / defined : 0.0;
    return r;
}

IoUReport compute_iou(const LabelMap& pred, const LabelMap& truth, int num_classes) {
    IoUAccumulator acc(num_classes);
    acc.add(pred, truth);
    return acc.report();
}

}  // namespace xda
