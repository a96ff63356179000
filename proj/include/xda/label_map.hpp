#pragma once

#include <cstdint>
#include <vector>

namespace xda {

/// H x W map of class indices; 255 marks pixels excluded from losses and
/// metrics.
struct LabelMap {
    static constexpr std::uint8_t kIgnore = 255;

    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> values;

    static LabelMap filled(int height, int width, std::uint8_t value) {
        LabelMap m;
        m.height = height;
        m.width = width;
        m.values.assign(static_cast<std::size_t>(height) * width, value);
        return m;
    }

    std::uint8_t at(int y, int x) const {
        return values[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int y, int x) {
        return values[static_cast<std::size_t>(y) * width + x];
    }
    std::size_t size() const { return values.size(); }

    bool operator==(const LabelMap& other) const = default;
};

}  // namespace xda
