#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "xda/tensor.hpp"

namespace xda {

// Flat binary tensor format: magic "XTEN", u32 rank, u32 extents...,
// little-endian f64 payload. Used for checkpoints and attention export.
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, interleaved RGB
};

// Binary PGM (P5) / PPM (P6), 8-bit.
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);
RgbImage read_ppm(const std::filesystem::path& path);

// [0,1]-valued 3xHxW tensor <-> 8-bit RGB.
RgbImage tensor_to_rgb(const Tensor& image);
Tensor rgb_to_tensor(const RgbImage& img);

/// 8-bit heatmap of a nonnegative map, scaled so its maximum hits 255.
GrayImage heatmap_to_gray(const Tensor& map2d);

}  // namespace xda
