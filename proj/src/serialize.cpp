#include "xda/serialize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "xda/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; big-endian hosts are unsupported");

namespace xda {

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& is, const std::filesystem::path& path) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw IoError("truncated tensor file: " + path.string());
    return v;
}

int read_pnm_int(std::istream& is) {
    // skips whitespace and '#' comments
    int ch = is.peek();
    while (ch == '#' || std::isspace(ch)) {
        if (ch == '#') {
            std::string line;
            std::getline(is, line);
        } else {
            is.get();
        }
        ch = is.peek();
    }
    int value = -1;
    is >> value;
    return value;
}

}  // namespace

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write("XTEN", 4);
    write_u32(os, static_cast<std::uint32_t>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) write_u32(os, static_cast<std::uint32_t>(t.dim(i)));
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!os) throw IoError("write failed: " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "XTEN", 4) != 0) {
        throw DataError("not a tensor file (bad magic): " + path.string());
    }
    const std::uint32_t rank = read_u32(is, path);
    if (rank > 8) throw DataError("implausible tensor rank in " + path.string());
    Shape shape(rank);
    for (std::uint32_t i = 0; i < rank; ++i) {
        shape[i] = static_cast<int>(read_u32(is, path));
    }
    Tensor t = Tensor::zeros(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!is) throw IoError("truncated tensor file: " + path.string());
    return t;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << "P5\n" << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()),
             static_cast<std::streamsize>(img.pixels.size()));
    if (!os) throw IoError("write failed: " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    std::string magic;
    is >> magic;
    if (magic != "P5") throw DataError("not a binary PGM: " + path.string());
    GrayImage img;
    img.width = read_pnm_int(is);
    img.height = read_pnm_int(is);
    const int maxval = read_pnm_int(is);
    if (img.width <= 0 || img.height <= 0 || maxval != 255) {
        throw DataError("unsupported PGM header in " + path.string());
    }
    is.get();  // single whitespace after maxval
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    is.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!is) throw IoError("truncated PGM: " + path.string());
    return img;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << "P6\n" << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()),
             static_cast<std::streamsize>(img.pixels.size()));
    if (!os) throw IoError("write failed: " + path.string());
}

RgbImage read_ppm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    std::string magic;
    is >> magic;
    if (magic != "P6") throw DataError("not a binary PPM: " + path.string());
    RgbImage img;
    img.width = read_pnm_int(is);
    img.height = read_pnm_int(is);
    const int maxval = read_pnm_int(is);
    if (img.width <= 0 || img.height <= 0 || maxval != 255) {
        throw DataError("unsupported PPM header in " + path.string());
    }
    is.get();
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    is.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!is) throw IoError("truncated PPM: " + path.string());
    return img;
}

RgbImage tensor_to_rgb(const Tensor& image) {
    if (image.rank() != 3 || image.dim(0) != 3) {
        throw DimensionError("tensor_to_rgb: expected 3xHxW, got " + shape_str(image.shape()));
    }
    RgbImage img;
    img.height = image.dim(1);
    img.width = image.dim(2);
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t p = 0; p < plane; ++p) {
        for (int c = 0; c < 3; ++c) {
            const double v = std::clamp(image[static_cast<std::size_t>(c) * plane + p], 0.0, 1.0);
            img.pixels[p * 3 + static_cast<std::size_t>(c)] =
                static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    }
    return img;
}

Tensor rgb_to_tensor(const RgbImage& img) {
    Tensor t = Tensor::zeros({3, img.height, img.width});
    const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t p = 0; p < plane; ++p) {
        for (int c = 0; c < 3; ++c) {
            t[static_cast<std::size_t>(c) * plane + p] =
                img.pixels[p * 3 + static_cast<std::size_t>(c)] / 255.0;
        }
    }
    return t;
}

GrayImage heatmap_to_gray(const Tensor& map2d) {
    if (map2d.rank() != 2) {
        throw DimensionError("heatmap_to_gray: expected rank-2 map, got " +
                             shape_str(map2d.shape()));
    }
    GrayImage img;
    img.height = map2d.dim(0);
    img.width = map2d.dim(1);
    img.pixels.resize(map2d.size());
    double mx = 0.0;
    for (std::size_t i = 0; i < map2d.size(); ++i) mx = std::max(mx, map2d[i]);
    const double s = mx > 0.0 ? 255.0 / mx : 0.0;
    for (std::size_t i = 0; i < map2d.size(); ++i) {
        img.pixels[i] = static_cast<std::uint8_t>(
            std::clamp(std::lround(map2d[i] * s), 0L, 255L));
    }
    return img;
}

}  // namespace xda
