#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "dermseg/image.hpp"
#include "dermseg/io.hpp"

namespace fixture {

using namespace dermseg;

inline constexpr double kSkinLevel = 200.0;
inline constexpr double kDarkLevel = 60.0;

/// Dark vertical band `width` pixels wide through the middle of a bright square.
inline GrayImage dark_line(int size = 200, int width = 3)
{
    GrayImage g(size, size, kSkinLevel);
    const int x0 = size / 2 - width / 2;
    for (int y = 0; y < size; ++y) {
        for (int x = x0; x < x0 + width; ++x) g(x, y) = kDarkLevel;
    }
    return g;
}

inline bool in_disk(int x, int y, int cx, int cy, int r) { return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r; }

/// Dark disk on the same bright background.
inline GrayImage dark_disk(int size = 200, int radius = 20)
{
    GrayImage g(size, size, kSkinLevel);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            if (in_disk(x, y, size / 2, size / 2, radius)) g(x, y) = kDarkLevel;
        }
    }
    return g;
}

inline GrayImage rotate90(const GrayImage& g)
{
    // (x, y) -> (h-1-y, x): clockwise quarter turn.
    GrayImage out(g.height(), g.width());
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) out(g.height() - 1 - y, x) = g(x, y);
    }
    return out;
}

struct Lesion {
    RgbImage image;
    BinaryMask truth;
};

inline constexpr Rgb kSkin{214, 170, 150};
inline constexpr Rgb kLesion{92, 52, 40};

/// Dark `side` x `side` square on skin-colored background, with mild per-pixel
/// noise so the fixture is not perfectly flat.
inline Lesion dark_square(int width = 96, int height = 96, int side = 31, int x0 = -1, int y0 = -1,
                          std::uint64_t noise_seed = 0, int noise = 0)
{
    if (x0 < 0) x0 = (width - side) / 2;
    if (y0 < 0) y0 = (height - side) / 2;
    Lesion l{RgbImage(width, height, kSkin), BinaryMask(width, height, 0)};
    std::mt19937_64 rng(noise_seed);
    std::uniform_int_distribution<int> jitter(-noise, noise);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const bool inside = x >= x0 && x < x0 + side && y >= y0 && y < y0 + side;
            Rgb p = inside ? kLesion : kSkin;
            if (noise > 0) {
                for (auto& c : p) c = static_cast<std::uint8_t>(std::clamp(c + jitter(rng), 0, 255));
            }
            l.image(x, y) = p;
            l.truth(x, y) = inside;
        }
    }
    return l;
}

inline constexpr Rgb kPatchColors[5] = {{20, 20, 20}, {200, 40, 40}, {40, 200, 40}, {40, 40, 200}, {230, 230, 230}};

/// Five vertical flat stripes, one per color in kPatchColors.
inline RgbImage five_patches(int stripe = 8, int height = 10)
{
    RgbImage img(stripe * 5, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < img.width(); ++x) img(x, y) = kPatchColors[x / stripe];
    }
    return img;
}

inline double iou(const BinaryMask& a, const BinaryMask& b)
{
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        inter += a[i] && b[i];
        uni += a[i] || b[i];
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Writes a dataset directory of dark-square lesions: <id>.jpg + <id>_segmentation.png.
inline void write_square_corpus(const std::filesystem::path& dir, int count, std::uint64_t seed, int first_index = 0)
{
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < count; ++i) {
        const int w = 88 + static_cast<int>(rng() % 24);
        const int h = 80 + static_cast<int>(rng() % 24);
        const int side = 25 + static_cast<int>(rng() % 12);
        const int x0 = 10 + static_cast<int>(rng() % static_cast<std::uint64_t>(w - side - 20));
        const int y0 = 10 + static_cast<int>(rng() % static_cast<std::uint64_t>(h - side - 20));
        const Lesion l = dark_square(w, h, side, x0, y0, rng(), 3);
        char id[32];
        std::snprintf(id, sizeof id, "ISIC_%07d", first_index + i);
        io::write_jpeg(dir / (std::string(id) + ".jpg"), l.image, 95);
        io::write_mask(dir / (std::string(id) + "_segmentation.png"), l.truth);
    }
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path temp_dir(const std::string& name)
{
    const auto p = std::filesystem::temp_directory_path() / ("dermseg_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace fixture
