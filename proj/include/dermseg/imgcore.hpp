#pragma once

#include <algorithm>
#include <cmath>

#include "dermseg/image.hpp"

namespace dermseg {

struct ScaleRule {
    int threshold = 1500;  // strict: only images whose larger side exceeds this shrink
    double factor = 0.25;
};

/// Scaled dimension with round-half-up.
inline int scaled_dimension(int extent, double scale)
{
    return static_cast<int>(std::floor(static_cast<double>(extent) * scale + 0.5));
}

namespace detail {

inline std::uint8_t round_to_u8(double v)
{
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

// Center-aligned source coordinate for a destination index.
inline double source_coord(int dst, double scale)
{
    return (static_cast<double>(dst) + 0.5) / scale - 0.5;
}

inline void check_scale(int width, int height, double scale)
{
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw Error("resize: scale must be a positive finite number");
    }
    if (scaled_dimension(width, scale) < 1 || scaled_dimension(height, scale) < 1) {
        throw Error("resize: scale " + std::to_string(scale) + " produces an empty image from " +
                    std::to_string(width) + "x" + std::to_string(height));
    }
}

}  // namespace detail

inline RgbImage resize_bilinear(const RgbImage& img, double scale)
{
    detail::check_scale(img.width(), img.height(), scale);
    const int out_w = scaled_dimension(img.width(), scale);
    const int out_h = scaled_dimension(img.height(), scale);
    RgbImage out(out_w, out_h);

    struct Tap {
        int i0, i1;
        double w1;
    };
    auto taps = [scale](int n_out, int n_in) {
        std::vector<Tap> t(static_cast<std::size_t>(n_out));
        for (int d = 0; d < n_out; ++d) {
            const double s = std::clamp(detail::source_coord(d, scale), 0.0,
                                        static_cast<double>(n_in - 1));
            const int i0 = static_cast<int>(std::floor(s));
            const int i1 = std::min(i0 + 1, n_in - 1);
            t[static_cast<std::size_t>(d)] = {i0, i1, s - i0};
        }
        return t;
    };
    const auto xt = taps(out_w, img.width());
    const auto yt = taps(out_h, img.height());

    for (int y = 0; y < out_h; ++y) {
        const Tap& ty = yt[static_cast<std::size_t>(y)];
        for (int x = 0; x < out_w; ++x) {
            const Tap& tx = xt[static_cast<std::size_t>(x)];
            const Rgb& p00 = img(tx.i0, ty.i0);
            const Rgb& p10 = img(tx.i1, ty.i0);
            const Rgb& p01 = img(tx.i0, ty.i1);
            const Rgb& p11 = img(tx.i1, ty.i1);
            Rgb& o = out(x, y);
            for (int c = 0; c < 3; ++c) {
                const double top = p00[c] + tx.w1 * (p10[c] - p00[c]);
                const double bot = p01[c] + tx.w1 * (p11[c] - p01[c]);
                o[c] = detail::round_to_u8(top + ty.w1 * (bot - top));
            }
        }
    }
    return out;
}

/// Nearest-neighbour resampling to explicit dimensions; keeps masks binary.
template <typename T>
Raster<T> resize_nearest(const Raster<T>& img, int out_w, int out_h)
{
    if (out_w < 1 || out_h < 1) {
        throw Error("resize_nearest: target dimensions must be positive");
    }
    Raster<T> out(out_w, out_h);
    const double sx = static_cast<double>(img.width()) / out_w;
    const double sy = static_cast<double>(img.height()) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const int syi = std::min(static_cast<int>(std::floor((y + 0.5) * sy)), img.height() - 1);
        for (int x = 0; x < out_w; ++x) {
            const int sxi =
                std::min(static_cast<int>(std::floor((x + 0.5) * sx)), img.width() - 1);
            out(x, y) = img(sxi, syi);
        }
    }
    return out;
}

inline bool needs_downscale(int width, int height, const ScaleRule& rule = {})
{
    return std::max(width, height) > rule.threshold;
}

inline RgbImage maybe_downscale(const RgbImage& img, const ScaleRule& rule = {})
{
    if (!needs_downscale(img.width(), img.height(), rule)) {
        return img;
    }
    return resize_bilinear(img, rule.factor);
}

/// Mask counterpart of maybe_downscale; same output dimensions, nearest sampling.
inline BinaryMask maybe_downscale_mask(const BinaryMask& mask, const ScaleRule& rule = {})
{
    if (!needs_downscale(mask.width(), mask.height(), rule)) {
        return mask;
    }
    detail::check_scale(mask.width(), mask.height(), rule.factor);
    return resize_nearest(mask, scaled_dimension(mask.width(), rule.factor),
                          scaled_dimension(mask.height(), rule.factor));
}

// CIE L*a*b* under D65 with sRGB companding.
namespace color {

inline constexpr double kWhiteX = 0.95047;
inline constexpr double kWhiteY = 1.0;
inline constexpr double kWhiteZ = 1.08883;
inline constexpr double kDelta = 6.0 / 29.0;

inline double srgb_to_linear(double c)
{
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double linear_to_srgb(double c)
{
    return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

inline double lab_f(double t)
{
    return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

inline double lab_f_inv(double t)
{
    return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

inline Lab to_lab(const Rgb& p)
{
    const double r = srgb_to_linear(p[0] / 255.0);
    const double g = srgb_to_linear(p[1] / 255.0);
    const double b = srgb_to_linear(p[2] / 255.0);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = lab_f(x / kWhiteX);
    const double fy = lab_f(y / kWhiteY);
    const double fz = lab_f(z / kWhiteZ);
    return {std::clamp(116.0 * fy - 16.0, 0.0, 100.0), 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

inline Rgb to_rgb(const Lab& p)
{
    const double l = std::clamp(p[0], 0.0, 100.0);
    const double fy = (l + 16.0) / 116.0;
    const double fx = fy + p[1] / 500.0;
    const double fz = fy - p[2] / 200.0;
    const double x = kWhiteX * lab_f_inv(fx);
    const double y = kWhiteY * lab_f_inv(fy);
    const double z = kWhiteZ * lab_f_inv(fz);
    const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
    const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
    const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
    auto channel = [](double lin) {
        return detail::round_to_u8(255.0 * linear_to_srgb(std::clamp(lin, 0.0, 1.0)));
    };
    return {channel(r), channel(g), channel(b)};
}

}  // namespace color

inline LabImage rgb_to_lab(const RgbImage& img)
{
    LabImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        out[i] = color::to_lab(img[i]);
    }
    return out;
}

inline RgbImage lab_to_rgb(const LabImage& img)
{
    RgbImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        out[i] = color::to_rgb(img[i]);
    }
    return out;
}

inline GrayImage rgb_to_gray(const RgbImage& img)
{
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const Rgb& p = img[i];
        out[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
    return out;
}

}  // namespace dermseg
