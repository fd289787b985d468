#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dermseg/image.hpp"
#include "dermseg/imgcore.hpp"

namespace dermseg {

// ---------------------------------------------------------------------------
// CLAHE on the lightness channel
// ---------------------------------------------------------------------------

struct ClaheParams {
    double clip_limit = 2.0;  // multiple of the uniform bin height
    int tiles_x = 8;
    int tiles_y = 8;
    int bins = 256;

    void validate() const
    {
        if (!(clip_limit >= 1.0)) throw Error("clahe: clip_limit must be >= 1");
        if (tiles_x < 1 || tiles_y < 1) throw Error("clahe: tile grid must be at least 1x1");
        if (bins < 2) throw Error("clahe: bins must be >= 2");
    }
};

/// Quantizes a lightness value in [0,100] to one of `bins` evenly spaced levels.
inline int lightness_bin(double l, int bins)
{
    const double q = std::floor(std::clamp(l, 0.0, 100.0) * (bins - 1) / 100.0 + 0.5);
    return std::clamp(static_cast<int>(q), 0, bins - 1);
}

/// Equalization lookup from a (possibly clipped) histogram. A bin maps to the
/// cumulative mass strictly below it plus half its own mass, so an isolated
/// level sits at the middle of the probability interval it occupies.
inline std::vector<double> equalization_lut(const std::vector<double>& hist, double total)
{
    std::vector<double> lut(hist.size());
    const double top = static_cast<double>(hist.size() - 1);
    double below = 0.0;
    for (std::size_t b = 0; b < hist.size(); ++b) {
        lut[b] = top * (below + 0.5 * hist[b]) / total;
        below += hist[b];
    }
    return lut;
}

inline void clip_histogram(std::vector<double>& hist, double limit)
{
    double excess = 0.0;
    for (double& h : hist) {
        if (h > limit) {
            excess += h - limit;
            h = limit;
        }
    }
    const double share = excess / static_cast<double>(hist.size());
    for (double& h : hist) {
        h += share;
    }
}

namespace detail {

struct TileAxis {
    std::vector<int> begin;  // tiles + 1 boundaries
    std::vector<double> center;

    TileAxis(int extent, int tiles)
    {
        begin.resize(static_cast<std::size_t>(tiles) + 1);
        center.resize(static_cast<std::size_t>(tiles));
        for (int t = 0; t <= tiles; ++t) {
            begin[static_cast<std::size_t>(t)] = static_cast<int>(
                static_cast<long long>(t) * extent / tiles);
        }
        for (int t = 0; t < tiles; ++t) {
            center[static_cast<std::size_t>(t)] =
                0.5 * (begin[static_cast<std::size_t>(t)] + begin[static_cast<std::size_t>(t) + 1] - 1);
        }
    }

    // Pair of neighbouring tiles bracketing `pos` and the weight of the second.
    struct Blend {
        int t0, t1;
        double w1;
    };

    [[nodiscard]] Blend blend(int pos) const
    {
        const int n = static_cast<int>(center.size());
        const double p = pos;
        if (p <= center.front()) return {0, 0, 0.0};
        if (p >= center.back()) return {n - 1, n - 1, 0.0};
        int t = 0;
        while (t + 1 < n && center[static_cast<std::size_t>(t) + 1] <= p) ++t;
        const double c0 = center[static_cast<std::size_t>(t)];
        const double c1 = center[static_cast<std::size_t>(t) + 1];
        return {t, t + 1, (p - c0) / (c1 - c0)};
    }
};

}  // namespace detail

/// CLAHE over a lightness plane with values in [0,100]. Returns a plane in the same range.
inline GrayImage clahe_lightness(const GrayImage& lightness, const ClaheParams& params)
{
    params.validate();
    const int w = lightness.width();
    const int h = lightness.height();
    if (w < params.tiles_x || h < params.tiles_y) {
        throw Error("clahe: image " + std::to_string(w) + "x" + std::to_string(h) +
                    " is smaller than the tile grid");
    }
    const int bins = params.bins;
    const detail::TileAxis ax(w, params.tiles_x);
    const detail::TileAxis ay(h, params.tiles_y);

    std::vector<int> level(lightness.size());
    for (std::size_t i = 0; i < lightness.size(); ++i) {
        level[i] = lightness_bin(lightness[i], bins);
    }

    std::vector<std::vector<double>> luts(static_cast<std::size_t>(params.tiles_x) *
                                          static_cast<std::size_t>(params.tiles_y));
    for (int ty = 0; ty < params.tiles_y; ++ty) {
        for (int tx = 0; tx < params.tiles_x; ++tx) {
            std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
            const int x0 = ax.begin[static_cast<std::size_t>(tx)];
            const int x1 = ax.begin[static_cast<std::size_t>(tx) + 1];
            const int y0 = ay.begin[static_cast<std::size_t>(ty)];
            const int y1 = ay.begin[static_cast<std::size_t>(ty) + 1];
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    hist[static_cast<std::size_t>(level[lightness.index(x, y)])] += 1.0;
                }
            }
            const double total = static_cast<double>(x1 - x0) * static_cast<double>(y1 - y0);
            if (std::isfinite(params.clip_limit)) {
                clip_histogram(hist, params.clip_limit * total / bins);
            }
            luts[static_cast<std::size_t>(ty) * static_cast<std::size_t>(params.tiles_x) +
                 static_cast<std::size_t>(tx)] = equalization_lut(hist, total);
        }
    }

    auto lut_at = [&](int tx, int ty, int b) {
        return luts[static_cast<std::size_t>(ty) * static_cast<std::size_t>(params.tiles_x) +
                    static_cast<std::size_t>(tx)][static_cast<std::size_t>(b)];
    };

    std::vector<detail::TileAxis::Blend> xb(static_cast<std::size_t>(w));
    for (int x = 0; x < w; ++x) xb[static_cast<std::size_t>(x)] = ax.blend(x);

    GrayImage out(w, h);
    const double to_lightness = 100.0 / (bins - 1);
    for (int y = 0; y < h; ++y) {
        const auto by = ay.blend(y);
        for (int x = 0; x < w; ++x) {
            const auto& bx = xb[static_cast<std::size_t>(x)];
            const int b = level[lightness.index(x, y)];
            const double top = (1.0 - bx.w1) * lut_at(bx.t0, by.t0, b) + bx.w1 * lut_at(bx.t1, by.t0, b);
            const double bot = (1.0 - bx.w1) * lut_at(bx.t0, by.t1, b) + bx.w1 * lut_at(bx.t1, by.t1, b);
            out(x, y) = std::clamp(((1.0 - by.w1) * top + by.w1 * bot) * to_lightness, 0.0, 100.0);
        }
    }
    return out;
}

/// Lab round trip with CLAHE applied to L only; a and b pass through untouched.
inline RgbImage clahe_l_channel(const RgbImage& img, const ClaheParams& params)
{
    LabImage lab = rgb_to_lab(img);
    GrayImage l(lab.width(), lab.height());
    for (std::size_t i = 0; i < lab.size(); ++i) l[i] = lab[i][0];
    const GrayImage enhanced = clahe_lightness(l, params);
    for (std::size_t i = 0; i < lab.size(); ++i) lab[i][0] = enhanced[i];
    return lab_to_rgb(lab);
}

// ---------------------------------------------------------------------------
// Hessian and Frangi vesselness
// ---------------------------------------------------------------------------

struct HessianField {
    GrayImage dxx;
    GrayImage dxy;
    GrayImage dyy;
};

namespace detail {

inline int reflect101(int i, int n)
{
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

// Correlation taps for k = -r..r: smoothing, first and second derivative of a
// Gaussian. Derivative taps are normalized to be exact on x and x^2.
struct GaussianTaps {
    int radius = 0;
    std::vector<double> g0, g1, g2;

    explicit GaussianTaps(double sigma)
    {
        radius = static_cast<int>(std::ceil(4.0 * sigma));
        const std::size_t n = static_cast<std::size_t>(2 * radius + 1);
        g0.resize(n);
        g1.resize(n);
        g2.resize(n);
        double s0 = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            const double g = std::exp(-0.5 * k * k / (sigma * sigma));
            const auto i = static_cast<std::size_t>(k + radius);
            g0[i] = g;
            g1[i] = k * g;
            g2[i] = (k * k / (sigma * sigma) - 1.0) * g;
            s0 += g;
        }
        double mean2 = 0.0;
        for (double& v : g0) v /= s0;
        for (double v : g2) mean2 += v;
        mean2 /= static_cast<double>(n);
        double m1 = 0.0, m2 = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            const auto i = static_cast<std::size_t>(k + radius);
            g2[i] -= mean2;
            m1 += k * g1[i];
            m2 += static_cast<double>(k) * k * g2[i];
        }
        for (double& v : g1) v /= m1;
        for (double& v : g2) v *= 2.0 / m2;
    }
};

inline GrayImage correlate_x(const GrayImage& src, const std::vector<double>& taps, int radius)
{
    const int w = src.width();
    GrayImage out(w, src.height());
    std::vector<int> idx(static_cast<std::size_t>(w + 2 * radius));
    for (int i = -radius; i < w + radius; ++i) idx[static_cast<std::size_t>(i + radius)] = reflect101(i, w);
    for (int y = 0; y < src.height(); ++y) {
        const double* row = &src.data()[src.index(0, y)];
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += row[idx[static_cast<std::size_t>(x + k + radius)]] *
                       taps[static_cast<std::size_t>(k + radius)];
            }
            out(x, y) = acc;
        }
    }
    return out;
}

inline GrayImage correlate_y(const GrayImage& src, const std::vector<double>& taps, int radius)
{
    const int h = src.height();
    const int w = src.width();
    GrayImage out(w, h);
    std::vector<int> idx(static_cast<std::size_t>(h + 2 * radius));
    for (int i = -radius; i < h + radius; ++i) idx[static_cast<std::size_t>(i + radius)] = reflect101(i, h);
    std::vector<double> acc(static_cast<std::size_t>(w));
    for (int y = 0; y < h; ++y) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int k = -radius; k <= radius; ++k) {
            const double t = taps[static_cast<std::size_t>(k + radius)];
            const double* row = &src.data()[src.index(0, idx[static_cast<std::size_t>(y + k + radius)])];
            for (int x = 0; x < w; ++x) acc[static_cast<std::size_t>(x)] += row[x] * t;
        }
        std::copy(acc.begin(), acc.end(), &out.data()[out.index(0, y)]);
    }
    return out;
}

}  // namespace detail

/// Scale-normalized (times sigma^2) Gaussian second derivatives, reflected borders,
/// kernels truncated at 4 sigma.
inline HessianField hessian2d(const GrayImage& gray, double sigma)
{
    if (!(sigma > 0.0)) throw Error("hessian2d: sigma must be positive");
    const detail::GaussianTaps taps(sigma);
    const int r = taps.radius;
    const GrayImage sx0 = detail::correlate_x(gray, taps.g0, r);
    const GrayImage sx1 = detail::correlate_x(gray, taps.g1, r);
    const GrayImage sx2 = detail::correlate_x(gray, taps.g2, r);
    HessianField h{detail::correlate_y(sx2, taps.g0, r), detail::correlate_y(sx1, taps.g1, r),
                   detail::correlate_y(sx0, taps.g2, r)};
    const double s2 = sigma * sigma;
    for (auto* plane : {&h.dxx, &h.dxy, &h.dyy}) {
        for (double& v : plane->data()) v *= s2;
    }
    return h;
}

struct FrangiParams {
    std::vector<double> sigmas{1.0, 2.0, 3.0, 4.0};
    double beta = 0.5;
    // Unset: half of the largest structureness found at each scale.
    std::optional<double> c;
    bool bright_on_dark = false;

    void validate() const
    {
        if (sigmas.empty()) throw Error("frangi: at least one sigma is required");
        for (std::size_t i = 0; i < sigmas.size(); ++i) {
            if (!(sigmas[i] > 0.0)) throw Error("frangi: sigmas must be positive");
            if (i > 0 && !(sigmas[i] > sigmas[i - 1])) throw Error("frangi: sigmas must be strictly increasing");
        }
        if (!(beta > 0.0)) throw Error("frangi: beta must be positive");
        if (c && !(*c > 0.0)) throw Error("frangi: c must be positive");
    }
};

/// Eigenvalues of [[dxx,dxy],[dxy,dyy]] ordered so that |first| <= |second|.
inline std::pair<double, double> hessian_eigenvalues(double dxx, double dxy, double dyy)
{
    const double half_trace = 0.5 * (dxx + dyy);
    const double disc = std::sqrt(0.25 * (dxx - dyy) * (dxx - dyy) + dxy * dxy);
    const double a = half_trace + disc;
    const double b = half_trace - disc;
    return std::abs(a) <= std::abs(b) ? std::pair{a, b} : std::pair{b, a};
}

/// Single-scale Frangi measure for an ordered eigenvalue pair.
inline double vesselness_measure(double l1, double l2, double beta, double c, bool bright_on_dark)
{
    if (l2 == 0.0) return 0.0;
    if (bright_on_dark ? l2 > 0.0 : l2 < 0.0) return 0.0;
    const double rb = std::abs(l1) / std::abs(l2);
    const double s2 = l1 * l1 + l2 * l2;
    return std::exp(-rb * rb / (2.0 * beta * beta)) * (1.0 - std::exp(-s2 / (2.0 * c * c)));
}

/// Direction across the structure (unit eigenvector of the larger-magnitude
/// eigenvalue) and the scale at which a pixel's vesselness peaked.
struct CrossSection {
    double nx = 1.0;
    double ny = 0.0;
    double sigma = 0.0;  // 0 where no scale responded
};

namespace detail {

inline std::pair<double, double> major_axis(double dxx, double dxy, double dyy, double l2)
{
    // Two candidate eigenvectors; take the better conditioned one.
    const double ax = dxy, ay = l2 - dxx;
    const double bx = l2 - dyy, by = dxy;
    const double na = std::hypot(ax, ay), nb = std::hypot(bx, by);
    if (na == 0.0 && nb == 0.0) return {1.0, 0.0};
    return na >= nb ? std::pair{ax / na, ay / na} : std::pair{bx / nb, by / nb};
}

}  // namespace detail

/// Per-pixel maximum over scales, before normalization. When `cross` is given it
/// receives the winning scale and cross-section direction of every pixel.
inline GrayImage frangi_vesselness_raw(const GrayImage& gray, const FrangiParams& params,
                                       std::vector<CrossSection>* cross = nullptr)
{
    params.validate();
    GrayImage best(gray.width(), gray.height(), 0.0);
    if (cross) cross->assign(gray.size(), CrossSection{});
    // Structureness at or below this is rounding noise from flat input.
    double peak_input = 1.0;
    for (double v : gray.data()) peak_input = std::max(peak_input, std::abs(v));
    const double flat = 1e-9 * peak_input;
    std::vector<std::pair<double, double>> eig(gray.size());
    for (double sigma : params.sigmas) {
        const HessianField h = hessian2d(gray, sigma);
        double max_s = 0.0;
        for (std::size_t i = 0; i < gray.size(); ++i) {
            eig[i] = hessian_eigenvalues(h.dxx[i], h.dxy[i], h.dyy[i]);
            max_s = std::max(max_s, std::hypot(eig[i].first, eig[i].second));
        }
        if (max_s <= flat) continue;
        const double c = params.c ? *params.c : 0.5 * max_s;
        for (std::size_t i = 0; i < gray.size(); ++i) {
            const double v = vesselness_measure(eig[i].first, eig[i].second, params.beta, c, params.bright_on_dark);
            if (v <= best[i]) continue;
            best[i] = v;
            if (cross) {
                const auto [nx, ny] = detail::major_axis(h.dxx[i], h.dxy[i], h.dyy[i], eig[i].second);
                (*cross)[i] = {nx, ny, sigma};
            }
        }
    }
    return best;
}

/// Multiscale vesselness normalized to [0,1] by its global maximum.
inline GrayImage frangi_vesselness(const GrayImage& gray, const FrangiParams& params)
{
    GrayImage v = frangi_vesselness_raw(gray, params);
    const double peak = *std::max_element(v.data().begin(), v.data().end());
    if (peak > 0.0) {
        for (double& x : v.data()) x /= peak;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Hair detection and removal
// ---------------------------------------------------------------------------

struct HairRemovalParams {
    double response_threshold = 0.25;
    int dilation_radius = 2;
    int inpaint_radius = 5;
    // A hair pixel must be darker (or brighter, for bright hair) than both sides of
    // the structure; the weaker side must reach this fraction of the stronger side's
    // contrast. 0 disables the test.
    double ridge_symmetry = 0.5;

    void validate() const
    {
        if (!(response_threshold >= 0.0 && response_threshold <= 1.0))
            throw Error("hair: response_threshold must lie in [0,1]");
        if (dilation_radius < 0) throw Error("hair: dilation_radius must be >= 0");
        if (inpaint_radius < 1) throw Error("hair: inpaint_radius must be >= 1");
        if (!(ridge_symmetry >= 0.0 && ridge_symmetry <= 1.0))
            throw Error("hair: ridge_symmetry must lie in [0,1]");
    }
};

/// Binary dilation by the digital disk {dx^2 + dy^2 <= r^2}.
inline BinaryMask dilate_disk(const BinaryMask& mask, int radius)
{
    if (radius <= 0) return mask;
    std::vector<PixelCoord> offsets;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (dx * dx + dy * dy <= radius * radius) offsets.push_back({dx, dy});
        }
    }
    BinaryMask out(mask.width(), mask.height(), 0);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask(x, y)) continue;
            for (const auto& o : offsets) {
                if (mask.contains(x + o.x, y + o.y)) out(x + o.x, y + o.y) = 1;
            }
        }
    }
    return out;
}

inline BinaryMask threshold_response(const GrayImage& response, double threshold)
{
    BinaryMask mask(response.width(), response.height(), 0);
    for (std::size_t i = 0; i < response.size(); ++i) mask[i] = response[i] >= threshold ? 1 : 0;
    return mask;
}

inline BinaryMask detect_hair(const GrayImage& response, const HairRemovalParams& params)
{
    params.validate();
    return dilate_disk(threshold_response(response, params.response_threshold), params.dilation_radius);
}

namespace detail {

inline double sample_bilinear(const GrayImage& g, double x, double y)
{
    x = std::clamp(x, 0.0, static_cast<double>(g.width() - 1));
    y = std::clamp(y, 0.0, static_cast<double>(g.height() - 1));
    const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, g.width() - 1), y1 = std::min(y0 + 1, g.height() - 1);
    const double fx = x - x0, fy = y - y0;
    return (1 - fy) * ((1 - fx) * g(x0, y0) + fx * g(x1, y0)) + fy * ((1 - fx) * g(x0, y1) + fx * g(x1, y1));
}

}  // namespace detail

/// Keeps candidates that look like a thin line: contrast on both sides across the
/// structure and little contrast along it. Borders and corners of large dark
/// regions fail. Samples are taken 2 sigma away.
inline BinaryMask keep_two_sided_ridges(const GrayImage& gray, const BinaryMask& candidates,
                                        const std::vector<CrossSection>& cross, double min_symmetry,
                                        bool bright_on_dark)
{
    require_same_shape(gray, candidates, "keep_two_sided_ridges");
    if (cross.size() != gray.size()) throw Error("keep_two_sided_ridges: cross-section map does not match image");
    BinaryMask out(gray.width(), gray.height(), 0);
    const double sign = bright_on_dark ? -1.0 : 1.0;
    for (int y = 0; y < gray.height(); ++y) {
        for (int x = 0; x < gray.width(); ++x) {
            const std::size_t i = gray.index(x, y);
            if (!candidates[i] || cross[i].sigma <= 0.0) continue;
            const double d = std::max(1.5, 2.0 * cross[i].sigma);
            const double a = sign * (detail::sample_bilinear(gray, x + d * cross[i].nx, y + d * cross[i].ny) - gray[i]);
            const double b = sign * (detail::sample_bilinear(gray, x - d * cross[i].nx, y - d * cross[i].ny) - gray[i]);
            const double weak = std::min(a, b), strong = std::max(a, b);
            if (!(strong > 0.0 && weak >= min_symmetry * strong)) continue;
            // Along the structure the contrast must stay low; a corner of a dark blob
            // looks two-sided across its diagonal but opens up along it.
            const double tx = -cross[i].ny, ty = cross[i].nx;
            const double c = sign * (detail::sample_bilinear(gray, x + d * tx, y + d * ty) - gray[i]);
            const double e = sign * (detail::sample_bilinear(gray, x - d * tx, y - d * ty) - gray[i]);
            out[i] = std::max(c, e) <= (1.0 - min_symmetry) * weak;
        }
    }
    return out;
}

/// Replaces masked pixels by the channel-wise (lower) median of unmasked pixels in a
/// square window, widening the window by `inpaint_radius` until it samples something.
inline RgbImage remove_hair(const RgbImage& img, const BinaryMask& hair, const HairRemovalParams& params)
{
    params.validate();
    require_same_shape(img, hair, "remove_hair");
    if (count_true(hair) == img.size()) {
        throw Error("remove_hair: mask covers the whole image, nothing to sample from");
    }
    RgbImage out = img;
    std::array<std::vector<std::uint8_t>, 3> samples;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (!hair(x, y)) continue;
            for (int r = params.inpaint_radius;; r += params.inpaint_radius) {
                for (auto& s : samples) s.clear();
                const int x0 = std::max(0, x - r), x1 = std::min(img.width() - 1, x + r);
                const int y0 = std::max(0, y - r), y1 = std::min(img.height() - 1, y + r);
                for (int v = y0; v <= y1; ++v) {
                    for (int u = x0; u <= x1; ++u) {
                        if (hair(u, v)) continue;
                        for (int c = 0; c < 3; ++c) samples[c].push_back(img(u, v)[c]);
                    }
                }
                if (!samples[0].empty()) break;
            }
            for (int c = 0; c < 3; ++c) {
                auto& s = samples[c];
                auto mid = s.begin() + static_cast<std::ptrdiff_t>((s.size() - 1) / 2);
                std::nth_element(s.begin(), mid, s.end());
                out(x, y)[c] = *mid;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full preprocessing chain: scale, illumination correction, hair removal
// ---------------------------------------------------------------------------

struct PreprocessParams {
    ScaleRule scale;
    bool clahe_enabled = true;
    ClaheParams clahe;
    bool hair_enabled = true;
    FrangiParams frangi;
    HairRemovalParams hair;
};

struct PreprocessResult {
    RgbImage image;   // processing-resolution, enhanced, hair removed
    RgbImage scaled;  // processing-resolution input before enhancement
    BinaryMask hair;  // empty raster when hair removal is disabled
    bool downscaled = false;
};

inline PreprocessResult preprocess(const RgbImage& img, const PreprocessParams& params)
{
    PreprocessResult res;
    res.downscaled = needs_downscale(img.width(), img.height(), params.scale);
    res.scaled = maybe_downscale(img, params.scale);
    res.image = params.clahe_enabled ? clahe_l_channel(res.scaled, params.clahe) : res.scaled;
    if (params.hair_enabled) {
        params.hair.validate();
        const GrayImage gray = rgb_to_gray(res.image);
        std::vector<CrossSection> cross;
        GrayImage response = frangi_vesselness_raw(gray, params.frangi, &cross);
        const double peak = *std::max_element(response.data().begin(), response.data().end());
        if (peak > 0.0) {
            for (double& v : response.data()) v /= peak;
        }
        BinaryMask candidates = threshold_response(response, params.hair.response_threshold);
        if (params.hair.ridge_symmetry > 0.0) {
            candidates = keep_two_sided_ridges(gray, candidates, cross, params.hair.ridge_symmetry,
                                               params.frangi.bright_on_dark);
        }
        res.hair = dilate_disk(candidates, params.hair.dilation_radius);
        if (count_true(res.hair) > 0 && count_true(res.hair) < res.hair.size()) {
            res.image = remove_hair(res.image, res.hair, params.hair);
        }
    }
    return res;
}

}  // namespace dermseg
