#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "dermseg/cluster.hpp"
#include "dermseg/colormodel.hpp"
#include "dermseg/image.hpp"

namespace dermseg {

enum class Connectivity { Four = 4, Eight = 8 };

inline Connectivity connectivity_from_int(int n)
{
    if (n == 4) return Connectivity::Four;
    if (n == 8) return Connectivity::Eight;
    throw Error("connectivity must be 4 or 8, got " + std::to_string(n));
}

enum class FloodReference { FixedSeedColor, MovingLocalColor };

struct FloodFillParams {
    int tolerance = 20;
    Connectivity connectivity = Connectivity::Four;
    FloodReference reference = FloodReference::FixedSeedColor;

    void validate() const
    {
        if (tolerance < 0 || tolerance > 255) throw Error("flood_fill: tolerance must lie in [0,255]");
    }
};

struct BoundingBox {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive; x1 < x0 when empty

    void extend(int x, int y)
    {
        if (x1 < x0) {
            x0 = x1 = x;
            y0 = y1 = y;
            return;
        }
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Region {
    BinaryMask mask;
    std::size_t area = 0;
    BoundingBox bbox;
};

struct SeedSpec {
    PixelCoord centroid_seed;
    PixelCoord boundary_seed;
    int source_cluster = 0;
};

namespace detail {

inline constexpr int kDx8[8] = {1, -1, 0, 0, 1, -1, 1, -1};
inline constexpr int kDy8[8] = {0, 0, 1, -1, 1, 1, -1, -1};

inline int neighbour_count(Connectivity c) { return c == Connectivity::Four ? 4 : 8; }

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

inline Region region_from_mask(BinaryMask mask)
{
    Region r;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask(x, y)) continue;
            ++r.area;
            r.bbox.extend(x, y);
        }
    }
    r.mask = std::move(mask);
    return r;
}

}  // namespace detail

inline BinaryMask cluster_mask(const ClusterResult& result, int cluster_id, int width, int height)
{
    BinaryMask m(width, height, 0);
    if (result.labels.size() != m.size()) throw Error("cluster_mask: labels do not match dimensions");
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = result.labels[i] == cluster_id;
    return m;
}

/// Rounded mean position of the cluster's pixels, snapped to the nearest member
/// (row-major tie-break) when the mean falls outside the cluster.
inline PixelCoord cluster_spatial_centroid(const std::vector<int>& labels, int cluster_id, int width, int height)
{
    if (labels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error("cluster_spatial_centroid: labels do not match dimensions");
    }
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (labels[static_cast<std::size_t>(y) * width + x] != cluster_id) continue;
            sx += x;
            sy += y;
            ++n;
        }
    }
    if (n == 0) throw Error("cluster_spatial_centroid: cluster " + std::to_string(cluster_id) + " is empty");
    const PixelCoord mean{detail::round_half_up(sx / n), detail::round_half_up(sy / n)};
    if (labels[static_cast<std::size_t>(mean.y) * width + mean.x] == cluster_id) return mean;

    PixelCoord best{};
    long long best_d = std::numeric_limits<long long>::max();
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (labels[static_cast<std::size_t>(y) * width + x] != cluster_id) continue;
            const long long dx = x - mean.x, dy = y - mean.y;
            if (dx * dx + dy * dy < best_d) {
                best_d = dx * dx + dy * dy;
                best = {x, y};
            }
        }
    }
    return best;
}

/// True pixels with at least one false (or out-of-image) 4-neighbour.
inline bool is_boundary_pixel(const BinaryMask& mask, int x, int y)
{
    if (!mask(x, y)) return false;
    for (int d = 0; d < 4; ++d) {
        const int u = x + detail::kDx8[d], v = y + detail::kDy8[d];
        if (!mask.contains(u, v) || !mask(u, v)) return true;
    }
    return false;
}

/// Point `offset` pixels past the cluster boundary on the ray from the centroid
/// through its nearest boundary pixel; may lie outside the image.
inline std::array<double, 2> boundary_ray_point(const BinaryMask& cluster, PixelCoord centroid, int offset)
{
    if (offset < 1) throw Error("boundary_seed: offset must be >= 1");
    if (!cluster.contains(centroid)) throw Error("boundary_seed: centroid outside the image");
    PixelCoord nearest{};
    long long best = std::numeric_limits<long long>::max();
    for (int y = 0; y < cluster.height(); ++y) {
        for (int x = 0; x < cluster.width(); ++x) {
            if (!is_boundary_pixel(cluster, x, y)) continue;
            const long long dx = x - centroid.x, dy = y - centroid.y;
            if (dx * dx + dy * dy < best) {
                best = dx * dx + dy * dy;
                nearest = {x, y};
            }
        }
    }
    if (best == std::numeric_limits<long long>::max()) throw Error("boundary_seed: cluster mask is empty");

    double dirx = 0.0, diry = 0.0;
    if (best > 0) {
        dirx = nearest.x - centroid.x;
        diry = nearest.y - centroid.y;
    } else {
        // Outward normal from the directions of the background neighbours.
        int first = -1;
        for (int d = 0; d < 4; ++d) {
            const int u = centroid.x + detail::kDx8[d], v = centroid.y + detail::kDy8[d];
            if (!cluster.contains(u, v) || !cluster(u, v)) {
                dirx += detail::kDx8[d];
                diry += detail::kDy8[d];
                if (first < 0) first = d;
            }
        }
        if (dirx == 0.0 && diry == 0.0) {
            dirx = detail::kDx8[first];
            diry = detail::kDy8[first];
        }
    }
    const double len = std::hypot(dirx, diry);
    return {nearest.x + offset * dirx / len, nearest.y + offset * diry / len};
}

inline PixelCoord boundary_seed(const BinaryMask& cluster, PixelCoord centroid, int offset = 10)
{
    const auto p = boundary_ray_point(cluster, centroid, offset);
    return {std::clamp(detail::round_half_up(p[0]), 0, cluster.width() - 1),
            std::clamp(detail::round_half_up(p[1]), 0, cluster.height() - 1)};
}

/// Breadth-first region growing; a neighbour joins when every channel is within
/// `tolerance` of the reference color.
inline Region flood_fill(const RgbImage& img, PixelCoord seed, const FloodFillParams& params = {})
{
    params.validate();
    if (!img.contains(seed)) throw Error("flood_fill: seed outside the image");
    const int nn = detail::neighbour_count(params.connectivity);
    auto close = [tol = params.tolerance](const Rgb& a, const Rgb& b) {
        return std::abs(a[0] - b[0]) <= tol && std::abs(a[1] - b[1]) <= tol && std::abs(a[2] - b[2]) <= tol;
    };
    BinaryMask mask(img.width(), img.height(), 0);
    const Rgb ref = img(seed.x, seed.y);
    std::queue<PixelCoord> q;
    q.push(seed);
    mask(seed.x, seed.y) = 1;
    while (!q.empty()) {
        const PixelCoord p = q.front();
        q.pop();
        const Rgb& here = params.reference == FloodReference::FixedSeedColor ? ref : img(p.x, p.y);
        for (int d = 0; d < nn; ++d) {
            const int u = p.x + detail::kDx8[d], v = p.y + detail::kDy8[d];
            if (!img.contains(u, v) || mask(u, v)) continue;
            if (!close(img(u, v), here)) continue;
            mask(u, v) = 1;
            q.push({u, v});
        }
    }
    return detail::region_from_mask(std::move(mask));
}

struct Component {
    int label = 0;
    std::size_t area = 0;
    BoundingBox bbox;
};

struct ComponentLabels {
    int width = 0;
    int height = 0;
    std::vector<int> labels;  // 0 = background, components 1..N
    std::vector<Component> components;

    [[nodiscard]] int at(PixelCoord p) const { return labels[static_cast<std::size_t>(p.y) * width + p.x]; }
};

/// Two-pass union-find labeling. Labels are numbered 1..N in row-major order of
/// each component's first pixel.
inline ComponentLabels connected_components(const BinaryMask& mask, Connectivity conn = Connectivity::Eight)
{
    const int w = mask.width(), h = mask.height();
    std::vector<int> provisional(mask.size(), 0);
    std::vector<int> parent{0};
    auto find = [&parent](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    };

    // Previously visited neighbours: west, north, and for 8-connectivity the two upper diagonals.
    const int back_dx[4] = {-1, 0, -1, 1};
    const int back_dy[4] = {0, -1, -1, -1};
    const int nback = conn == Connectivity::Four ? 2 : 4;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask(x, y)) continue;
            int label = 0;
            for (int d = 0; d < nback; ++d) {
                const int u = x + back_dx[d], v = y + back_dy[d];
                if (!mask.contains(u, v)) continue;
                const int nl = provisional[mask.index(u, v)];
                if (nl == 0) continue;
                if (label == 0) {
                    label = nl;
                } else {
                    unite(label, nl);
                }
            }
            if (label == 0) {
                label = static_cast<int>(parent.size());
                parent.push_back(label);
            }
            provisional[mask.index(x, y)] = label;
        }
    }

    ComponentLabels out;
    out.width = w;
    out.height = h;
    out.labels.assign(mask.size(), 0);
    std::vector<int> final_label(parent.size(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = mask.index(x, y);
            if (provisional[i] == 0) continue;
            const int root = find(provisional[i]);
            int& fl = final_label[static_cast<std::size_t>(root)];
            if (fl == 0) {
                fl = static_cast<int>(out.components.size()) + 1;
                out.components.push_back({fl, 0, {}});
            }
            out.labels[i] = fl;
            auto& comp = out.components[static_cast<std::size_t>(fl - 1)];
            ++comp.area;
            comp.bbox.extend(x, y);
        }
    }
    return out;
}

/// Sets background pockets that are not 4-connected to the image border.
inline BinaryMask fill_holes(const BinaryMask& mask)
{
    BinaryMask background(mask.width(), mask.height(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) background[i] = !mask[i];
    const ComponentLabels cc = connected_components(background, Connectivity::Four);
    std::vector<std::uint8_t> touches(cc.components.size() + 1, 0);
    const int w = mask.width(), h = mask.height();
    auto mark = [&](int x, int y) { touches[static_cast<std::size_t>(cc.labels[mask.index(x, y)])] = 1; };
    for (int x = 0; x < w; ++x) {
        mark(x, 0);
        mark(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        mark(0, y);
        mark(w - 1, y);
    }
    BinaryMask out = mask;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int l = cc.labels[i];
        if (l != 0 && !touches[static_cast<std::size_t>(l)]) out[i] = 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// End-to-end segmentation
// ---------------------------------------------------------------------------

struct SegmentParams {
    KMeansParams kmeans;
    double min_fraction = 0.5;
    std::string class_name;  // empty: combined envelope
    bool seed_all_selected = false;
    FloodFillParams flood;
    int boundary_offset = 10;
    bool fill_holes = true;
};

struct SegmentationResult {
    BinaryMask mask;
    std::vector<Region> regions;
    std::vector<int> selected_clusters;
    std::vector<SeedSpec> seeds;
    bool no_cluster_selected = false;  // nothing lesion-colored in the image
    bool fallback_used = false;        // no cluster met min_fraction; nearest-color cluster used
    std::vector<std::string> notes;
};

inline SegmentationResult segment_image(const RgbImage& img, const LesionColorModel& model,
                                        const SegmentParams& params = {})
{
    SegmentationResult res;
    res.mask = BinaryMask(img.width(), img.height(), 0);
    const ColorRange& range = model.range_for(params.class_name);

    const ClusterResult clusters = kmeans(img, params.kmeans);
    std::vector<int> chosen = select_lesion_clusters(img, clusters, range, params.min_fraction);
    res.selected_clusters = chosen;

    if (chosen.empty()) {
        const bool any_in_range = std::any_of(img.data().begin(), img.data().end(),
                                              [&](const Rgb& p) { return pixel_in_range(p, range); });
        if (!any_in_range) {
            res.no_cluster_selected = true;
            res.notes.push_back("no cluster selected: image has no pixel in the lesion color range");
            return res;
        }
        const auto center = range.center();
        const auto members = cluster_members(clusters, static_cast<int>(clusters.centroids.size()));
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < clusters.centroids.size(); ++j) {
            if (members[j].empty()) continue;
            const double d = squared_distance(clusters.centroids[j], center);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(j);
            }
        }
        res.fallback_used = true;
        chosen = {best};
        res.notes.push_back("fallback: cluster " + std::to_string(best) + " nearest to the range center");
    }
    if (!params.seed_all_selected) chosen.resize(1);

    BinaryMask united(img.width(), img.height(), 0);
    std::vector<PixelCoord> seed_points;
    for (int id : chosen) {
        const BinaryMask cmask = cluster_mask(clusters, id, img.width(), img.height());
        SeedSpec seed;
        seed.source_cluster = id;
        seed.centroid_seed = cluster_spatial_centroid(clusters.labels, id, img.width(), img.height());
        seed.boundary_seed = boundary_seed(cmask, seed.centroid_seed, params.boundary_offset);
        res.seeds.push_back(seed);

        std::vector<PixelCoord> grow{seed.centroid_seed};
        // The outer seed only grows when it lands on lesion-colored skin.
        if (pixel_in_range(img(seed.boundary_seed.x, seed.boundary_seed.y), range)) {
            grow.push_back(seed.boundary_seed);
        } else {
            res.notes.push_back("boundary seed of cluster " + std::to_string(id) +
                                " is outside the lesion color range; not grown");
        }
        for (const auto& p : grow) {
            Region r = flood_fill(img, p, params.flood);
            for (std::size_t i = 0; i < united.size(); ++i) united[i] |= r.mask[i];
            seed_points.push_back(p);
            res.regions.push_back(std::move(r));
        }
    }

    const ComponentLabels cc = connected_components(united, params.flood.connectivity);
    std::vector<std::uint8_t> keep(cc.components.size() + 1, 0);
    for (const auto& p : seed_points) keep[static_cast<std::size_t>(cc.at(p))] = 1;
    for (std::size_t i = 0; i < res.mask.size(); ++i) {
        const int l = cc.labels[i];
        res.mask[i] = l != 0 && keep[static_cast<std::size_t>(l)];
    }
    if (params.fill_holes) res.mask = fill_holes(res.mask);
    return res;
}

}  // namespace dermseg
