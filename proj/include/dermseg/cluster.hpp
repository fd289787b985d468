#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "dermseg/colormodel.hpp"
#include "dermseg/image.hpp"

namespace dermseg {

using Color3 = std::array<double, 3>;

struct KMeansParams {
    int k = 5;
    int max_iters = 100;
    double tol = 1e-4;  // max centroid shift, in units of the 0..1 normalized color cube
    std::uint64_t seed = 42;

    void validate() const
    {
        if (k < 1) throw Error("kmeans: k must be >= 1");
        if (max_iters < 1) throw Error("kmeans: max_iters must be >= 1");
        if (!(tol >= 0.0)) throw Error("kmeans: tol must be non-negative");
    }
};

struct ClusterResult {
    std::vector<Color3> centroids;
    std::vector<int> labels;  // one per pixel, row-major
    double inertia = 0.0;
    int iterations = 0;

    friend bool operator==(const ClusterResult&, const ClusterResult&) = default;
};

/// Receives the inertia after every assignment step, including the final one.
using InertiaTrace = std::function<void(int iteration, double inertia)>;

inline double squared_distance(const Color3& a, const Color3& b)
{
    const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
    return d0 * d0 + d1 * d1 + d2 * d2;
}

namespace detail {

// Uniform double in [0,1) from the top 53 bits; stable across standard libraries.
inline double unit_draw(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n)
{
    return std::min(n - 1, static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n)));
}

inline std::vector<Color3> kmeanspp_init(const std::vector<Color3>& pts, int k, std::mt19937_64& rng)
{
    std::vector<Color3> centers;
    centers.reserve(static_cast<std::size_t>(k));
    centers.push_back(pts[uniform_index(rng, pts.size())]);
    std::vector<double> d2(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = squared_distance(pts[i], centers[0]);
    while (static_cast<int>(centers.size()) < k) {
        double sum = 0.0;
        for (double v : d2) sum += v;
        std::size_t pick = 0;
        if (sum > 0.0) {
            const double target = unit_draw(rng) * sum;
            double acc = 0.0;
            pick = pts.size() - 1;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                acc += d2[i];
                if (acc > target && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = uniform_index(rng, pts.size());
        }
        centers.push_back(pts[pick]);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            d2[i] = std::min(d2[i], squared_distance(pts[i], centers.back()));
        }
    }
    return centers;
}

// Nearest centroid, ties to the lowest index. Returns the total squared distance.
inline double assign(const std::vector<Color3>& pts, const std::vector<Color3>& centers,
                     std::vector<int>& labels, std::vector<double>* dist = nullptr)
{
    double inertia = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        int best = 0;
        double best_d = squared_distance(pts[i], centers[0]);
        for (std::size_t j = 1; j < centers.size(); ++j) {
            const double d = squared_distance(pts[i], centers[j]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(j);
            }
        }
        labels[i] = best;
        if (dist) (*dist)[i] = best_d;
        inertia += best_d;
    }
    return inertia;
}

}  // namespace detail

/// Lloyd's algorithm on an explicit point set, k-means++ seeded.
inline ClusterResult kmeans_points(const std::vector<Color3>& pts, const KMeansParams& params,
                                   const InertiaTrace& trace = {})
{
    params.validate();
    if (pts.size() < static_cast<std::size_t>(params.k)) {
        throw Error("kmeans: k=" + std::to_string(params.k) + " exceeds the number of samples (" +
                    std::to_string(pts.size()) + ")");
    }
    const std::size_t k = static_cast<std::size_t>(params.k);
    std::mt19937_64 rng(params.seed);

    ClusterResult res;
    res.centroids = detail::kmeanspp_init(pts, params.k, rng);
    res.labels.assign(pts.size(), 0);
    std::vector<double> dist(pts.size());
    std::vector<Color3> sums(k);
    std::vector<std::size_t> counts(k);
    std::vector<std::uint8_t> taken(pts.size(), 0);

    for (int iter = 0; iter < params.max_iters; ++iter) {
        const double inertia = detail::assign(pts, res.centroids, res.labels, &dist);
        if (trace) trace(iter, inertia);

        std::fill(sums.begin(), sums.end(), Color3{0.0, 0.0, 0.0});
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto j = static_cast<std::size_t>(res.labels[i]);
            for (int c = 0; c < 3; ++c) sums[j][c] += pts[i][c];
            ++counts[j];
        }
        std::vector<Color3> next(k);
        std::vector<std::size_t> reseeded;
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0) {
                // Farthest pixel from its own centroid, each pixel used at most once.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    if (!taken[i] && dist[i] > far_d) {
                        far_d = dist[i];
                        far = i;
                    }
                }
                taken[far] = 1;
                reseeded.push_back(far);
                next[j] = pts[far];
            } else {
                const double n = static_cast<double>(counts[j]);
                next[j] = {sums[j][0] / n, sums[j][1] / n, sums[j][2] / n};
            }
        }
        for (auto i : reseeded) taken[i] = 0;

        double shift = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            shift = std::max(shift, std::sqrt(squared_distance(next[j], res.centroids[j])));
        }
        res.centroids = std::move(next);
        res.iterations = iter + 1;
        if (shift / 255.0 <= params.tol) break;
    }
    res.inertia = detail::assign(pts, res.centroids, res.labels);
    if (trace) trace(res.iterations, res.inertia);
    return res;
}

inline std::vector<Color3> pixel_colors(const RgbImage& img)
{
    std::vector<Color3> pts(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        pts[i] = {static_cast<double>(img[i][0]), static_cast<double>(img[i][1]),
                  static_cast<double>(img[i][2])};
    }
    return pts;
}

/// Clusters pixels by raw RGB color; spatial position is not a feature.
inline ClusterResult kmeans(const RgbImage& img, const KMeansParams& params, const InertiaTrace& trace = {})
{
    return kmeans_points(pixel_colors(img), params, trace);
}

/// Pixel indices per cluster, in row-major order.
inline std::vector<std::vector<std::size_t>> cluster_members(const ClusterResult& result, int k)
{
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < result.labels.size(); ++i) {
        members[static_cast<std::size_t>(result.labels[i])].push_back(i);
    }
    return members;
}

struct ClusterScore {
    int id = 0;
    double fraction = 0.0;
    std::size_t members = 0;
};

/// Every non-empty cluster with its in-range fraction, best first.
inline std::vector<ClusterScore> rank_clusters(const RgbImage& img, const ClusterResult& result,
                                               const ColorRange& range)
{
    if (result.labels.size() != img.size()) throw Error("select_lesion_clusters: labels do not match image");
    const auto members = cluster_members(result, static_cast<int>(result.centroids.size()));
    std::vector<ClusterScore> scores;
    for (std::size_t j = 0; j < members.size(); ++j) {
        if (members[j].empty()) continue;
        scores.push_back({static_cast<int>(j), fraction_in_range(img, members[j], range), members[j].size()});
    }
    std::stable_sort(scores.begin(), scores.end(), [](const ClusterScore& a, const ClusterScore& b) {
        if (a.fraction != b.fraction) return a.fraction > b.fraction;
        return a.members > b.members;
    });
    return scores;
}

inline std::vector<int> select_lesion_clusters(const RgbImage& img, const ClusterResult& result,
                                               const ColorRange& range, double min_fraction)
{
    std::vector<int> ids;
    for (const auto& s : rank_clusters(img, result, range)) {
        if (s.fraction >= min_fraction) ids.push_back(s.id);
    }
    return ids;
}

}  // namespace dermseg
