#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dermseg/image.hpp"

namespace dermseg {

inline constexpr int kModelVersion = 1;
inline const std::string kUnlabeledClass = "unlabeled";

/// Per-channel histogram of 8-bit values; bins partition [0,255] evenly.
struct ColorHistogram {
    int bins = 256;
    std::array<std::vector<std::uint64_t>, 3> counts;
    std::uint64_t total = 0;

    explicit ColorHistogram(int bin_count = 256) : bins(bin_count)
    {
        if (bins < 1 || bins > 256) throw Error("histogram: bins must lie in [1,256]");
        for (auto& c : counts) c.assign(static_cast<std::size_t>(bins), 0);
    }

    [[nodiscard]] int bin_of(std::uint8_t v) const { return v * bins / 256; }
    [[nodiscard]] int bin_low_value(int b) const { return (b * 256 + bins - 1) / bins; }
    [[nodiscard]] int bin_high_value(int b) const { return ((b + 1) * 256 + bins - 1) / bins - 1; }

    ColorHistogram& operator+=(const ColorHistogram& other)
    {
        if (other.bins != bins) throw Error("histogram: cannot merge histograms with different bins");
        for (int c = 0; c < 3; ++c) {
            for (std::size_t b = 0; b < counts[c].size(); ++b) counts[c][b] += other.counts[c][b];
        }
        total += other.total;
        return *this;
    }

    friend bool operator==(const ColorHistogram&, const ColorHistogram&) = default;
};

struct ColorRange {
    Rgb lo{0, 0, 0};
    Rgb hi{255, 255, 255};

    [[nodiscard]] bool contains(const ColorRange& other) const
    {
        for (int c = 0; c < 3; ++c) {
            if (other.lo[c] < lo[c] || other.hi[c] > hi[c]) return false;
        }
        return true;
    }

    [[nodiscard]] std::array<double, 3> center() const
    {
        return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
    }

    friend bool operator==(const ColorRange&, const ColorRange&) = default;
};

struct LesionColorModel {
    std::map<std::string, ColorRange> per_class;
    ColorRange combined;
    int bins = 256;
    double percentile_lo = 1.0;
    double percentile_hi = 99.0;

    /// Range for a named class, or the combined envelope when `name` is empty.
    [[nodiscard]] const ColorRange& range_for(const std::string& name) const
    {
        if (name.empty()) return combined;
        auto it = per_class.find(name);
        if (it == per_class.end()) throw Error("color model has no class '" + name + "'");
        return it->second;
    }

    friend bool operator==(const LesionColorModel&, const LesionColorModel&) = default;
};

inline ColorHistogram accumulate(const RgbImage& img, const BinaryMask& mask, ColorHistogram hist)
{
    require_same_shape(img, mask, "accumulate");
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (!mask[i]) continue;
        for (int c = 0; c < 3; ++c) ++hist.counts[c][static_cast<std::size_t>(hist.bin_of(img[i][c]))];
        ++hist.total;
    }
    return hist;
}

/// Percentile bounds: per channel, the first occupied bin whose cumulative count
/// reaches the requested share of the total.
inline ColorRange derive_range(const ColorHistogram& hist, double pct_lo, double pct_hi)
{
    if (!(pct_lo >= 0.0 && pct_lo < pct_hi && pct_hi <= 100.0)) {
        throw Error("derive_range: percentiles must satisfy 0 <= lo < hi <= 100");
    }
    if (hist.total == 0) throw Error("derive_range: histogram is empty");
    const double total = static_cast<double>(hist.total);
    auto bound = [&](const std::vector<std::uint64_t>& counts, double pct) {
        std::uint64_t cum = 0;
        for (std::size_t b = 0; b < counts.size(); ++b) {
            cum += counts[b];
            if (cum > 0 && static_cast<double>(cum) * 100.0 >= pct * total) return static_cast<int>(b);
        }
        return static_cast<int>(counts.size()) - 1;
    };
    ColorRange r;
    for (int c = 0; c < 3; ++c) {
        r.lo[c] = static_cast<std::uint8_t>(hist.bin_low_value(bound(hist.counts[c], pct_lo)));
        r.hi[c] = static_cast<std::uint8_t>(hist.bin_high_value(bound(hist.counts[c], pct_hi)));
    }
    return r;
}

struct TrainingSample {
    const RgbImage* image = nullptr;
    const BinaryMask* mask = nullptr;
    std::string class_name;  // empty means unlabeled
};

/// One histogram per class; unlabeled samples go to their own class.
inline std::map<std::string, ColorHistogram> class_histograms(std::span<const TrainingSample> samples,
                                                              int bins = 256)
{
    std::map<std::string, ColorHistogram> hists;
    for (const auto& s : samples) {
        const std::string name = s.class_name.empty() ? kUnlabeledClass : s.class_name;
        auto it = hists.try_emplace(name, bins).first;
        it->second = accumulate(*s.image, *s.mask, std::move(it->second));
    }
    return hists;
}

/// Ranges per class and their channel-wise envelope. Classes that saw no pixel are left out.
inline LesionColorModel model_from_histograms(const std::map<std::string, ColorHistogram>& hists,
                                              double pct_lo, double pct_hi)
{
    LesionColorModel model;
    model.percentile_lo = pct_lo;
    model.percentile_hi = pct_hi;
    bool first = true;
    for (const auto& [name, hist] : hists) {
        model.bins = hist.bins;
        if (hist.total == 0) continue;
        const ColorRange r = derive_range(hist, pct_lo, pct_hi);
        model.per_class.emplace(name, r);
        if (first) {
            model.combined = r;
            first = false;
        } else {
            for (int c = 0; c < 3; ++c) {
                model.combined.lo[c] = std::min(model.combined.lo[c], r.lo[c]);
                model.combined.hi[c] = std::max(model.combined.hi[c], r.hi[c]);
            }
        }
    }
    if (first) throw Error("train: no lesion pixels in any training mask");
    return model;
}

inline LesionColorModel train(std::span<const TrainingSample> samples, double pct_lo = 1.0,
                              double pct_hi = 99.0, int bins = 256)
{
    if (samples.empty()) throw Error("train: no samples");
    return model_from_histograms(class_histograms(samples, bins), pct_lo, pct_hi);
}

inline bool pixel_in_range(const Rgb& p, const ColorRange& r)
{
    return r.lo[0] <= p[0] && p[0] <= r.hi[0] && r.lo[1] <= p[1] && p[1] <= r.hi[1] &&
           r.lo[2] <= p[2] && p[2] <= r.hi[2];
}

inline double fraction_in_range(const RgbImage& img, std::span<const std::size_t> pixel_ids,
                                const ColorRange& r)
{
    if (pixel_ids.empty()) return 0.0;
    std::size_t hits = 0;
    for (auto i : pixel_ids) {
        if (i >= img.size()) throw Error("fraction_in_range: pixel index out of range");
        hits += pixel_in_range(img[i], r);
    }
    return static_cast<double>(hits) / static_cast<double>(pixel_ids.size());
}

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json range_to_json(const ColorRange& r)
{
    return {{"lo", {r.lo[0], r.lo[1], r.lo[2]}}, {"hi", {r.hi[0], r.hi[1], r.hi[2]}}};
}

inline ColorRange range_from_json(const nlohmann::json& j, const std::string& where)
{
    auto triple = [&](const char* key) {
        const auto& a = j.at(key);
        if (!a.is_array() || a.size() != 3) throw Error(where + "." + key + " must be a 3-element array");
        Rgb out{};
        for (int c = 0; c < 3; ++c) {
            const auto& v = a[static_cast<std::size_t>(c)];
            if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() > 255) {
                throw Error(where + "." + key + " entries must be integers in [0,255]");
            }
            out[c] = static_cast<std::uint8_t>(v.get<int>());
        }
        return out;
    };
    ColorRange r{triple("lo"), triple("hi")};
    for (int c = 0; c < 3; ++c) {
        if (r.lo[c] > r.hi[c]) throw Error(where + ": lo exceeds hi");
    }
    return r;
}

}  // namespace detail

inline std::string save_model(const LesionColorModel& model)
{
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [name, r] : model.per_class) per[name] = detail::range_to_json(r);
    const nlohmann::json j = {{"version", kModelVersion},
                              {"bins", model.bins},
                              {"percentile_lo", model.percentile_lo},
                              {"percentile_hi", model.percentile_hi},
                              {"combined", detail::range_to_json(model.combined)},
                              {"per_class", per}};
    return j.dump(2) + "\n";
}

inline LesionColorModel load_model(std::string_view text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("model: malformed JSON: ") + e.what());
    }
    try {
        if (!j.is_object()) throw Error("model: document must be a JSON object");
        const int version = j.at("version").get<int>();
        if (version != kModelVersion) {
            throw Error("model: unsupported version " + std::to_string(version));
        }
        LesionColorModel m;
        m.bins = j.at("bins").get<int>();
        m.percentile_lo = j.at("percentile_lo").get<double>();
        m.percentile_hi = j.at("percentile_hi").get<double>();
        m.combined = detail::range_from_json(j.at("combined"), "combined");
        if (j.contains("per_class")) {
            for (const auto& [name, r] : j.at("per_class").items()) {
                m.per_class.emplace(name, detail::range_from_json(r, "per_class." + name));
            }
        }
        for (const auto& [name, r] : m.per_class) {
            if (!m.combined.contains(r)) throw Error("model: combined range does not contain class " + name);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("model: ") + e.what());
    }
}

}  // namespace dermseg
