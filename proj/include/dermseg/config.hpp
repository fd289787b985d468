#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "dermseg/preprocess.hpp"
#include "dermseg/segment.hpp"

namespace dermseg {

struct HistogramParams {
    double percentile_lo = 1.0;
    double percentile_hi = 99.0;
    int bins = 256;
};

/// Every tunable of the pipeline. Serialized as nested JSON; see to_json().
struct PipelineConfig {
    PreprocessParams preprocess;
    HistogramParams histogram;
    SegmentParams segment;
    bool score_at_original_resolution = false;
    int workers = 1;

    void validate() const
    {
        if (preprocess.scale.threshold < 1) throw Error("config: scale.threshold must be >= 1");
        if (!(preprocess.scale.factor > 0.0 && preprocess.scale.factor <= 1.0))
            throw Error("config: scale.factor must lie in (0,1]");
        preprocess.clahe.validate();
        preprocess.frangi.validate();
        preprocess.hair.validate();
        const auto& h = histogram;
        if (!(h.percentile_lo >= 0.0 && h.percentile_lo < h.percentile_hi && h.percentile_hi <= 100.0))
            throw Error("config: histogram percentiles must satisfy 0 <= lo < hi <= 100");
        if (h.bins < 1 || h.bins > 256) throw Error("config: histogram.bins must lie in [1,256]");
        segment.kmeans.validate();
        if (!(segment.min_fraction >= 0.0 && segment.min_fraction <= 1.0))
            throw Error("config: selection.min_fraction must lie in [0,1]");
        segment.flood.validate();
        if (segment.boundary_offset < 1) throw Error("config: flood_fill.boundary_offset must be >= 1");
        if (workers < 1) throw Error("config: workers must be >= 1");
    }
};

inline std::string to_string(FloodReference r)
{
    return r == FloodReference::FixedSeedColor ? "fixed-seed-color" : "moving-local-color";
}

inline FloodReference flood_reference_from_string(const std::string& s)
{
    if (s == "fixed-seed-color") return FloodReference::FixedSeedColor;
    if (s == "moving-local-color") return FloodReference::MovingLocalColor;
    throw Error("config: unknown flood_fill.reference '" + s + "'");
}

/// Full configuration. `workers` is omitted when `include_runtime` is false so
/// that documents describing outputs do not depend on the worker count.
inline nlohmann::json to_json(const PipelineConfig& c, bool include_runtime = true)
{
    const auto& p = c.preprocess;
    const auto& s = c.segment;
    nlohmann::json j = {
        {"scale", {{"threshold", p.scale.threshold}, {"factor", p.scale.factor}}},
        {"clahe",
         {{"enabled", p.clahe_enabled},
          {"clip_limit", p.clahe.clip_limit},
          {"tiles_x", p.clahe.tiles_x},
          {"tiles_y", p.clahe.tiles_y},
          {"bins", p.clahe.bins}}},
        {"frangi",
         {{"sigmas", p.frangi.sigmas},
          {"beta", p.frangi.beta},
          {"c", p.frangi.c ? nlohmann::json(*p.frangi.c) : nlohmann::json(nullptr)},
          {"bright_on_dark", p.frangi.bright_on_dark}}},
        {"hair",
         {{"enabled", p.hair_enabled},
          {"response_threshold", p.hair.response_threshold},
          {"dilation_radius", p.hair.dilation_radius},
          {"inpaint_radius", p.hair.inpaint_radius},
          {"ridge_symmetry", p.hair.ridge_symmetry}}},
        {"histogram",
         {{"percentile_lo", c.histogram.percentile_lo},
          {"percentile_hi", c.histogram.percentile_hi},
          {"bins", c.histogram.bins}}},
        {"kmeans",
         {{"k", s.kmeans.k}, {"max_iters", s.kmeans.max_iters}, {"tol", s.kmeans.tol}, {"seed", s.kmeans.seed}}},
        {"selection",
         {{"min_fraction", s.min_fraction}, {"class", s.class_name}, {"seed_all_selected", s.seed_all_selected}}},
        {"flood_fill",
         {{"tolerance", s.flood.tolerance},
          {"connectivity", static_cast<int>(s.flood.connectivity)},
          {"reference", to_string(s.flood.reference)},
          {"boundary_offset", s.boundary_offset}}},
        {"fill_holes", s.fill_holes},
        {"score_at_original_resolution", c.score_at_original_resolution},
    };
    if (include_runtime) j["workers"] = c.workers;
    return j;
}

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& dst)
{
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace detail

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {})
{
    const nlohmann::json defaults = to_json(PipelineConfig{});
    if (!j.is_object()) throw Error("config: document must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!defaults.contains(key)) throw Error("config: unknown key '" + key + "'");
        if (defaults.at(key).is_object()) {
            if (!value.is_object()) throw Error("config: '" + key + "' must be an object");
            for (const auto& [sub, v] : value.items()) {
                if (!defaults.at(key).contains(sub)) throw Error("config: unknown key '" + key + "." + sub + "'");
            }
        }
    }
    try {
        auto& p = base.preprocess;
        auto& s = base.segment;
        auto section = [&](const char* name) {
            static const nlohmann::json empty = nlohmann::json::object();
            return j.contains(name) ? j.at(name) : empty;
        };
        const auto scale = section("scale");
        detail::read_opt(scale, "threshold", p.scale.threshold);
        detail::read_opt(scale, "factor", p.scale.factor);
        const auto clahe = section("clahe");
        detail::read_opt(clahe, "enabled", p.clahe_enabled);
        detail::read_opt(clahe, "clip_limit", p.clahe.clip_limit);
        detail::read_opt(clahe, "tiles_x", p.clahe.tiles_x);
        detail::read_opt(clahe, "tiles_y", p.clahe.tiles_y);
        detail::read_opt(clahe, "bins", p.clahe.bins);
        const auto frangi = section("frangi");
        detail::read_opt(frangi, "sigmas", p.frangi.sigmas);
        detail::read_opt(frangi, "beta", p.frangi.beta);
        if (frangi.contains("c")) {
            p.frangi.c = frangi.at("c").is_null() ? std::nullopt : std::optional<double>(frangi.at("c").get<double>());
        }
        detail::read_opt(frangi, "bright_on_dark", p.frangi.bright_on_dark);
        const auto hair = section("hair");
        detail::read_opt(hair, "enabled", p.hair_enabled);
        detail::read_opt(hair, "response_threshold", p.hair.response_threshold);
        detail::read_opt(hair, "dilation_radius", p.hair.dilation_radius);
        detail::read_opt(hair, "inpaint_radius", p.hair.inpaint_radius);
        detail::read_opt(hair, "ridge_symmetry", p.hair.ridge_symmetry);
        const auto hist = section("histogram");
        detail::read_opt(hist, "percentile_lo", base.histogram.percentile_lo);
        detail::read_opt(hist, "percentile_hi", base.histogram.percentile_hi);
        detail::read_opt(hist, "bins", base.histogram.bins);
        const auto km = section("kmeans");
        detail::read_opt(km, "k", s.kmeans.k);
        detail::read_opt(km, "max_iters", s.kmeans.max_iters);
        detail::read_opt(km, "tol", s.kmeans.tol);
        detail::read_opt(km, "seed", s.kmeans.seed);
        const auto sel = section("selection");
        detail::read_opt(sel, "min_fraction", s.min_fraction);
        detail::read_opt(sel, "class", s.class_name);
        detail::read_opt(sel, "seed_all_selected", s.seed_all_selected);
        const auto ff = section("flood_fill");
        detail::read_opt(ff, "tolerance", s.flood.tolerance);
        if (ff.contains("connectivity")) s.flood.connectivity = connectivity_from_int(ff.at("connectivity").get<int>());
        if (ff.contains("reference")) s.flood.reference = flood_reference_from_string(ff.at("reference").get<std::string>());
        detail::read_opt(ff, "boundary_offset", s.boundary_offset);
        detail::read_opt(j, "fill_holes", s.fill_holes);
        detail::read_opt(j, "score_at_original_resolution", base.score_at_original_resolution);
        detail::read_opt(j, "workers", base.workers);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    base.validate();
    return base;
}

/// Parses a config document. A run manifest is accepted too: its "config" member is used.
inline PipelineConfig parse_config(std::string_view text, PipelineConfig base = {})
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("config: malformed JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("config") && j.contains("images")) j = j.at("config");
    return config_from_json(j, std::move(base));
}

/// Applies one `dotted.key=value` override. The value is read as JSON when it
/// parses as JSON and as a plain string otherwise.
inline PipelineConfig apply_override(const PipelineConfig& cfg, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw Error("override must look like key=value, got '" + std::string(assignment) + "'");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    nlohmann::json patch = nlohmann::json::object();
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
        patch[key] = value;
    } else {
        patch[key.substr(0, dot)][key.substr(dot + 1)] = value;
    }
    return config_from_json(patch, cfg);
}

}  // namespace dermseg
