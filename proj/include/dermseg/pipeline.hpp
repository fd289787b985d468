#pragma once

// Batch commands: train, segment, evaluate and the composed pipeline.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dermseg/colormodel.hpp"
#include "dermseg/config.hpp"
#include "dermseg/dataset.hpp"
#include "dermseg/eval.hpp"
#include "dermseg/io.hpp"
#include "dermseg/preprocess.hpp"
#include "dermseg/segment.hpp"

namespace dermseg {

inline constexpr int kManifestVersion = 1;

/// Runs `task(i)` for i in [0,n) on up to `workers` threads. Tasks must not throw.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task)
{
    const std::size_t nthreads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) task(i);
        });
    }
}

/// Worker count from DERMSEG_WORKERS when set, otherwise the configured value.
inline int effective_workers(const PipelineConfig& cfg)
{
    if (const char* env = std::getenv("DERMSEG_WORKERS"); env && *env) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (...) {
        }
        throw Error(std::string("DERMSEG_WORKERS must be a positive integer, got '") + env + "'");
    }
    return cfg.workers;
}

struct ImageFailure {
    std::string image_id;
    std::string message;
};

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainReport {
    LesionColorModel model;
    std::map<std::string, std::uint64_t> class_pixels;
    std::size_t images_used = 0;
    std::vector<ImageFailure> failures;
};

/// Preprocessed image and its mask brought to processing resolution. Inpainted
/// hair pixels are dropped from the mask: their colors were synthesized, not observed.
inline std::pair<RgbImage, BinaryMask> load_training_pair(const DatasetEntry& e, const PipelineConfig& cfg)
{
    const RgbImage raw = io::read_rgb(e.image_path);
    BinaryMask mask = io::read_mask(*e.mask_path);
    require_same_shape(raw, mask, ("image/mask pair " + e.image_id).c_str());
    PreprocessResult pre = preprocess(raw, cfg.preprocess);
    mask = maybe_downscale_mask(mask, cfg.preprocess.scale);
    if (!pre.hair.empty()) {
        for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] && !pre.hair[i];
    }
    return {std::move(pre.image), std::move(mask)};
}

inline TrainReport train_model(const PipelineConfig& cfg, const DatasetIndex& data)
{
    cfg.validate();
    std::vector<const DatasetEntry*> masked;
    for (const auto& e : data.entries) {
        if (e.mask_path) masked.push_back(&e);
    }
    if (masked.empty()) throw Error("train: no dataset entry has a ground-truth mask");

    struct Slot {
        std::string class_name;
        std::optional<ColorHistogram> hist;
        std::string error;
    };
    std::vector<Slot> slots(masked.size());
    parallel_for(masked.size(), effective_workers(cfg), [&](std::size_t i) {
        const DatasetEntry& e = *masked[i];
        Slot& s = slots[i];
        s.class_name = e.class_name.empty() ? kUnlabeledClass : e.class_name;
        try {
            const auto [img, mask] = load_training_pair(e, cfg);
            s.hist = accumulate(img, mask, ColorHistogram(cfg.histogram.bins));
        } catch (const std::exception& ex) {
            s.error = ex.what();
        }
    });

    TrainReport report;
    std::map<std::string, ColorHistogram> hists;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].hist) {
            report.failures.push_back({masked[i]->image_id, slots[i].error});
            continue;
        }
        ++report.images_used;
        hists.try_emplace(slots[i].class_name, cfg.histogram.bins).first->second += *slots[i].hist;
    }
    if (report.images_used == 0) throw Error("train: every training image failed to load");
    for (const auto& [name, h] : hists) report.class_pixels[name] = h.total;
    report.model = model_from_histograms(hists, cfg.histogram.percentile_lo, cfg.histogram.percentile_hi);
    return report;
}

inline TrainReport cmd_train(const PipelineConfig& cfg, const DatasetIndex& data, const fs::path& model_out,
                             std::ostream& log)
{
    TrainReport report = train_model(cfg, data);
    if (model_out.has_parent_path()) fs::create_directories(model_out.parent_path());
    io::write_file(model_out, save_model(report.model));
    log << "trained on " << report.images_used << " image(s)\n";
    for (const auto& [name, n] : report.class_pixels) log << "  class " << name << ": " << n << " lesion pixels\n";
    for (const auto& f : report.failures) log << "  FAILED " << f.image_id << ": " << f.message << "\n";
    log << "model written to " << model_out.string() << "\n";
    return report;
}

// ---------------------------------------------------------------------------
// segment
// ---------------------------------------------------------------------------

struct ImageOutcome {
    std::string image_id;
    bool ok = false;
    std::string error;
    int width = 0, height = 0;
    int processed_width = 0, processed_height = 0;
    bool downscaled = false;
    std::size_t hair_pixels = 0;
    std::size_t lesion_pixels = 0;
    SegmentationResult seg;  // mask dropped after writing
};

struct SegmentRunReport {
    std::vector<ImageOutcome> images;
    std::size_t failures = 0;
    nlohmann::json manifest;
};

/// Image with the mask boundary (foreground pixels touching background) drawn in green.
inline RgbImage draw_overlay(const RgbImage& img, const BinaryMask& mask)
{
    require_same_shape(img, mask, "overlay");
    RgbImage out = img;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (is_boundary_pixel(mask, x, y)) out(x, y) = {0, 255, 0};
        }
    }
    return out;
}

inline nlohmann::json outcome_to_json(const ImageOutcome& o)
{
    nlohmann::json j = {{"image_id", o.image_id}, {"status", o.ok ? "ok" : "failed"}};
    if (!o.ok) {
        j["error"] = o.error;
        return j;
    }
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& s : o.seg.seeds) {
        seeds.push_back({{"cluster", s.source_cluster},
                         {"centroid", {s.centroid_seed.x, s.centroid_seed.y}},
                         {"boundary", {s.boundary_seed.x, s.boundary_seed.y}}});
    }
    j["width"] = o.width;
    j["height"] = o.height;
    j["processed_width"] = o.processed_width;
    j["processed_height"] = o.processed_height;
    j["downscaled"] = o.downscaled;
    j["hair_pixels"] = o.hair_pixels;
    j["lesion_pixels"] = o.lesion_pixels;
    j["selected_clusters"] = o.seg.selected_clusters;
    j["seeds"] = seeds;
    j["no_cluster_selected"] = o.seg.no_cluster_selected;
    j["fallback_used"] = o.seg.fallback_used;
    j["notes"] = o.seg.notes;
    return j;
}

inline ImageOutcome segment_one(const DatasetEntry& e, const PipelineConfig& cfg, const LesionColorModel& model,
                                const fs::path& out_dir)
{
    ImageOutcome o;
    o.image_id = e.image_id;
    try {
        const RgbImage raw = io::read_rgb(e.image_path);
        o.width = raw.width();
        o.height = raw.height();
        const PreprocessResult pre = preprocess(raw, cfg.preprocess);
        o.downscaled = pre.downscaled;
        o.processed_width = pre.image.width();
        o.processed_height = pre.image.height();
        o.hair_pixels = pre.hair.empty() ? 0 : count_true(pre.hair);
        o.seg = segment_image(pre.image, model, cfg.segment);
        o.lesion_pixels = count_true(o.seg.mask);
        io::write_rgb_png(out_dir / (e.image_id + kOverlaySuffix), draw_overlay(pre.scaled, o.seg.mask));
        const BinaryMask& m = o.seg.mask;
        const bool upscale = cfg.score_at_original_resolution && !m.same_shape(raw);
        io::write_mask(out_dir / (e.image_id + kPredSuffix), upscale ? resize_nearest(m, raw.width(), raw.height()) : m);
        o.seg.mask = BinaryMask{};
        for (auto& r : o.seg.regions) r.mask = BinaryMask{};
        o.ok = true;
    } catch (const std::exception& ex) {
        o.ok = false;
        o.error = ex.what();
    }
    return o;
}

inline SegmentRunReport segment_dataset(const PipelineConfig& cfg, const DatasetIndex& data,
                                        const LesionColorModel& model, const fs::path& out_dir)
{
    cfg.validate();
    fs::create_directories(out_dir);
    SegmentRunReport report;
    report.images.resize(data.entries.size());
    parallel_for(data.entries.size(), effective_workers(cfg), [&](std::size_t i) {
        report.images[i] = segment_one(data.entries[i], cfg, model, out_dir);
    });

    nlohmann::json images = nlohmann::json::array();
    for (const auto& o : report.images) {
        report.failures += !o.ok;
        images.push_back(outcome_to_json(o));
    }
    report.manifest = {{"manifest_version", kManifestVersion},
                       {"config", to_json(cfg, false)},
                       {"model", nlohmann::json::parse(save_model(model))},
                       {"images", images},
                       {"failures", report.failures}};
    io::write_file(out_dir / "manifest.json", report.manifest.dump(2) + "\n");
    return report;
}

inline SegmentRunReport cmd_segment(const PipelineConfig& cfg, const DatasetIndex& data,
                                    const LesionColorModel& model, const fs::path& out_dir, std::ostream& log)
{
    SegmentRunReport report = segment_dataset(cfg, data, model, out_dir);
    for (const auto& o : report.images) {
        if (!o.ok) {
            log << "  FAILED " << o.image_id << ": " << o.error << "\n";
        } else if (o.seg.no_cluster_selected) {
            log << "  " << o.image_id << ": no lesion-colored cluster, empty mask\n";
        }
    }
    log << "segmented " << report.images.size() - report.failures << "/" << report.images.size()
        << " image(s) into " << out_dir.string() << "\n";
    return report;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvalItem {
    std::string image_id;
    fs::path pred_path;
    fs::path gt_path;
};

struct EvalRunReport {
    MetricsReport metrics;
    std::string resolution;  // "processing" when ground truth was downscaled to match
};

/// Scores predictions against ground truth. A ground-truth mask larger than its
/// prediction is brought down with the same downscale rule used for images.
inline EvalRunReport evaluate_items(const std::vector<EvalItem>& items, const ScaleRule& rule,
                                    const fs::path& out_dir)
{
    if (items.empty()) throw Error("evaluate: nothing to evaluate");
    std::vector<BinaryMask> preds, gts;
    preds.reserve(items.size());
    gts.reserve(items.size());
    bool any_downscaled = false;
    for (const auto& it : items) {
        BinaryMask pred = io::read_mask(it.pred_path);
        BinaryMask gt = io::read_mask(it.gt_path);
        if (!pred.same_shape(gt)) {
            BinaryMask reduced = maybe_downscale_mask(gt, rule);
            if (!pred.same_shape(reduced)) {
                throw Error("evaluate: dimension mismatch for image " + it.image_id + " (pred " +
                            std::to_string(pred.width()) + "x" + std::to_string(pred.height()) + ", gt " +
                            std::to_string(gt.width()) + "x" + std::to_string(gt.height()) + ")");
            }
            gt = std::move(reduced);
            any_downscaled = true;
        }
        preds.push_back(std::move(pred));
        gts.push_back(std::move(gt));
    }
    std::vector<MaskPair> pairs;
    for (std::size_t i = 0; i < items.size(); ++i) pairs.push_back({items[i].image_id, &preds[i], &gts[i]});
    EvalRunReport r{evaluate_dataset(pairs), any_downscaled ? "processing" : "original"};

    fs::create_directories(out_dir);
    io::write_file(out_dir / "metrics.csv", metrics_csv(r.metrics));
    io::write_file(out_dir / "metrics.json", metrics_summary(r.metrics, r.resolution).dump(2) + "\n");
    return r;
}

inline void print_metrics(const EvalRunReport& r, std::ostream& log)
{
    const auto& m = r.metrics.mean;
    log << "images: " << r.metrics.per_image.size() << " (scored at " << r.resolution << " resolution)\n"
        << "jaccard:     " << m.jaccard << "\n"
        << "dice:        " << m.dice << "\n"
        << "sensitivity: " << m.sensitivity << "\n"
        << "specificity: " << m.specificity << "\n"
        << "accuracy:    " << m.accuracy << "\n"
        << "overall:     " << m.overall << "\n";
}

namespace detail {

inline std::map<std::string, fs::path> files_with_suffix(const fs::path& dir, const std::string& suffix)
{
    if (!fs::is_directory(dir)) throw Error("directory not found: " + dir.string());
    std::map<std::string, fs::path> out;
    for (const auto& p : sorted_listing(dir)) {
        const std::string name = p.filename().string();
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
            out.emplace(name.substr(0, name.size() - suffix.size()), p);
        }
    }
    return out;
}

}  // namespace detail

/// Pairs `<id>_pred.png` in `pred_dir` with `<id>_segmentation.png` in `gt_dir`.
/// Any file without a partner fails the run.
inline EvalRunReport cmd_evaluate(const fs::path& pred_dir, const fs::path& gt_dir, const fs::path& out_dir,
                                  std::ostream& log, const ScaleRule& rule = {})
{
    const auto preds = detail::files_with_suffix(pred_dir, kPredSuffix);
    const auto gts = detail::files_with_suffix(gt_dir, kMaskSuffix);
    std::vector<std::string> unmatched;
    std::vector<EvalItem> items;
    for (const auto& [id, p] : preds) {
        auto it = gts.find(id);
        if (it == gts.end()) {
            unmatched.push_back(p.filename().string() + " (no ground truth)");
        } else {
            items.push_back({id, p, it->second});
        }
    }
    for (const auto& [id, g] : gts) {
        if (!preds.contains(id)) unmatched.push_back(g.filename().string() + " (no prediction)");
    }
    if (!unmatched.empty()) {
        std::string msg = "evaluate: unmatched files:";
        for (const auto& u : unmatched) msg += "\n  " + u;
        throw Error(msg);
    }
    EvalRunReport r = evaluate_items(items, rule, out_dir);
    print_metrics(r, log);
    return r;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

struct PipelineReport {
    TrainReport train;
    SegmentRunReport segment;
    std::optional<EvalRunReport> eval;
    [[nodiscard]] std::size_t failures() const { return train.failures.size() + segment.failures; }
};

/// Writes <out>/model.json, <out>/masks/ and <out>/metrics/.
inline PipelineReport cmd_pipeline(const PipelineConfig& cfg, const fs::path& train_dir, const fs::path& eval_dir,
                                   const fs::path& out_dir, std::ostream& log)
{
    PipelineReport report;
    const DatasetIndex train_set = index_dataset(train_dir);
    const DatasetIndex eval_set = index_dataset(eval_dir);
    fs::create_directories(out_dir);
    log << "[train] " << train_set.entries.size() << " image(s) from " << train_dir.string() << "\n";
    report.train = cmd_train(cfg, train_set, out_dir / "model.json", log);
    log << "[segment] " << eval_set.entries.size() << " image(s) from " << eval_dir.string() << "\n";
    report.segment = cmd_segment(cfg, eval_set, report.train.model, out_dir / "masks", log);

    std::vector<EvalItem> items;
    for (std::size_t i = 0; i < eval_set.entries.size(); ++i) {
        const auto& e = eval_set.entries[i];
        if (!e.mask_path || !report.segment.images[i].ok) continue;
        items.push_back({e.image_id, out_dir / "masks" / (e.image_id + kPredSuffix), *e.mask_path});
    }
    if (items.empty()) {
        log << "[evaluate] skipped: no segmented image has ground truth\n";
        return report;
    }
    log << "[evaluate] " << items.size() << " image(s)\n";
    report.eval = evaluate_items(items, cfg.preprocess.scale, out_dir / "metrics");
    print_metrics(*report.eval, log);
    return report;
}

}  // namespace dermseg
