#pragma once

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dermseg/image.hpp"

namespace dermseg {

struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    [[nodiscard]] std::uint64_t total() const { return tp + fp + fn + tn; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Metrics {
    double jaccard = 0.0;
    double dice = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double accuracy = 0.0;
    double overall = 0.0;
};

struct ImageMetrics {
    std::string image_id;
    ConfusionCounts counts;
    Metrics metrics;
};

struct MetricsReport {
    std::vector<ImageMetrics> per_image;
    Metrics mean;  // unweighted means over images; overall = mean of the five means
};

inline ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt)
{
    require_same_shape(pred, gt, "confusion");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != 0, g = gt[i] != 0;
        if (p && g) ++c.tp;
        else if (p) ++c.fp;
        else if (g) ++c.fn;
        else ++c.tn;
    }
    return c;
}

/// A ratio whose denominator is zero has nothing to get wrong and scores 1.
inline double safe_ratio(double num, double den) { return den == 0.0 ? 1.0 : num / den; }

inline Metrics metrics(const ConfusionCounts& c)
{
    if (c.total() == 0) throw Error("metrics: confusion counts are empty");
    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
    Metrics m;
    m.jaccard = safe_ratio(tp, tp + fp + fn);
    m.dice = safe_ratio(2.0 * tp, 2.0 * tp + fp + fn);
    m.sensitivity = safe_ratio(tp, tp + fn);
    m.specificity = safe_ratio(tn, tn + fp);
    m.accuracy = (tp + tn) / static_cast<double>(c.total());
    m.overall = (m.jaccard + m.dice + m.sensitivity + m.specificity + m.accuracy) / 5.0;
    return m;
}

struct MaskPair {
    std::string image_id;
    const BinaryMask* pred = nullptr;
    const BinaryMask* gt = nullptr;
};

inline MetricsReport evaluate_dataset(const std::vector<MaskPair>& pairs)
{
    if (pairs.empty()) throw Error("evaluate_dataset: no mask pairs");
    MetricsReport report;
    Metrics& sum = report.mean;
    for (const auto& p : pairs) {
        if (!p.pred->same_shape(*p.gt)) {
            throw Error("evaluate_dataset: dimension mismatch for image " + p.image_id);
        }
        ImageMetrics im{p.image_id, confusion(*p.pred, *p.gt), {}};
        im.metrics = metrics(im.counts);
        sum.jaccard += im.metrics.jaccard;
        sum.dice += im.metrics.dice;
        sum.sensitivity += im.metrics.sensitivity;
        sum.specificity += im.metrics.specificity;
        sum.accuracy += im.metrics.accuracy;
        report.per_image.push_back(std::move(im));
    }
    const double n = static_cast<double>(pairs.size());
    sum.jaccard /= n;
    sum.dice /= n;
    sum.sensitivity /= n;
    sum.specificity /= n;
    sum.accuracy /= n;
    sum.overall = (sum.jaccard + sum.dice + sum.sensitivity + sum.specificity + sum.accuracy) / 5.0;
    return report;
}

inline std::string metrics_csv(const MetricsReport& report)
{
    std::ostringstream os;
    os << "image_id,jaccard,dice,sensitivity,specificity,accuracy\n";
    os << std::setprecision(10);
    for (const auto& im : report.per_image) {
        const auto& m = im.metrics;
        os << im.image_id << ',' << m.jaccard << ',' << m.dice << ',' << m.sensitivity << ','
           << m.specificity << ',' << m.accuracy << '\n';
    }
    return os.str();
}

inline nlohmann::json metrics_summary(const MetricsReport& report, const std::string& resolution)
{
    const auto& m = report.mean;
    return {{"images", report.per_image.size()},
            {"resolution", resolution},
            {"means",
             {{"jaccard", m.jaccard},
              {"dice", m.dice},
              {"sensitivity", m.sensitivity},
              {"specificity", m.specificity},
              {"accuracy", m.accuracy}}},
            {"overall", m.overall}};
}

}  // namespace dermseg
