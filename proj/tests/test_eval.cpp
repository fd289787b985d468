#include <gtest/gtest.h>

#include <random>

#include "dermseg/eval.hpp"

using namespace dermseg;

namespace {

BinaryMask from_bits(const char* bits, int w, int h)
{
    BinaryMask m(w, h);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = bits[i] == '1';
    return m;
}

BinaryMask rows(int w, int h, int y0, int y1)
{
    BinaryMask m(w, h, 0);
    for (int y = y0; y < y1; ++y) {
        for (int x = 0; x < w; ++x) m(x, y) = 1;
    }
    return m;
}

BinaryMask column(int w, int h, int x)
{
    BinaryMask m(w, h, 0);
    for (int y = 0; y < h; ++y) m(x, y) = 1;
    return m;
}

}  // namespace

TEST(Confusion, HandCounts)
{
    const BinaryMask all(2, 2, 1), none(2, 2, 0);
    EXPECT_EQ(confusion(all, all), (ConfusionCounts{4, 0, 0, 0}));
    EXPECT_EQ(confusion(none, all), (ConfusionCounts{0, 0, 4, 0}));
    EXPECT_EQ(confusion(from_bits("1100", 4, 1), from_bits("1010", 4, 1)), (ConfusionCounts{1, 1, 1, 1}));
    EXPECT_THROW(confusion(BinaryMask(2, 2), BinaryMask(2, 3)), Error);
}

TEST(Metrics, PerfectPrediction)
{
    const Metrics m = metrics({7, 0, 0, 9});
    for (double v : {m.jaccard, m.dice, m.sensitivity, m.specificity, m.accuracy, m.overall}) EXPECT_EQ(v, 1.0);
}

TEST(Metrics, OneOfEach)
{
    const Metrics m = metrics({1, 1, 1, 1});
    EXPECT_NEAR(m.jaccard, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(m.dice, 0.5, 1e-12);
    EXPECT_NEAR(m.sensitivity, 0.5, 1e-12);
    EXPECT_NEAR(m.specificity, 0.5, 1e-12);
    EXPECT_NEAR(m.accuracy, 0.5, 1e-12);
    EXPECT_NEAR(m.overall, (1.0 / 3.0 + 2.0) / 5.0, 1e-12);
    EXPECT_NEAR(m.overall, 0.46667, 1e-5);
}

TEST(Metrics, DisjointMasks)
{
    const Metrics m = metrics({0, 3, 5, 8});
    EXPECT_EQ(m.jaccard, 0.0);
    EXPECT_EQ(m.dice, 0.0);
    EXPECT_EQ(m.sensitivity, 0.0);
}

TEST(Metrics, EmptyAgainstEmptyIsPerfect)
{
    const Metrics m = metrics({0, 0, 0, 16});
    EXPECT_EQ(m.jaccard, 1.0);
    EXPECT_EQ(m.dice, 1.0);
    EXPECT_EQ(m.sensitivity, 1.0);
    EXPECT_THROW(metrics({0, 0, 0, 0}), Error);
}

TEST(Metrics, DiceJaccardIdentityAndBounds)
{
    std::mt19937_64 rng(99);
    for (int i = 0; i < 1000; ++i) {
        const ConfusionCounts c{rng() % 1000, rng() % 1000, rng() % 1000, 1 + rng() % 1000};
        const Metrics m = metrics(c);
        EXPECT_NEAR(m.dice, 2.0 * m.jaccard / (1.0 + m.jaccard), 1e-12);
        const double vals[] = {m.jaccard, m.dice, m.sensitivity, m.specificity, m.accuracy};
        double lo = 1.0, hi = 0.0;
        for (double v : vals) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        EXPECT_GE(m.overall, lo - 1e-15);
        EXPECT_LE(m.overall, hi + 1e-15);
    }
}

TEST(Metrics, SwapSymmetry)
{
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) {
        BinaryMask a(9, 7), b(9, 7);
        for (std::size_t k = 0; k < a.size(); ++k) {
            a[k] = rng() % 2;
            b[k] = rng() % 2;
        }
        const Metrics ab = metrics(confusion(a, b)), ba = metrics(confusion(b, a));
        EXPECT_DOUBLE_EQ(ab.jaccard, ba.jaccard);
        EXPECT_DOUBLE_EQ(ab.dice, ba.dice);
        EXPECT_DOUBLE_EQ(ab.accuracy, ba.accuracy);
    }
}

TEST(Metrics, InvariantUnderCropContainingForeground)
{
    BinaryMask pred(20, 20, 0), gt(20, 20, 0);
    for (int y = 5; y < 12; ++y) {
        for (int x = 6; x < 13; ++x) pred(x, y) = 1;
    }
    for (int y = 7; y < 14; ++y) {
        for (int x = 4; x < 11; ++x) gt(x, y) = 1;
    }
    BinaryMask pc(12, 12, 0), gc(12, 12, 0);
    for (int y = 0; y < 12; ++y) {
        for (int x = 0; x < 12; ++x) {
            pc(x, y) = pred(x + 3, y + 3);
            gc(x, y) = gt(x + 3, y + 3);
        }
    }
    const Metrics full = metrics(confusion(pred, gt)), crop = metrics(confusion(pc, gc));
    EXPECT_DOUBLE_EQ(full.jaccard, crop.jaccard);
    EXPECT_DOUBLE_EQ(full.dice, crop.dice);
    EXPECT_DOUBLE_EQ(full.sensitivity, crop.sensitivity);
}

TEST(EvaluateDataset, SinglePerfectPair)
{
    const BinaryMask m = rows(4, 4, 1, 3);
    const MetricsReport r = evaluate_dataset({{"a", &m, &m}});
    EXPECT_EQ(r.mean.jaccard, 1.0);
    EXPECT_EQ(r.mean.overall, 1.0);
}

TEST(EvaluateDataset, MeanOfJaccardZeroAndOne)
{
    const BinaryMask a = column(4, 4, 0), b = column(4, 4, 3);
    const MetricsReport r = evaluate_dataset({{"x", &a, &a}, {"y", &a, &b}});
    EXPECT_DOUBLE_EQ(r.mean.jaccard, 0.5);
}

TEST(EvaluateDataset, ThreeHandWorkedPairs)
{
    // A: pred rows 0-1, gt rows 0-2 -> tp 8, fp 0, fn 4, tn 4.
    // B: pred column 0, gt column 3 -> tp 0, fp 4, fn 4, tn 8.
    // C: both empty -> tn 16.
    const BinaryMask pa = rows(4, 4, 0, 2), ga = rows(4, 4, 0, 3);
    const BinaryMask pb = column(4, 4, 0), gb = column(4, 4, 3);
    const BinaryMask empty(4, 4, 0);
    const MetricsReport r = evaluate_dataset({{"a", &pa, &ga}, {"b", &pb, &gb}, {"c", &empty, &empty}});
    EXPECT_EQ(r.per_image[0].counts, (ConfusionCounts{8, 0, 4, 4}));
    EXPECT_EQ(r.per_image[1].counts, (ConfusionCounts{0, 4, 4, 8}));
    EXPECT_NEAR(r.mean.jaccard, (2.0 / 3.0 + 0.0 + 1.0) / 3.0, 1e-12);
    EXPECT_NEAR(r.mean.dice, (0.8 + 0.0 + 1.0) / 3.0, 1e-12);
    EXPECT_NEAR(r.mean.sensitivity, (2.0 / 3.0 + 0.0 + 1.0) / 3.0, 1e-12);
    EXPECT_NEAR(r.mean.specificity, (1.0 + 2.0 / 3.0 + 1.0) / 3.0, 1e-12);
    EXPECT_NEAR(r.mean.accuracy, (0.75 + 0.5 + 1.0) / 3.0, 1e-12);
    EXPECT_NEAR(r.mean.overall, (5.0 / 9.0 + 0.6 + 5.0 / 9.0 + 8.0 / 9.0 + 0.75) / 5.0, 1e-12);
}

TEST(EvaluateDataset, RejectsMismatchAndEmpty)
{
    const BinaryMask a(4, 4), b(4, 5);
    try {
        evaluate_dataset({{"ISIC_0000042", &a, &b}});
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("ISIC_0000042"), std::string::npos);
    }
    EXPECT_THROW(evaluate_dataset({}), Error);
}

TEST(Report, CsvAndSummary)
{
    const BinaryMask m = rows(4, 4, 0, 2), g = rows(4, 4, 0, 3);
    const MetricsReport r = evaluate_dataset({{"img1", &m, &g}});
    const std::string csv = metrics_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "image_id,jaccard,dice,sensitivity,specificity,accuracy");
    EXPECT_NE(csv.find("img1,0.6666666667,0.8,"), std::string::npos);
    const auto j = metrics_summary(r, "processing");
    EXPECT_EQ(j.at("images"), 1);
    EXPECT_EQ(j.at("resolution"), "processing");
    EXPECT_DOUBLE_EQ(j.at("overall").get<double>(), r.mean.overall);
}
