#include <gtest/gtest.h>

#include <random>

#include "dermseg/colormodel.hpp"

using namespace dermseg;

namespace {

RgbImage random_image(int w, int h, std::mt19937_64& rng)
{
    RgbImage img(w, h);
    for (auto& p : img.data()) p = {std::uint8_t(rng()), std::uint8_t(rng()), std::uint8_t(rng())};
    return img;
}

BinaryMask random_mask(int w, int h, std::mt19937_64& rng)
{
    BinaryMask m(w, h);
    for (auto& v : m.data()) v = rng() % 3 == 0;
    return m;
}

ColorHistogram single_channel_hist(std::initializer_list<std::pair<int, std::uint64_t>> bins)
{
    ColorHistogram h;
    for (auto [b, n] : bins) {
        for (int c = 0; c < 3; ++c) h.counts[c][static_cast<std::size_t>(b)] += n;
        h.total += n;
    }
    return h;
}

}  // namespace

TEST(Accumulate, EmptyMaskLeavesHistogramUnchanged)
{
    std::mt19937_64 rng(1);
    const RgbImage img = random_image(6, 5, rng);
    ColorHistogram h = accumulate(img, BinaryMask(6, 5, 1), ColorHistogram{});
    EXPECT_EQ(accumulate(img, BinaryMask(6, 5, 0), h), h);
}

TEST(Accumulate, CountsRepeatedPixel)
{
    const RgbImage img(2, 1, Rgb{10, 20, 30});
    const ColorHistogram h = accumulate(img, BinaryMask(2, 1, 1), ColorHistogram{});
    EXPECT_EQ(h.total, 2u);
    EXPECT_EQ(h.counts[0][10], 2u);
    EXPECT_EQ(h.counts[1][20], 2u);
    EXPECT_EQ(h.counts[2][30], 2u);
}

TEST(Accumulate, OnlyMaskedPixelsCount)
{
    RgbImage img(3, 1);
    img[0] = {1, 2, 3};
    img[1] = {4, 5, 6};
    img[2] = {7, 8, 9};
    BinaryMask m(3, 1, 1);
    m[1] = 0;
    const ColorHistogram h = accumulate(img, m, ColorHistogram{});
    EXPECT_EQ(h.total, 2u);
    for (int c = 0; c < 3; ++c) {
        int nonzero = 0;
        for (auto n : h.counts[c]) nonzero += n != 0;
        EXPECT_EQ(nonzero, 2);
        EXPECT_EQ(h.counts[c][static_cast<std::size_t>(1 + c)], 1u);
        EXPECT_EQ(h.counts[c][static_cast<std::size_t>(7 + c)], 1u);
    }
}

TEST(Accumulate, RejectsShapeMismatch)
{
    EXPECT_THROW(accumulate(RgbImage(3, 3), BinaryMask(3, 2), ColorHistogram{}), Error);
}

TEST(Accumulate, OrderIndependent)
{
    std::mt19937_64 rng(5);
    std::vector<RgbImage> imgs;
    std::vector<BinaryMask> masks;
    for (int i = 0; i < 5; ++i) {
        imgs.push_back(random_image(7, 6, rng));
        masks.push_back(random_mask(7, 6, rng));
    }
    ColorHistogram fwd, rev;
    for (int i = 0; i < 5; ++i) fwd = accumulate(imgs[i], masks[i], fwd);
    for (int i = 4; i >= 0; --i) rev = accumulate(imgs[i], masks[i], rev);
    EXPECT_EQ(fwd, rev);
}

TEST(DeriveRange, DegenerateDistribution)
{
    const ColorHistogram h = single_channel_hist({{57, 13}});
    for (auto [lo, hi] : {std::pair{0.0, 100.0}, {1.0, 99.0}, {50.0, 51.0}, {99.0, 100.0}}) {
        const ColorRange r = derive_range(h, lo, hi);
        for (int c = 0; c < 3; ++c) {
            EXPECT_EQ(r.lo[c], 57);
            EXPECT_EQ(r.hi[c], 57);
        }
    }
}

TEST(DeriveRange, UniformHundredBins)
{
    ColorHistogram h;
    for (int b = 0; b < 100; ++b) {
        for (int c = 0; c < 3; ++c) h.counts[c][static_cast<std::size_t>(b)] = 1;
    }
    h.total = 100;
    const ColorRange r = derive_range(h, 1.0, 99.0);
    EXPECT_EQ(r.lo, (Rgb{0, 0, 0}));
    EXPECT_EQ(r.hi, (Rgb{98, 98, 98}));
}

TEST(DeriveRange, TwoPoint)
{
    const ColorRange r = derive_range(single_channel_hist({{10, 50}, {200, 50}}), 1.0, 99.0);
    EXPECT_EQ(r.lo, (Rgb{10, 10, 10}));
    EXPECT_EQ(r.hi, (Rgb{200, 200, 200}));
}

TEST(DeriveRange, RejectsBadInput)
{
    const ColorHistogram h = single_channel_hist({{3, 1}});
    EXPECT_THROW(derive_range(h, 50.0, 50.0), Error);
    EXPECT_THROW(derive_range(h, -1.0, 50.0), Error);
    EXPECT_THROW(derive_range(h, 1.0, 101.0), Error);
    EXPECT_THROW(derive_range(ColorHistogram{}, 1.0, 99.0), Error);
}

TEST(DeriveRange, WideningPercentilesNeverShrinks)
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const ColorHistogram h = accumulate(random_image(12, 12, rng), random_mask(12, 12, rng), ColorHistogram{});
        const ColorRange narrow = derive_range(h, 10.0, 90.0);
        const ColorRange wide = derive_range(h, 2.0, 98.0);
        EXPECT_TRUE(wide.contains(narrow));
        EXPECT_TRUE(derive_range(h, 0.0, 100.0).contains(wide));
    }
}

TEST(Train, SingleColorClass)
{
    const RgbImage img(4, 4, Rgb{91, 45, 200});
    const BinaryMask m(4, 4, 1);
    const TrainingSample s[] = {{&img, &m, "nevus"}};
    const LesionColorModel model = train(s);
    const ColorRange expect{Rgb{91, 45, 200}, Rgb{91, 45, 200}};
    EXPECT_EQ(model.range_for("nevus"), expect);
    EXPECT_EQ(model.combined, expect);
    EXPECT_EQ(model.range_for(""), expect);
    EXPECT_THROW((void)model.range_for("melanoma"), Error);
}

TEST(Train, CombinedIsEnvelope)
{
    const RgbImage a(3, 3, Rgb{10, 10, 10});
    const RgbImage b(3, 3, Rgb{200, 200, 200});
    const BinaryMask m(3, 3, 1);
    const TrainingSample s[] = {{&a, &m, "melanoma"}, {&b, &m, "nevus"}};
    const LesionColorModel model = train(s);
    EXPECT_EQ(model.combined.lo, (Rgb{10, 10, 10}));
    EXPECT_EQ(model.combined.hi, (Rgb{200, 200, 200}));
}

TEST(Train, ThreeClassesGiveThreeEntries)
{
    std::mt19937_64 rng(2);
    std::vector<RgbImage> imgs;
    std::vector<BinaryMask> masks;
    for (int i = 0; i < 6; ++i) {
        imgs.push_back(random_image(8, 8, rng));
        masks.push_back(BinaryMask(8, 8, 1));
    }
    const char* names[] = {"melanoma", "nevus", "seborrheic_keratosis"};
    std::vector<TrainingSample> s;
    for (int i = 0; i < 6; ++i) s.push_back({&imgs[i], &masks[i], names[i % 3]});
    const LesionColorModel model = train(s);
    EXPECT_EQ(model.per_class.size(), 3u);
    for (const auto& [name, r] : model.per_class) EXPECT_TRUE(model.combined.contains(r)) << name;
}

TEST(Train, FailsWithoutLesionPixels)
{
    const RgbImage img(3, 3);
    const BinaryMask m(3, 3, 0);
    const TrainingSample s[] = {{&img, &m, ""}};
    EXPECT_THROW(train(s), Error);
    EXPECT_THROW(train(std::span<const TrainingSample>{}), Error);
}

TEST(Train, HalfMasksAddUp)
{
    std::mt19937_64 rng(4);
    std::vector<RgbImage> imgs;
    std::vector<BinaryMask> masks, left, right;
    for (int i = 0; i < 4; ++i) {
        imgs.push_back(random_image(10, 9, rng));
        masks.push_back(random_mask(10, 9, rng));
        BinaryMask l = masks.back(), r = masks.back();
        for (int y = 0; y < 9; ++y) {
            for (int x = 0; x < 10; ++x) (x < 5 ? r : l)(x, y) = 0;
        }
        left.push_back(l);
        right.push_back(r);
    }
    std::vector<TrainingSample> whole, halves;
    for (int i = 0; i < 4; ++i) {
        whole.push_back({&imgs[i], &masks[i], "nevus"});
        halves.push_back({&imgs[i], &left[i], "nevus"});
        halves.push_back({&imgs[i], &right[i], "nevus"});
    }
    EXPECT_EQ(class_histograms(whole), class_histograms(halves));
    EXPECT_EQ(train(whole), train(halves));
}

TEST(PixelInRange, InclusiveBounds)
{
    const ColorRange r{Rgb{90, 90, 90}, Rgb{110, 110, 110}};
    EXPECT_TRUE(pixel_in_range(Rgb{90, 90, 90}, r));
    EXPECT_TRUE(pixel_in_range(Rgb{110, 110, 110}, r));
    EXPECT_TRUE(pixel_in_range(Rgb{100, 100, 100}, r));
    EXPECT_FALSE(pixel_in_range(Rgb{100, 111, 100}, r));
    EXPECT_FALSE(pixel_in_range(Rgb{89, 100, 100}, r));
}

TEST(PixelInRange, PointRangeContainsItsPoint)
{
    for (int v = 0; v < 256; v += 3) {
        const Rgb p{std::uint8_t(v), std::uint8_t(255 - v), std::uint8_t(v / 2)};
        EXPECT_TRUE(pixel_in_range(p, ColorRange{p, p}));
    }
}

TEST(FractionInRange, Counting)
{
    RgbImage img(4, 1, Rgb{100, 100, 100});
    img[3] = {200, 0, 0};
    const ColorRange r{Rgb{90, 90, 90}, Rgb{110, 110, 110}};
    const std::vector<std::size_t> all{0, 1, 2, 3};
    const std::vector<std::size_t> first3{0, 1, 2};
    EXPECT_DOUBLE_EQ(fraction_in_range(img, all, r), 0.75);
    EXPECT_DOUBLE_EQ(fraction_in_range(img, first3, r), 1.0);
    EXPECT_EQ(fraction_in_range(img, std::span<const std::size_t>{}, r), 0.0);
}

TEST(ModelFile, RoundTrip)
{
    std::mt19937_64 rng(8);
    std::vector<RgbImage> imgs;
    std::vector<BinaryMask> masks;
    for (int i = 0; i < 3; ++i) {
        imgs.push_back(random_image(9, 9, rng));
        masks.push_back(random_mask(9, 9, rng));
    }
    const TrainingSample s[] = {{&imgs[0], &masks[0], "a"}, {&imgs[1], &masks[1], "b"}, {&imgs[2], &masks[2], "c"}};
    const LesionColorModel m = train(s, 2.5, 97.5);
    const std::string text = save_model(m);
    EXPECT_EQ(load_model(text), m);
    EXPECT_EQ(save_model(load_model(text)), text);
}

TEST(ModelFile, RejectsTruncatedAndInvalid)
{
    const RgbImage img(2, 2, Rgb{5, 6, 7});
    const BinaryMask mask(2, 2, 1);
    const TrainingSample s[] = {{&img, &mask, "x"}};
    const std::string text = save_model(train(s));
    EXPECT_THROW(load_model(text.substr(0, text.size() / 2)), Error);
    EXPECT_THROW(load_model(""), Error);
    EXPECT_THROW(load_model("[]"), Error);
    EXPECT_THROW(load_model(R"({"version": 2, "bins": 256, "percentile_lo": 1, "percentile_hi": 99,
                                "combined": {"lo": [0,0,0], "hi": [255,255,255]}})"),
                 Error);
    EXPECT_THROW(load_model(R"({"version": 1, "bins": 256, "percentile_lo": 1, "percentile_hi": 99,
                                "combined": {"lo": [0,0,300], "hi": [255,255,255]}})"),
                 Error);
    EXPECT_THROW(load_model(R"({"version": 1, "bins": 256, "percentile_lo": 1, "percentile_hi": 99,
                                "combined": {"lo": [9,0,0], "hi": [8,255,255]}})"),
                 Error);
    EXPECT_THROW(load_model(R"({"version": 1, "bins": 256, "percentile_lo": 1, "percentile_hi": 99,
                                "combined": {"lo": [10,10,10], "hi": [20,20,20]},
                                "per_class": {"m": {"lo": [0,10,10], "hi": [20,20,20]}}})"),
                 Error);
}

TEST(ModelFile, MinimalFullRangeAcceptsEverything)
{
    const LesionColorModel m = load_model(R"({"version": 1, "bins": 256, "percentile_lo": 1, "percentile_hi": 99,
                                              "combined": {"lo": [0,0,0], "hi": [255,255,255]}})");
    EXPECT_TRUE(m.per_class.empty());
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_TRUE(pixel_in_range(Rgb{std::uint8_t(rng()), std::uint8_t(rng()), std::uint8_t(rng())}, m.combined));
    }
}
