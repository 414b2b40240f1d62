#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "noisent/codec.hpp"
#include "noisent/curation.hpp"
#include "noisent/error.hpp"
#include "noisent/manifest.hpp"
#include "noisent/mask.hpp"
#include "support.hpp"

using namespace noisent;
using testing_support::fixture;
using testing_support::TempDir;

namespace {

void put_png(const TempDir& dir, const std::string& name, int w, int h) {
    write_file(dir / name, encode_png(ImageU8(w, h, 90)));
}

void put_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

TEST(Manifest, EmptyFile) {
    EXPECT_TRUE(parse_manifest("").empty());
    EXPECT_TRUE(parse_manifest("\n  \n").empty());
    EXPECT_TRUE(check_records({}).empty());
}

TEST(Manifest, ParseAndSerializeRoundTrip) {
    const std::string text =
        R"({"path":"a.png","label":"real","category":"art","method":"none","generator":""})" "\n"
        R"({"path":"b.png","label":"generated","category":"portrait","method":"INP","generator":"sd","mask_path":"m.png","extra":1})" "\n";
    const auto records = parse_manifest(text);
    ASSERT_EQ(records.size(), 2U);
    EXPECT_EQ(records[1].method, Method::INP);
    EXPECT_EQ(records[1].mask_path, "m.png");
    EXPECT_EQ(records[1].label_value(), 1);
    std::string again;
    for (const auto& r : records) {
        again += to_json_line(r) + "\n";
    }
    EXPECT_EQ(parse_manifest(again), records);
}

TEST(Manifest, ParseErrorsCarryLineNumbers) {
    const std::string good = R"({"path":"a.png","label":"real","category":"art","method":"none"})";
    try {
        parse_manifest(good + "\n" + good + "\n{broken\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3U);
    }
    EXPECT_THROW(parse_manifest(R"({"path":"a.png","label":"fake","category":"art","method":"none"})"), ParseError);
    EXPECT_THROW(parse_manifest(R"({"label":"real","category":"art","method":"none"})"), ParseError);
    EXPECT_THROW(parse_manifest(R"({"path":"a.png","label":"real","category":"art","method":"XYZ"})"), ParseError);
}

TEST(Manifest, InvariantDiagnostics) {
    std::vector<ManifestRecord> records{
        {"a.png", Label::Generated, Category::Art, Method::INP, "sd", {}, {}},
    };
    auto d = check_records(records);
    ASSERT_EQ(d.size(), 1U);
    EXPECT_EQ(d[0].code, "missing-mask");
    EXPECT_NE(d[0].message.find("missing mask"), std::string::npos);

    records = {{"a.png", Label::Real, Category::Art, Method::T2I, "", {}, {}},
               {"b.png", Label::Real, Category::Art, Method::None, "sd", {}, {}},
               {"c.png", Label::Generated, Category::Art, Method::None, "", {}, {}},
               {"d.png", Label::Generated, Category::Art, Method::REF, "x", {}, {}}};
    d = check_records(records);
    std::vector<std::string> codes;
    for (const auto& x : d) codes.push_back(x.code);
    EXPECT_EQ(codes, (std::vector<std::string>{"real-with-method", "real-with-generator", "generated-without-method",
                                               "missing-source"}));
}

TEST(Manifest, FixtureThreeValidTwoInvalid) {
    TempDir dir("manifest");
    put_png(dir, "real.png", 16, 16);
    put_png(dir, "gen.png", 16, 16);
    put_png(dir, "inp.png", 16, 16);
    write_file(dir / "inp_mask.png", encode_mask_png(BinaryMask(16, 16)));
    put_png(dir, "ref.png", 16, 16);
    write_file(dir / "bad_mask.png", encode_mask_png(BinaryMask(8, 8)));
    const std::string text =
        R"({"path":"real.png","label":"real","category":"landscape","method":"none","generator":""})" "\n"
        R"({"path":"gen.png","label":"generated","category":"art","method":"T2I","generator":"flux"})" "\n"
        R"({"path":"inp.png","label":"generated","category":"portrait","method":"INP","generator":"sd","mask_path":"inp_mask.png"})" "\n"
        R"({"path":"ref.png","label":"generated","category":"news","method":"REF","generator":"sd","source_path":"nowhere.png"})" "\n"
        R"({"path":"gen.png","label":"generated","category":"animal","method":"INP","generator":"sd","mask_path":"bad_mask.png"})" "\n";
    put_text(dir / "manifest.jsonl", text);
    const auto records = load_manifest(dir / "manifest.jsonl");
    const auto diagnostics = validate_manifest(records, dir.path(), 2);
    ASSERT_EQ(diagnostics.size(), 2U);
    EXPECT_EQ(diagnostics[0].index, 3U);
    EXPECT_EQ(diagnostics[0].code, "missing-source-file");
    EXPECT_EQ(diagnostics[1].index, 4U);
    EXPECT_EQ(diagnostics[1].code, "mask-size");
}

TEST(Resolution, BinsAndFixture) {
    EXPECT_EQ(resolution_bin(10'000), 1);
    EXPECT_EQ(resolution_bin(9'999), 0);
    EXPECT_EQ(resolution_bin(1'000'000), 3);
    EXPECT_EQ(resolution_bin(999'999), 2);

    TempDir dir("res");
    std::vector<ManifestRecord> records;
    for (int side : {50, 400, 700, 1200}) {
        const std::string name = std::to_string(side) + ".png";
        put_png(dir, name, side, side);
        records.push_back({name, Label::Real, Category::Art, Method::None, "", {}, {}});
    }
    records.push_back({"gone.png", Label::Real, Category::Art, Method::None, "", {}, {}});
    const auto hist = resolution_histogram(records, dir.path(), 2);
    EXPECT_EQ(hist.fractions, (std::array<double, 4>{0.25, 0.0, 0.5, 0.25}));
    EXPECT_EQ(hist.unreadable.size(), 1U);
    EXPECT_EQ(hist.readable(), 4U);

    const auto single = resolution_histogram({{"1200.png", Label::Real, Category::Art, Method::None, "", {}, {}}},
                                             dir.path());
    EXPECT_EQ(single.counts, (std::array<std::size_t, 4>{0, 0, 0, 1}));
}

TEST(JpegQuality, OwnEncoderRoundTrip) {
    const ImageU8 img = testing_support::random_u8(32, 32, 5);
    for (int q : {100, 95, 90, 85, 75, 50, 20, 5}) {
        EXPECT_EQ(estimate_jpeg_quality(encode_jpeg(img, q)), q);
    }
    EXPECT_EQ(estimate_jpeg_quality(encode_png(img)), std::nullopt);
}

TEST(JpegQuality, ExternalFixture) {
    const auto q = estimate_jpeg_quality(fixture("q85.jpg"));
    ASSERT_TRUE(q.has_value());
    EXPECT_NEAR(*q, 85, 2);
    EXPECT_EQ(estimate_jpeg_quality(fixture("px_1x1.png")), std::nullopt);
    const Bytes corrupt{0xFF, 0xD8, 0xFF, 0xDB, 0x00};
    EXPECT_THROW(estimate_jpeg_quality(corrupt), FormatError);
}

TEST(QualityFilter, SixFileFixture) {
    std::vector<ManifestRecord> records;
    for (const char* name : {"keep_png.png", "keep_q95.jpg", "low_q80.jpg", "small.png", "not_image.png",
                             "truncated.jpg"}) {
        records.push_back({name, Label::Real, Category::Landscape, Method::None, "", {}, {}});
    }
    const auto result = quality_filter(records, fixture("filter"), {}, 2);
    std::vector<std::string> kept;
    for (const auto& r : result.kept) kept.push_back(r.path);
    EXPECT_EQ(kept, (std::vector<std::string>{"keep_png.png", "keep_q95.jpg"}));
    std::map<std::string, std::string> reasons;
    for (const auto& r : result.rejected) reasons[r.record.path] = r.reason;
    EXPECT_EQ(reasons, (std::map<std::string, std::string>{{"low_q80.jpg", "quality"},
                                                           {"small.png", "resolution"},
                                                           {"not_image.png", "unsupported-format"},
                                                           {"truncated.jpg", "unreadable"}}));
    const std::string line = to_json_line(result.rejected.front());
    EXPECT_NE(line.find("\"reason\""), std::string::npos);

    // idempotent on its own output
    EXPECT_EQ(quality_filter(result.kept, fixture("filter")).kept, result.kept);
}

TEST(QualityFilter, LargePngKeptLowQualityJpegRejected) {
    TempDir dir("qf");
    put_png(dir, "big.png", 2000, 2000);
    write_file(dir / "q75.jpg", encode_jpeg(testing_support::random_u8(400, 300, 1), 75));
    const auto result = quality_filter({{"big.png", Label::Real, Category::Art, Method::None, "", {}, {}},
                                        {"q75.jpg", Label::Real, Category::Art, Method::None, "", {}, {}}},
                                       dir.path());
    ASSERT_EQ(result.kept.size(), 1U);
    EXPECT_EQ(result.kept[0].path, "big.png");
    ASSERT_EQ(result.rejected.size(), 1U);
    EXPECT_EQ(result.rejected[0].reason, "quality");
}

TEST(Mask, DiskLatticeCount) {
    // brute-force lattice count of the radius-10 disk
    std::size_t expected = 0;
    for (int y = -10; y <= 10; ++y)
        for (int x = -10; x <= 10; ++x)
            expected += x * x + y * y <= 100 ? 1 : 0;
    ASSERT_EQ(expected, 317U);

    BinaryMask mask(64, 64);
    EXPECT_EQ(stamp_disk(mask, 32, 32, 10), 317U);
    EXPECT_EQ(stamp_disk(mask, 32, 32, 10), 0U);

    BinaryMask stroke_mask(64, 64);
    const BrushStroke zero_length{32.0, 32.0, 10, {}};
    EXPECT_TRUE(paint_stroke(stroke_mask, zero_length, 2, stroke_mask.bits.size()));
    EXPECT_EQ(stroke_mask.count(), 317U);
}

TEST(Mask, NoStrokesGivesEmptyMask) {
    BrushParams p;
    p.stroke_min = p.stroke_max = 0;
    const auto r = gen_brush_mask(128, 128, p);
    EXPECT_EQ(r.mask.count(), 0U);
    EXPECT_EQ(r.strokes, 0);
    EXPECT_FALSE(r.coverage_met);
}

TEST(Mask, SeededCoverageAndDeterminism) {
    BrushParams p;
    std::set<std::vector<std::uint8_t>> distinct;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        p.seed = seed;
        const auto a = gen_brush_mask(256, 320, p);
        const auto b = gen_brush_mask(256, 320, p);
        EXPECT_EQ(a.mask, b.mask);
        EXPECT_TRUE(a.coverage_met) << seed;
        EXPECT_GE(a.mask.coverage(), p.coverage_min);
        EXPECT_LE(a.mask.coverage(), p.coverage_max);
        for (auto v : a.mask.bits) ASSERT_LE(v, 1);
        distinct.insert(a.mask.bits);
    }
    EXPECT_EQ(distinct.size(), 30U);
}

TEST(Mask, Validation) {
    BrushParams p;
    p.coverage_min = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.coverage_max = 1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.radius_min = 50;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    EXPECT_THROW(gen_brush_mask(60, 60, BrushParams{}), std::invalid_argument);
}

TEST(Mask, PngRoundTrip) {
    BrushParams p;
    p.seed = 4;
    const auto r = gen_brush_mask(100, 120, p);
    const Bytes png = encode_mask_png(r.mask);
    const ImageU8 as_image = decode_image(png);
    for (auto v : as_image.samples()) {
        ASSERT_TRUE(v == 0 || v == 255);
    }
    EXPECT_EQ(decode_mask_png(png), r.mask);
    EXPECT_THROW(decode_mask_png(encode_png(testing_support::random_u8(4, 4, 1))), FormatError);
}
