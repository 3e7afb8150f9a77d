#include <gtest/gtest.h>

#include "mmfield/io.hpp"
#include "mmfield/report.hpp"
#include "support.hpp"

using namespace mmfield;
using namespace testsupport;

TEST(IO, FieldRoundTrip) {
    Rng rng(81);
    for (int t = 0; t < 20; ++t) {
        auto m = random_mm(rng, 1 + rng.below(6), false, 1 + rng.below(3));
        const std::string text = field_to_json(m).dump();
        auto doc = parse_field(Json::parse(text));
        ASSERT_TRUE(doc.weights.has_value());
        EXPECT_EQ(*doc.weights, m.weights());
        EXPECT_EQ(doc.field.values(), m.field().values());
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j) EXPECT_EQ(doc.field.d(i, j), m.field().d(i, j));
        EXPECT_EQ(field_to_json(doc.mm()).dump(), text);
    }
}

TEST(IO, ExplicitTargetRoundTrip) {
    Rng rng(82);
    auto space = random_explicit_space(rng, 4);
    auto f = random_field_explicit(rng, 5, space);
    auto doc = parse_field(field_to_json(f));
    EXPECT_TRUE(same_space(doc.field.space(), space));
    EXPECT_EQ(doc.field.values(), f.values());
    EXPECT_FALSE(doc.weights.has_value());
    EXPECT_EQ(doc.mm().weights(), std::vector<double>(5, 0.2));
}

TEST(IO, PointsGiveEuclideanDistances) {
    auto doc = parse_field(Json::parse(R"({"n": 3, "metric": {"type": "euclidean", "dim": 1},
        "points": [[0, 0], [3, 4], [0, 1]], "values": [0, 0.5, 1], "labels": ["a", "b", "c"]})"));
    EXPECT_DOUBLE_EQ(doc.field.d(0, 1), 5.0);
    EXPECT_DOUBLE_EQ(doc.field.d(2, 0), 1.0);
    EXPECT_EQ(doc.field.labels()[1], "b");
    ASSERT_TRUE(doc.points.has_value());
    EXPECT_EQ((*doc.points)[1], (std::vector<double>{3, 4}));
}

TEST(IO, LowerTriangleWithOrWithoutDiagonal) {
    auto strict = parse_field(Json::parse(R"({"n": 3, "metric": {"type": "euclidean", "dim": 1},
        "d": [1, 2, 3], "values": [0, 0, 0]})"));
    auto diag = parse_field(Json::parse(R"({"n": 3, "metric": {"type": "euclidean", "dim": 1},
        "d": [0, 1, 0, 2, 3, 0], "values": [0, 0, 0]})"));
    EXPECT_DOUBLE_EQ(strict.field.d(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(strict.field.d(2, 0), 2.0);
    EXPECT_DOUBLE_EQ(strict.field.d(1, 2), 3.0);
    EXPECT_EQ(strict.field.distances().data(), diag.field.distances().data());
}

TEST(IO, ExplicitTargetFromNestedRows) {
    auto doc = parse_field(Json::parse(R"({"n": 2, "metric": {"type": "explicit", "n_b": 2, "matrix": [[0, 1], [1, 0]]},
        "d": [1], "values": [0, 1]})"));
    EXPECT_DOUBLE_EQ(doc.field.value_distance(0, 1), 1.0);
}

TEST(IO, RejectsMalformedDocuments) {
    const char* bad[] = {
        R"([1, 2])",
        R"({"n": 1, "metric": {"type": "euclidean", "dim": 1}, "values": [0], "d": [], "extra": 1})",
        R"({"n": 1, "metric": {"type": "euclidean", "dim": 1}, "d": []})",
        R"({"n": 0, "metric": {"type": "euclidean", "dim": 1}, "values": [], "d": []})",
        R"({"n": 2, "metric": {"type": "euclidean", "dim": 1}, "values": [0, 0], "d": [1, 2]})",
        R"({"n": 2, "metric": {"type": "euclidean", "dim": 1}, "values": [0, 0]})",
        R"({"n": 1, "metric": {"type": "euclidean", "dim": 1, "scale": 2}, "values": [0], "d": []})",
        R"({"n": 1, "metric": {"type": "hyperbolic"}, "values": [0], "d": []})",
        R"({"n": 1, "metric": {"type": "explicit", "n_b": 2, "matrix": [[0, 1], [2, 0]]}, "values": [0], "d": []})",
        R"({"n": 1, "metric": {"type": "explicit", "n_b": 1, "matrix": [0]}, "values": [0.5], "d": []})",
        R"({"n": 1, "metric": {"type": "euclidean", "dim": 2}, "values": [[0]], "d": []})",
        R"({"n": 2, "metric": {"type": "euclidean", "dim": 1}, "values": [0, 0], "d": [1], "weights": [1]})",
        R"({"n": 2, "metric": {"type": "euclidean", "dim": 1}, "values": [0, 0], "points": [[0], [1, 2]]})",
        R"({"n": 1, "metric": {"type": "euclidean", "dim": 1}, "values": ["x"], "d": []})",
    };
    for (const char* text : bad) EXPECT_THROW(parse_field(Json::parse(text)), FormatError) << text;
}

TEST(IO, InfinityIsAString) {
    EXPECT_EQ(number(inf).dump(), "\"inf\"");
    EXPECT_EQ(number(-inf).dump(), "\"-inf\"");
    EXPECT_EQ(number(1.5).dump(), "1.5");
    EXPECT_EQ(read_number(Json("inf"), "x"), inf);
    EXPECT_THROW(read_number(Json("bogus"), "x"), FormatError);
}

TEST(IO, RunLengthRoundTrip) {
    Rng rng(83);
    for (int t = 0; t < 50; ++t) {
        std::vector<bool> bits(rng.below(40));
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = rng.uniform() < 0.3;
        EXPECT_EQ(run_length_decode(run_length(bits)), bits);
    }
    EXPECT_EQ(run_length({true, true, false}).dump(), "[0,2,1]");
    EXPECT_EQ(run_length({}).dump(), "[0]");
}

TEST(Report, ResultsSerialiseWithStatus) {
    auto x = two_point(1.0), y = two_point(2.0);
    Json gh = to_json(gh_distance(x.field(), y.field()));
    EXPECT_EQ(gh["status"], "exact");
    EXPECT_DOUBLE_EQ(gh["value"].get<double>(), 0.5);
    Json gw = to_json(gw_solve(x, y, inf_p));
    EXPECT_EQ(gw["p"], "inf");
    Json v = to_json(validate_field(x));
    EXPECT_EQ(v["valid"], true);
}

TEST(Report, MaskSerialisationDecodes) {
    Rng rng(84);
    auto amb = random_field(rng, 6);
    auto g = make_grid(0.0, 1.0, 0.25);
    auto mask = nbhd_bifiltration({0, 2}, amb, g, g);
    Json j = to_json(mask);
    EXPECT_EQ(run_length_decode(j["membership_rle"]), mask.flatten());
}
