#include <gtest/gtest.h>

#include "support.hpp"

using namespace mmfield;
using namespace testsupport;

TEST(TargetSpace, EuclideanDistance) {
    auto b = TargetSpace::euclidean(2);
    EXPECT_DOUBLE_EQ(b->distance(BPoint{0.0, 0.0}, BPoint{3.0, 4.0}), 5.0);
    EXPECT_THROW(b->distance(BPoint{0.0}, BPoint{1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(TargetSpace::euclidean(0), std::invalid_argument);
}

TEST(TargetSpace, ExplicitMetricIsChecked) {
    auto b = TargetSpace::explicit_metric(DenseMatrix::from_rows({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}));
    EXPECT_DOUBLE_EQ(b->distance(BPoint::index(0), BPoint::index(2)), 2.0);
    EXPECT_THROW(b->distance(BPoint::index(0), BPoint::index(3)), std::invalid_argument);
    EXPECT_THROW(TargetSpace::explicit_metric(DenseMatrix::from_rows({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}})), std::invalid_argument);
    EXPECT_THROW(TargetSpace::explicit_metric(DenseMatrix::from_rows({{0, 1}, {2, 0}})), std::invalid_argument);
}

TEST(Validate, RandomFieldsAreValid) {
    Rng rng(1);
    for (int t = 0; t < 30; ++t) {
        EXPECT_TRUE(validate_field(random_field(rng, 2 + rng.below(6), 1 + rng.below(2))).valid());
        auto space = random_explicit_space(rng, 4);
        EXPECT_TRUE(validate_field(random_field_explicit(rng, 5, space)).valid());
    }
}

TEST(Validate, ReportsEachViolation) {
    using K = Violation::Kind;
    auto b = TargetSpace::euclidean(1);
    auto field = [&](DenseMatrix d, std::vector<double> v, bool pseudo = false) {
        std::vector<BPoint> vals;
        for (double x : v) vals.emplace_back(Coords{x});
        return MetricField(b, std::move(d), std::move(vals), {}, pseudo);
    };
    EXPECT_EQ(validate_field(field(DenseMatrix::from_rows({{0, 1}, {2, 0}}), {0, 0})).count(K::asymmetric), 1u);
    EXPECT_EQ(validate_field(field(DenseMatrix::from_rows({{0, 1}, {1, 0}}), {0, 3})).count(K::lipschitz), 1u);
    EXPECT_EQ(validate_field(field(DenseMatrix::from_rows({{0.5, 1}, {1, 0}}), {0, 0})).count(K::nonzero_diagonal), 1u);
    EXPECT_EQ(validate_field(field(DenseMatrix::from_rows({{0, -1}, {-1, 0}}), {0, 0})).count(K::negative_distance), 2u);
    EXPECT_GE(validate_field(field(DenseMatrix::from_rows({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}), {0, 0, 0})).count(K::triangle), 1u);
    EXPECT_EQ(validate_field(field(DenseMatrix::from_rows({{0, 0}, {0, 0}}), {0, 0})).count(K::zero_distance), 1u);
    EXPECT_TRUE(validate_field(field(DenseMatrix::from_rows({{0, 0}, {0, 0}}), {0, 0}, true)).valid());
    DenseMatrix nan(2, 2);
    nan(0, 1) = nan(1, 0) = std::nan("");
    EXPECT_GE(validate_field(field(nan, {0, 0})).count(K::nonfinite), 1u);
}

TEST(Validate, WeightViolations) {
    using K = Violation::Kind;
    auto f = singleton(0.0);
    EXPECT_TRUE(validate_field(MMField(f, {1.0})).valid());
    EXPECT_EQ(validate_field(MMField(f, {0.5})).count(K::weight_sum), 1u);
    EXPECT_EQ(validate_field(MMField(f, {-1.0})).count(K::negative_weight), 1u);
    EXPECT_EQ(validate_field(MMField(f, {0.0})).count(K::empty_support), 1u);
}

TEST(Validate, ToleranceIsRespected) {
    auto b = TargetSpace::euclidean(1);
    MetricField f(b, DenseMatrix::from_rows({{0, 1}, {1, 0}}), {BPoint{0.0}, BPoint{1.0 + 5e-10}});
    EXPECT_TRUE(validate_field(f).valid());
    EXPECT_FALSE(validate_field(f, Tolerances{1e-12, 1e-9}).valid());
}

TEST(Validate, RescaleFactorIsReportedNotApplied) {
    auto b = TargetSpace::euclidean(1);
    MetricField f(b, DenseMatrix::from_rows({{0, 1}, {1, 0}}), {BPoint{0.0}, BPoint{3.0}});
    EXPECT_DOUBLE_EQ(*lipschitz_rescale_factor(f), 3.0);
    EXPECT_DOUBLE_EQ(f.d(0, 1), 1.0);
    MetricField g(b, DenseMatrix::from_rows({{0, 0}, {0, 0}}), {BPoint{0.0}, BPoint{3.0}}, {}, true);
    EXPECT_FALSE(lipschitz_rescale_factor(g).has_value());
}

TEST(Field, ConstructorChecksShapes) {
    auto b = TargetSpace::euclidean(1);
    EXPECT_THROW(MetricField(b, DenseMatrix(2, 3), {BPoint{0.0}, BPoint{0.0}}), std::invalid_argument);
    EXPECT_THROW(MetricField(b, DenseMatrix(2, 2), {BPoint{0.0}}), std::invalid_argument);
    EXPECT_THROW(MetricField(b, DenseMatrix(1, 1), {BPoint{0.0, 1.0}}), std::invalid_argument);
    EXPECT_THROW(MetricField(nullptr, DenseMatrix(1, 1), {BPoint{0.0}}), std::invalid_argument);
}

TEST(Distortion, MatchesDirectFormula) {
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        auto x = random_field(rng, 1 + rng.below(5), 2);
        auto y = random_field(rng, 1 + rng.below(5), 2);
        std::vector<IndexPair> pairs;
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < y.size(); ++j)
                if (rng.uniform() < 0.4) pairs.emplace_back(i, j);
        if (pairs.empty()) pairs.emplace_back(0, 0);
        Relation r(x.size(), y.size(), pairs);
        EXPECT_NEAR(distortion(x, y, r), brute_distortion(x, y, r.pairs()), 1e-12);
        EXPECT_NEAR(distortion(x, y, r), distortion(y, x, r.transposed()), 1e-12);
    }
}

TEST(Distortion, BoundsValueImageHausdorff) {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        auto x = random_field(rng, 1 + rng.below(5), 2);
        auto y = random_field(rng, 1 + rng.below(5), 2);
        Relation r = Relation::full(x.size(), y.size());
        std::vector<BPoint> a, b;
        for (const auto& [i, j] : r.pairs()) {
            a.push_back(x.value(i));
            b.push_back(y.value(j));
        }
        EXPECT_GE(distortion(x, y, r) + 1e-12, 2.0 * hausdorff_in_target(*x.space(), a, b));
    }
}

TEST(Distortion, IdentityOnSameFieldIsZero) {
    Rng rng(4);
    auto x = random_field(rng, 5);
    EXPECT_DOUBLE_EQ(distortion(x, x, Relation::identity(5)), 0.0);
}

TEST(Distortion, RejectsMismatchedSpaces) {
    Rng rng(5);
    auto x = random_field(rng, 2, 1);
    auto y = random_field(rng, 2, 2);
    EXPECT_THROW(distortion(x, y, Relation::identity(2)), std::invalid_argument);
}

TEST(Coproduct, BlocksAreAtHausdorffDistanceR) {
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
        auto x = random_field(rng, 1 + rng.below(6), 1 + rng.below(2));
        auto y = random_field(rng, 1 + rng.below(6), x.space()->dim());
        y = MetricField(x.space(), y.distances(), y.values());
        std::vector<IndexPair> pairs;
        for (std::size_t i = 0; i < x.size(); ++i) pairs.emplace_back(i, rng.below(y.size()));
        for (std::size_t j = 0; j < y.size(); ++j) pairs.emplace_back(rng.below(x.size()), j);
        Relation r(x.size(), y.size(), pairs);
        const double rad = distortion(x, y, r) / 2.0 + rng.uniform(0.0, 1.0) + 1e-3;
        auto z = coproduct(x, y, r, rad);
        EXPECT_TRUE(validate_field(z).valid());
        std::vector<std::size_t> a(x.size()), b(y.size());
        std::iota(a.begin(), a.end(), 0);
        std::iota(b.begin(), b.end(), x.size());
        EXPECT_NEAR(hausdorff(z, a, b), rad, 1e-12);
        // Blocks embed isometrically.
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t k = 0; k < x.size(); ++k) EXPECT_DOUBLE_EQ(z.d(i, k), x.d(i, k));
    }
}

TEST(Coproduct, RejectsSmallRadius) {
    auto x = two_point(1.0).field();
    auto y = two_point(3.0).field();
    Relation r = Relation::identity(2);
    EXPECT_THROW(coproduct(x, y, r, 0.5), InadmissibleRadius);
    EXPECT_THROW(coproduct(x, y, r, 0.0), InadmissibleRadius);
    EXPECT_NO_THROW(coproduct(x, y, r, 1.0));
}

TEST(Amalgamate, GluesAlongCommonSubfield) {
    Rng rng(7);
    for (int t = 0; t < 20; ++t) {
        auto z1 = random_field(rng, 5);
        auto z2base = random_field(rng, 4);
        // Y = first two points of z1; z2 contains a copy of Y glued to fresh points.
        auto y = z1.restricted({0, 1});
        auto z2 = coproduct(y, z2base, Relation::full(2, 4), 0.5 * distortion(y, z2base, Relation::full(2, 4)) + 0.1);
        auto am = amalgamate(z1, z2, y, {0, 1}, {0, 1});
        EXPECT_EQ(am.field.size(), 5u + 4u);
        EXPECT_TRUE(validate_field(am.field).valid());
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(am.field.d(am.z1_embedding[i], am.z1_embedding[k]), z1.d(i, k), 1e-12);
        for (std::size_t i = 0; i < z2.size(); ++i)
            for (std::size_t k = 0; k < z2.size(); ++k) EXPECT_NEAR(am.field.d(am.z2_embedding[i], am.z2_embedding[k]), z2.d(i, k), 1e-12);
    }
}

TEST(Amalgamate, RejectsNonIsometricMaps) {
    Rng rng(8);
    auto z = random_field(rng, 3);
    auto y = z.restricted({0, 1});
    EXPECT_THROW(amalgamate(z, z, y, {0, 2}, {0, 1}), NotIsometricEmbedding);
}

TEST(Hausdorff, SmallExamples) {
    auto b = TargetSpace::euclidean(1);
    // Points on a line at 0, 1, 3.
    MetricField f(b, DenseMatrix::from_rows({{0, 1, 3}, {1, 0, 2}, {3, 2, 0}}), {BPoint{0.0}, BPoint{0.0}, BPoint{0.0}});
    EXPECT_DOUBLE_EQ(hausdorff(f, {0}, {0, 1, 2}), 3.0);
    EXPECT_DOUBLE_EQ(hausdorff(f, {0, 1}, {0, 1, 2}), 2.0);
    EXPECT_DOUBLE_EQ(hausdorff(f, {1}, {1}), 0.0);
    EXPECT_THROW(hausdorff(f, {}, {1}), std::invalid_argument);
}

TEST(Relation, CorrespondenceAndTranspose) {
    Relation r(2, 3, {{0, 0}, {1, 1}, {1, 2}, {1, 1}});
    EXPECT_EQ(r.pairs().size(), 3u);
    EXPECT_TRUE(r.is_correspondence());
    EXPECT_EQ(r.transposed().transposed(), r);
    EXPECT_FALSE(Relation(2, 2, {{0, 0}}).is_correspondence());
    EXPECT_THROW(Relation(1, 1, {{0, 1}}), std::out_of_range);
}

TEST(Random, SeedsAreDeterministicAndSpread) {
    EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
    EXPECT_NE(derive_seed(1, 2), derive_seed(2, 1));
    Rng a(5), b(5);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
    Rng r(9);
    std::vector<int> hist(5, 0);
    for (int i = 0; i < 50000; ++i) ++hist[r.below(5)];
    for (int h : hist) EXPECT_NEAR(h, 10000, 500);
}

TEST(Random, CategoricalSkipsZeroWeights) {
    Categorical c({0.0, 0.5, 0.0, 0.5, 0.0});
    Rng r(10);
    int hits[5] = {};
    for (int i = 0; i < 20000; ++i) ++hits[c(r)];
    EXPECT_EQ(hits[0] + hits[2] + hits[4], 0);
    EXPECT_NEAR(hits[1], 10000, 400);
}

TEST(LinearProgram, SmallProblems) {
    // max x + y s.t. x + 2y <= 4, 3x + y <= 6  ->  min -(x + y); optimum at (1.6, 1.2).
    LinearProgram lp;
    lp.vars = 2;
    lp.cost = {-1.0, -1.0};
    lp.upper = {inf_p, inf_p};
    lp.rows.push_back({{1.0, 2.0}, LinearProgram::Sense::le, 4.0});
    lp.rows.push_back({{3.0, 1.0}, LinearProgram::Sense::le, 6.0});
    auto r = solve_lp(lp);
    ASSERT_EQ(r.status, LPResult::Status::optimal);
    EXPECT_NEAR(r.objective, -2.8, 1e-9);
    EXPECT_NEAR(r.x[0], 1.6, 1e-9);

    LinearProgram bad;
    bad.vars = 1;
    bad.cost = {1.0};
    bad.upper = {inf_p};
    bad.rows.push_back({{1.0}, LinearProgram::Sense::ge, 2.0});
    bad.rows.push_back({{1.0}, LinearProgram::Sense::le, 1.0});
    EXPECT_EQ(solve_lp(bad).status, LPResult::Status::infeasible);

    LinearProgram unb;
    unb.vars = 1;
    unb.cost = {-1.0};
    unb.upper = {inf_p};
    EXPECT_EQ(solve_lp(unb).status, LPResult::Status::unbounded);

    LinearProgram box;
    box.vars = 2;
    box.cost = {-1.0, 1.0};
    box.upper = {0.5, inf_p};
    box.rows.push_back({{1.0, 1.0}, LinearProgram::Sense::eq, 1.0});
    r = solve_lp(box);
    ASSERT_EQ(r.status, LPResult::Status::optimal);
    EXPECT_NEAR(r.objective, 0.0, 1e-9);
}
