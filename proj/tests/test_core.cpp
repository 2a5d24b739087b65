#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fairlens/dataset.hpp"
#include "fairlens/error.hpp"
#include "fairlens/report.hpp"
#include "fairlens/stats.hpp"
#include "fairlens/types.hpp"
#include "helpers.hpp"

using namespace fairlens;
using fairlens::testing::make_dataset;
using fairlens::testing::random_dataset;

TEST_CASE("load_dataset parses a plain four-row file") {
    const std::string csv =
        "group,score,target\n"
        "a,1.5,0\n"
        "a,2.5,1\n"
        "b,0.5,0\n"
        "b,3.5,1\n";
    const Dataset dataset = load_dataset_string(csv);
    CHECK(dataset.size() == 4);
    CHECK(dataset.groups() == std::vector<std::string>{"a", "b"});
    CHECK(dataset.records[0].score == 1.5);
    CHECK(dataset.records[3].target == 1.0);
    CHECK_FALSE(dataset.has_items());
    CHECK_FALSE(dataset.has_decision());
}

TEST_CASE("load_dataset rejects an out-of-range decision value naming the row") {
    const std::string csv =
        "group,score,target,decision\n"
        "a,1,0,1\n"
        "a,2,1,2\n"
        "b,3,0,0\n"
        "b,4,1,1\n";
    CHECK_THROWS_WITH_AS(load_dataset_string(csv),
                         doctest::Contains("row 2"), ParseError);
}

TEST_CASE("load_dataset collects item_ prefixed columns as item ids") {
    const std::string csv =
        "group,score,target,item_q1,item_q2\n"
        "a,1,0,1,0\n"
        "a,2,1,0,0\n"
        "b,3,0,1,1\n"
        "b,4,1,0,1\n";
    const Dataset dataset = load_dataset_string(csv);
    CHECK(dataset.item_ids == std::vector<std::string>{"item_q1", "item_q2"});
    CHECK(dataset.records[2].items == std::vector<std::uint8_t>{1, 1});
}

TEST_CASE("load_dataset applies a column-name mapping") {
    const std::string csv =
        "race,exam,outcome\n"
        "a,1,0\n"
        "a,2,1\n"
        "b,3,0\n"
        "b,4,1\n";
    CsvSchema schema;
    schema.group = "race";
    schema.score = "exam";
    schema.target = "outcome";
    const Dataset dataset = load_dataset_string(csv, schema);
    CHECK(dataset.size() == 4);
    CHECK(dataset.records[1].score == 2.0);
}

TEST_CASE("load_dataset error cases") {
    SUBCASE("missing required column") {
        CHECK_THROWS_AS(load_dataset_string("group,score\na,1\nb,2\n"), ParseError);
    }
    SUBCASE("non-numeric score names the row") {
        const std::string csv =
            "group,score,target\n"
            "a,1,0\n"
            "a,oops,1\n"
            "b,3,0\n"
            "b,4,1\n";
        CHECK_THROWS_WITH_AS(load_dataset_string(csv),
                             doctest::Contains("row 2"), ParseError);
    }
    SUBCASE("single group fails validation") {
        CHECK_THROWS_AS(load_dataset_string("group,score,target\na,1,0\na,2,1\n"),
                        InvalidArgument);
    }
    SUBCASE("non-binary item value") {
        const std::string csv =
            "group,score,target,item_q1\n"
            "a,1,0,1\n"
            "a,2,1,3\n"
            "b,3,0,0\n"
            "b,4,1,0\n";
        CHECK_THROWS_WITH_AS(load_dataset_string(csv),
                             doctest::Contains("row 2"), ParseError);
    }
    SUBCASE("non-finite score rejected") {
        const std::string csv =
            "group,score,target\n"
            "a,inf,0\n"
            "a,2,1\n"
            "b,3,0\n"
            "b,4,1\n";
        CHECK_THROWS(load_dataset_string(csv));
    }
}

TEST_CASE("csv serialization round-trips an identical dataset") {
    std::mt19937_64 rng(20260818);
    for (int trial = 0; trial < 25; ++trial) {
        const bool with_decision = trial % 2 == 0;
        const int n_items = trial % 3;
        Dataset original = random_dataset(rng, 5 + trial % 7, with_decision, n_items);
        // Exercise the extra-column path on some trials.
        if (trial % 5 == 0) {
            original.extra_columns = {"age"};
            std::uniform_real_distribution<double> age(18.0, 80.0);
            for (auto& record : original.records) record.extras = {age(rng)};
        }
        const Dataset reloaded = load_dataset_string(to_csv(original));
        CHECK(reloaded == original);
    }
}

TEST_CASE("format_double survives parse round-trips on awkward values") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> wide(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double value = (i % 10 == 0) ? wide(rng) / 1e9 : wide(rng);
        const std::string text = format_double(value);
        CHECK(std::stod(text) == value);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-0.0) == "-0");
}

TEST_CASE("dataset column accessor") {
    Dataset dataset = make_dataset({"a", "a", "b", "b"}, {1, 2, 3, 4}, {0, 1, 0, 1});
    CHECK(dataset.column("score") == std::vector<double>{1, 2, 3, 4});
    CHECK(dataset.column("target") == std::vector<double>{0, 1, 0, 1});
    CHECK_THROWS_AS(dataset.column("decision"), InvalidArgument);
    CHECK_THROWS_AS(dataset.column("nope"), InvalidArgument);
}

TEST_CASE("confusion matrix rates are undefined on zero denominators") {
    const ConfusionMatrix m{.tp = 3, .fp = 1, .fn = 0, .tn = 0};
    CHECK(m.tpr() == 1.0);
    CHECK(m.ppv() == 0.75);
    CHECK(m.tnr() == 0.0);
    CHECK_FALSE(m.npv().has_value()); // tn + fn = 0

    const ConfusionMatrix no_negatives{.tp = 2, .fp = 0, .fn = 1, .tn = 0};
    CHECK_FALSE(no_negatives.tnr().has_value()); // tn + fp = 0
    CHECK(no_negatives.ppv() == 1.0);
    CHECK(no_negatives.npv() == 0.0);
}

TEST_CASE("threshold map text form round-trips") {
    ThresholdMap map = ThresholdMap::uniform({"a", "b"}, 0.75, 0.5);
    map.per_group_cutoff["b"] = 0.6;
    const ThresholdMap reloaded = ThresholdMap::from_text(map.to_text());
    CHECK(reloaded.per_group_cutoff == map.per_group_cutoff);
    CHECK(reloaded.target_cutoff == map.target_cutoff);

    CHECK_THROWS_AS(ThresholdMap::from_text("a,0.5\n"), ParseError);  // no target line
    CHECK_THROWS_AS(ThresholdMap::from_text("__target__,0.5\n"), ParseError);
    CHECK_THROWS_AS(ThresholdMap::from_text("a,zebra\n__target__,0.5\n"), ParseError);
}

TEST_CASE("point_biserial on identical score multisets is zero") {
    const Dataset dataset =
        make_dataset({"a", "a", "a", "b", "b", "b"}, {1, 2, 3, 1, 2, 3},
                     {0, 1, 0, 0, 1, 0});
    const auto rho = point_biserial(dataset, "b");
    REQUIRE(rho.has_value());
    CHECK(*rho == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("point_biserial with perfect separation is one") {
    const Dataset dataset =
        make_dataset({"g1", "g1", "g0", "g0"}, {1, 1, 0, 0}, {0, 1, 0, 1});
    const auto rho = point_biserial(dataset, "g1");
    REQUIRE(rho.has_value());
    CHECK(*rho == doctest::Approx(1.0));
}

TEST_CASE("point_biserial equal group means give zero despite unequal spreads") {
    // group 1 scores {2,0}, group 0 scores {1,1}: hand expansion of the
    // Pearson formula has zero covariance because both group means are 1.
    const Dataset dataset =
        make_dataset({"g1", "g1", "g0", "g0"}, {2, 0, 1, 1}, {0, 1, 0, 1});
    const auto rho = point_biserial(dataset, "g1");
    REQUIRE(rho.has_value());
    CHECK(*rho == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("point_biserial demands exactly two groups") {
    const Dataset dataset = make_dataset({"a", "a", "b", "b", "c", "c"},
                                         {1, 2, 3, 4, 5, 6}, {0, 1, 0, 1, 0, 1});
    CHECK_THROWS_WITH_AS(point_biserial(dataset, "a"),
                         doctest::Contains("binarize"), InvalidArgument);
}

TEST_CASE("point_biserial is undefined when scores are constant") {
    const Dataset dataset =
        make_dataset({"a", "a", "b", "b"}, {1, 1, 1, 1}, {0, 1, 0, 1});
    CHECK_FALSE(point_biserial(dataset, "a").has_value());
}

TEST_CASE("point_biserial flips sign when the coded group swaps") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const Dataset dataset = random_dataset(rng, 4 + trial % 9);
        const auto forward = point_biserial(dataset, "a");
        const auto backward = point_biserial(dataset, "b");
        REQUIRE(forward.has_value());
        REQUIRE(backward.has_value());
        CHECK(*forward == doctest::Approx(-*backward).epsilon(1e-12));
    }
}

TEST_CASE("correlations on R identical to Y") {
    const Dataset dataset =
        make_dataset({"a", "a", "b", "b"}, {1, 2, 3, 4}, {1, 2, 3, 4});
    const CorrelationTriple triple = correlations(dataset, "b");
    CHECK(triple.rho_ry == doctest::Approx(1.0));
    CHECK_FALSE(triple.rho_ar_given_y.has_value());
    CHECK_FALSE(triple.rho_ay_given_r.has_value());
}

TEST_CASE("correlations vanish when per-group distributions coincide") {
    const Dataset dataset = make_dataset(
        {"a", "a", "a", "b", "b", "b"}, {1, 2, 3, 1, 2, 3}, {2, 1, 5, 2, 1, 5});
    const CorrelationTriple triple = correlations(dataset, "a");
    CHECK(triple.rho_ar == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(triple.rho_ay == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("correlations requires non-constant score and target") {
    const Dataset constant_score =
        make_dataset({"a", "a", "b", "b"}, {1, 1, 1, 1}, {0, 1, 0, 1});
    CHECK_THROWS_AS(correlations(constant_score, "a"), InvalidArgument);
}

TEST_CASE("partial correlations match the residual-correlation definition") {
    // Independent oracle: rho_XY.Z equals the correlation between the
    // residuals of X on Z and of Y on Z.
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 20 + static_cast<std::size_t>(trial) * 3;
        std::vector<double> a(n), r(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = unit(rng) < 0.5 ? 0.0 : 1.0;
            const double base = unit(rng);
            r[i] = base + 0.3 * a[i] + 0.2 * unit(rng);
            y[i] = 0.7 * base + 0.1 * a[i] + 0.3 * unit(rng);
        }
        const auto rho_ar = pearson(a, r);
        const auto rho_ay = pearson(a, y);
        const auto rho_ry = pearson(r, y);
        REQUIRE(rho_ar.has_value());
        REQUIRE(rho_ay.has_value());
        REQUIRE(rho_ry.has_value());

        const auto resid_corr = [&](std::span<const double> x,
                                    std::span<const double> w,
                                    std::span<const double> z) {
            const RegressionFit fx = ols(z, x);
            const RegressionFit fw = ols(z, w);
            return pearson(fx.residuals, fw.residuals);
        };

        const auto partial_ar_y = partial_correlation(*rho_ar, *rho_ay, *rho_ry);
        const auto oracle_ar_y = resid_corr(a, r, y);
        REQUIRE(partial_ar_y.has_value());
        REQUIRE(oracle_ar_y.has_value());
        CHECK(*partial_ar_y == doctest::Approx(*oracle_ar_y).epsilon(1e-9));

        const auto partial_ay_r = partial_correlation(*rho_ay, *rho_ar, *rho_ry);
        const auto oracle_ay_r = resid_corr(a, y, r);
        REQUIRE(partial_ay_r.has_value());
        REQUIRE(oracle_ay_r.has_value());
        CHECK(*partial_ay_r == doctest::Approx(*oracle_ay_r).epsilon(1e-9));
    }
}

TEST_CASE("partial correlation undefined at |rho|=1 denominators") {
    CHECK_FALSE(partial_correlation(0.5, 0.3, 1.0).has_value());
    CHECK_FALSE(partial_correlation(0.5, 1.0, 0.3).has_value());
    CHECK(partial_correlation(0.5, 0.0, 0.0) == 0.5);
}

TEST_CASE("pooled_ols recovers an exact linear relation") {
    Dataset dataset = make_dataset({"a", "a", "b", "b"}, {0, 1, 2, 3}, {0, 0, 0, 0});
    for (auto& record : dataset.records) record.target = 2.0 * record.score + 1.0;
    const RegressionFit fit = pooled_ols(dataset, Predictor::Score);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    for (const double residual : fit.residuals)
        CHECK(residual == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pooled_ols on the identity points") {
    const Dataset dataset =
        make_dataset({"a", "a", "b", "b"}, {0, 1, 2, 0}, {0, 1, 2, 0});
    const RegressionFit fit = pooled_ols(dataset, Predictor::Score);
    CHECK(fit.slope == doctest::Approx(1.0));
    CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pooled_ols rejects a constant predictor") {
    const Dataset dataset =
        make_dataset({"a", "a", "b", "b"}, {1, 1, 1, 1}, {0, 1, 0, 1});
    CHECK_THROWS_AS(pooled_ols(dataset, Predictor::Score), InvalidArgument);
}

TEST_CASE("ols residuals sum to zero and ignore the predictor") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 30; ++trial) {
        const Dataset dataset = random_dataset(rng, 10 + trial);
        for (const Predictor predictor : {Predictor::Score, Predictor::Target}) {
            const RegressionFit fit = pooled_ols(dataset, predictor);
            double sum = 0.0;
            double scale = 0.0;
            for (const double residual : fit.residuals) {
                sum += residual;
                scale += std::abs(residual);
            }
            CHECK(std::abs(sum) <= 1e-9 * std::max(1.0, scale));
            const auto x = dataset.column(predictor == Predictor::Score ? "score"
                                                                        : "target");
            const auto rho = pearson(x, fit.residuals);
            if (rho.has_value()) CHECK(std::abs(*rho) <= 1e-9);
        }
    }
}

TEST_CASE("ols_fit_on fits the line on a subset but scores every record") {
    // Fit on group a only: a-records get exact zero residuals on collinear
    // data, b-records keep their offset.
    Dataset dataset = make_dataset({"a", "a", "a", "b", "b"}, {0, 1, 2, 0, 1},
                                   {1, 3, 5, 2, 4});
    const std::vector<std::size_t> fit_rows{0, 1, 2};
    const RegressionFit fit = ols_fit_on(dataset, Predictor::Score, fit_rows);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.residuals.size() == dataset.size());
    CHECK(fit.residuals[3] == doctest::Approx(1.0));
    CHECK(fit.residuals[4] == doctest::Approx(1.0));
}

TEST_CASE("component disparity rules") {
    Component parity;
    parity.per_group = {{"a", 0.4}, {"b", 0.1}, {"c", 0.3}};
    CHECK(parity.disparity() == doctest::Approx(0.3));

    Component deviation;
    deviation.aggregate = Component::Aggregate::MaxAbsValue;
    deviation.per_group = {{"a", -0.25}, {"b", 0.1}};
    CHECK(deviation.disparity() == doctest::Approx(0.25));

    const double inf = std::numeric_limits<double>::infinity();
    Component infinities;
    infinities.per_group = {{"a", inf}, {"b", inf}};
    CHECK(infinities.disparity() == 0.0);
    infinities.per_group["c"] = 1.0;
    CHECK(std::isinf(infinities.disparity()));
}

TEST_CASE("finalize_report verdict logic") {
    Component ok;
    ok.per_group = {{"a", 0.50}, {"b", 0.505}};
    const CriterionReport pass = finalize_report("demo", 0.01, {ok});
    CHECK(pass.verdict == Verdict::Pass);
    CHECK(pass.max_disparity == doctest::Approx(0.005));

    Component wide;
    wide.per_group = {{"a", 0.2}, {"b", 0.5}};
    CHECK(finalize_report("demo", 0.01, {wide}).verdict == Verdict::Fail);

    Component holey;
    holey.per_group = {{"a", 0.2}, {"b", std::nullopt}};
    CHECK(finalize_report("demo", 0.01, {holey}).verdict == Verdict::Undefined);

    // Undefined wins even when another component fails.
    CHECK(finalize_report("demo", 0.01, {wide, holey}).verdict == Verdict::Undefined);
}
