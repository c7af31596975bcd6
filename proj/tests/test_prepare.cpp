#include "doctest.h"

#include <cmath>

#include "treatkit/csv.hpp"
#include "treatkit/design.hpp"
#include "treatkit/prepare.hpp"
#include "treatkit/significance.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

using namespace treatkit;
using testsupport::cat_col;
using testsupport::column_values;
using testsupport::num_col;
using testsupport::worked_frame;

TEST_SUITE("prepare") {

TEST_CASE("worked frame reproduces every printed cell") {
    const Frame d = worked_frame();
    const TreatmentPlan plan = design_treatments_n(d, {"x", "z"}, "yN", DesignControls{}, 1);
    const Frame treated = prepare(plan, d);

    REQUIRE(treated.ncols() == 9);  // 8 derived + outcome
    CHECK(treated.name(8) == "yN");
    CHECK(column_values(treated, "x_lev_NA") == std::vector<double>{0, 0, 0, 0, 1});
    CHECK(column_values(treated, "x_lev_x.a") == std::vector<double>{1, 1, 0, 0, 0});
    CHECK(column_values(treated, "x_lev_x.b") == std::vector<double>{0, 0, 1, 1, 0});
    CHECK(column_values(treated, "x_catP") == std::vector<double>{0.4, 0.4, 0.4, 0.4, 0.2});

    const auto catn = column_values(treated, "x_catN");
    const std::vector<double> catn_expect{0.2, 0.2, -0.3, -0.3, 0.2};
    for (std::size_t i = 0; i < 5; ++i) CHECK(catn[i] == doctest::Approx(catn_expect[i]).epsilon(1e-6));

    const auto catd = column_values(treated, "x_catD");
    const std::vector<double> catd_expect{0.0, 0.0, 0.7071068, 0.7071068, 0.7071068};
    for (std::size_t i = 0; i < 5; ++i) CHECK(catd[i] == doctest::Approx(catd_expect[i]).epsilon(1e-6));

    CHECK(column_values(treated, "z_clean") == std::vector<double>{0.0, 1.0, 2.0, 1.75, 4.0});
    CHECK(column_values(treated, "z_isBAD") == std::vector<double>{0, 0, 0, 1, 0});
    CHECK(column_values(treated, "yN") == std::vector<double>{1, 1, 0, 1, 1});
}

TEST_CASE("binomial worked frame reproduces the catB column") {
    const Frame d = worked_frame();
    const TreatmentPlan plan = design_treatments_c(d, {"x", "z"}, "y", "TRUE", DesignControls{}, 1);
    const Frame treated = prepare(plan, d);
    const auto catb = column_values(treated, "x_catB");
    const std::vector<double> expect{8.517318, 8.517318, -1.386219, -1.386219, 7.824221};
    for (std::size_t i = 0; i < 5; ++i) CHECK(catb[i] == doctest::Approx(expect[i]).epsilon(1e-5));
    // the outcome column passes through as-is
    CHECK(std::get<CategoricalColumn>(treated.column("y")).level_at(2) == "FALSE");
}

TEST_CASE("no-target worked frame") {
    const Frame d = worked_frame();
    const TreatmentPlan plan = design_treatments_z(d, {"x", "z"}, DesignControls{});
    const Frame treated = prepare(plan, d);
    CHECK(treated.ncols() == 6);
    CHECK(column_values(treated, "x_catP") == std::vector<double>{0.4, 0.4, 0.4, 0.4, 0.2});
    CHECK(column_values(treated, "z_clean") == std::vector<double>{0.0, 1.0, 2.0, 1.75, 4.0});
}

TEST_CASE("novel levels encode as no level under a restriction") {
    // design on x = a,a,b,b,c,c vs y = 1..6; apply to a,b,c,d
    Frame df(6);
    df.add_column("x", cat_col({"a", "a", "b", "b", "c", "c"}));
    df.add_column("y", num_col({1, 2, 3, 4, 5, 6}));
    const TreatmentPlan plan = design_treatments_n(df, {"x"}, "y", DesignControls{}, 5);

    std::vector<std::string> lev_names;
    for (const auto& row : plan.score_frame) {
        if (row.code == Code::kLev) lev_names.push_back(row.var_name);
    }
    CHECK(lev_names ==
          std::vector<std::string>{"x_lev_x.a", "x_lev_x.b", "x_lev_x.c"});

    Frame newdata(4);
    newdata.add_column("x", cat_col({"a", "b", "c", "d"}));
    PrepareOptions options;
    options.var_restriction = lev_names;
    const Frame treated = prepare(plan, newdata, options);
    CHECK(treated.ncols() == 3);  // outcome column absent from the input
    CHECK(column_values(treated, "x_lev_x.a") == std::vector<double>{1, 0, 0, 0});
    CHECK(column_values(treated, "x_lev_x.b") == std::vector<double>{0, 1, 0, 0});
    CHECK(column_values(treated, "x_lev_x.c") == std::vector<double>{0, 0, 1, 0});
}

TEST_CASE("pruning is strict and monotone") {
    const Frame d = worked_frame();
    const TreatmentPlan plan = design_treatments_n(d, {"x", "z"}, "yN", DesignControls{}, 1);

    PrepareOptions zero;
    zero.prune_sig = 0.0;
    CHECK(prepare(plan, d, zero).ncols() == 1);  // strict <: nothing survives, outcome only

    std::vector<std::size_t> previous;
    for (const double threshold : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.1}) {
        PrepareOptions options;
        options.prune_sig = threshold;
        const auto kept = surviving_specs(plan, options);
        for (const std::size_t idx : previous) {
            CHECK(std::find(kept.begin(), kept.end(), idx) != kept.end());
        }
        previous = kept;
    }
}

TEST_CASE("prepare errors name the offending column") {
    const Frame d = worked_frame();
    const TreatmentPlan plan = design_treatments_n(d, {"x", "z"}, "yN", DesignControls{}, 1);

    Frame missing_col(2);
    missing_col.add_column("x", cat_col({"a", "b"}));
    CHECK_THROWS_WITH_AS(prepare(plan, missing_col), doctest::Contains("'z'"), Error);

    Frame wrong_type(2);
    wrong_type.add_column("x", cat_col({"a", "b"}));
    wrong_type.add_column("z", cat_col({"p", "q"}));
    CHECK_THROWS_WITH_AS(prepare(plan, wrong_type), doctest::Contains("'z'"), Error);

    PrepareOptions bad_restriction;
    bad_restriction.var_restriction = std::vector<std::string>{"x_catN", "not_a_var"};
    CHECK_THROWS_WITH_AS(prepare(plan, d, bad_restriction), doctest::Contains("not_a_var"), Error);
}

TEST_CASE("train rows reproduce design-time encodings cell-exactly") {
    Frame f(8);
    f.add_column("c", cat_col({"u", "v", "u", "w", std::nullopt, "v", "u", "w"}));
    f.add_column("n", num_col({1.0, std::nullopt, 3.0, 4.0, 5.0, std::nullopt, 7.0, 8.0}));
    f.add_column("y", num_col({0, 1, 0, 1, 1, 0, 1, 0}));
    const TreatmentPlan plan = design_treatments_n(f, {"c", "n"}, "y", DesignControls{}, 9);
    const Frame once = prepare(plan, f);
    const Frame twice = prepare(plan, f);
    CHECK(write_csv_text(once) == write_csv_text(twice));
    for (std::size_t i = 0; i < plan.specs.size(); ++i) {
        const auto direct = apply_spec(plan.specs[i], f.column(plan.score_frame[i].orig_name));
        CHECK(column_values(once, plan.score_frame[i].var_name) == direct);
    }
}

TEST_CASE("prepared output is always finite") {
    const Frame d = worked_frame();
    const TreatmentPlan plan = design_treatments_n(d, {"x", "z"}, "yN", DesignControls{}, 1);
    Frame hostile(3);
    hostile.add_column("x", cat_col({"totally-new", std::nullopt, "b"}));
    hostile.add_column("z", num_col({std::nullopt, std::nullopt, std::nullopt}));
    const Frame treated = prepare(plan, hostile);
    for (std::size_t c = 0; c < treated.ncols(); ++c) {
        const auto& col = std::get<NumericColumn>(treated.column(c));
        for (std::size_t r = 0; r < treated.nrows(); ++r) {
            CHECK_FALSE(col.bad_mask[r]);
            CHECK(std::isfinite(col.values[r]));
        }
    }
}

TEST_CASE("scaling rescales to y-units") {
    // column equal to y scales to y - mean(y); an orthogonal column to 0
    Frame f(6);
    f.add_column("same", num_col({1, 2, 3, 4, 5, 6}));
    f.add_column("orth", num_col({1, -1, 0, 0, -1, 1}));  // orthogonal to y by construction
    f.add_column("y", num_col({1, 2, 3, 4, 5, 6}));
    const TreatmentPlan plan = design_treatments_n(f, {"same", "orth"}, "y", DesignControls{}, 2);

    PrepareOptions options;
    options.scale = true;
    const Frame treated = prepare(plan, f, options);
    const auto same = column_values(treated, "same_clean");
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(same[i] == doctest::Approx(static_cast<double>(i + 1) - 3.5).epsilon(1e-12));
    }
    for (const double v : column_values(treated, "orth_clean")) {
        CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("scaled columns regress onto y with unit slope") {
    treatkit::Rng rng(55);
    Frame f(40);
    std::vector<std::optional<double>> xs, ys;
    std::vector<double> yv;
    for (int i = 0; i < 40; ++i) {
        const double x = oracle::gaussian(rng);
        const double y = 2.0 * x + oracle::gaussian(rng);
        xs.push_back(x);
        ys.push_back(y);
        yv.push_back(y);
    }
    f.add_column("x", num_col(xs));
    f.add_column("y", num_col(ys));
    const TreatmentPlan plan = design_treatments_n(f, {"x"}, "y", DesignControls{}, 3);
    PrepareOptions options;
    options.scale = true;
    const Frame treated = prepare(plan, f, options);
    const auto scaled = column_values(treated, "x_clean");
    // slope of y on the scaled column is 1 for any correlated column
    const auto fit = oracle::ols(scaled, yv);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-9));

    // scaling without an outcome is refused
    const TreatmentPlan zplan = design_treatments_z(f, {"x"}, DesignControls{});
    CHECK_THROWS_AS(prepare(zplan, f, options), Error);
}

}  // TEST_SUITE
