#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "treatkit/rng.hpp"
#include "treatkit/splits.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

using namespace treatkit;

namespace {

bool plans_equal(const SplitPlan& a, const SplitPlan& b) {
    if (a.method != b.method || a.folds.size() != b.folds.size()) return false;
    for (std::size_t i = 0; i < a.folds.size(); ++i) {
        if (a.folds[i].train != b.folds[i].train || a.folds[i].app != b.folds[i].app) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("splits") {

TEST_CASE("one-way holdout structure") {
    const SplitPlan plan = one_way_holdout(3);
    CHECK(plan.method == "oneway");
    REQUIRE(plan.folds.size() == 3);
    CHECK(plan.folds[0].app == std::vector<std::size_t>{0});
    CHECK(plan.folds[0].train == std::vector<std::size_t>{1, 2});
    CHECK(plan.folds[1].app == std::vector<std::size_t>{1});
    CHECK(plan.folds[1].train == std::vector<std::size_t>{0, 2});
    CHECK(plan.folds[2].app == std::vector<std::size_t>{2});
    CHECK(plan.folds[2].train == std::vector<std::size_t>{0, 1});

    const SplitPlan two = one_way_holdout(2);
    CHECK(two.folds[0].train.size() == 1);
    CHECK(two.folds[1].train.size() == 1);

    CHECK_THROWS_AS(one_way_holdout(1), Error);
}

TEST_CASE("one-way holdout partitions rows exhaustively") {
    for (std::size_t n = 2; n <= 12; ++n) {
        const auto report = oracle::split_check(one_way_holdout(n), n);
        CHECK(report.disjoint);
        CHECK(report.app_partitions_rows);
        CHECK(report.nonempty);
    }
}

TEST_CASE("k-way sizes and determinism") {
    const SplitPlan p6 = k_way_cross_validation(6, 3, 7);
    CHECK(p6.method == "kwaycross");
    for (const auto& fold : p6.folds) CHECK(fold.app.size() == 2);

    const SplitPlan p7 = k_way_cross_validation(7, 3, 7);
    std::multiset<std::size_t> sizes;
    for (const auto& fold : p7.folds) sizes.insert(fold.app.size());
    CHECK(sizes == std::multiset<std::size_t>{2, 2, 3});

    CHECK(plans_equal(k_way_cross_validation(100, 5, 42), k_way_cross_validation(100, 5, 42)));
    CHECK_FALSE(plans_equal(k_way_cross_validation(100, 5, 42), k_way_cross_validation(100, 5, 43)));
    CHECK_THROWS_AS(k_way_cross_validation(3, 4, 0), Error);
}

TEST_CASE("stratified plan spreads the y range across folds") {
    // strictly increasing y, k=2, n=4: each app set holds one of the
    // smallest two rows and one of the largest two
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SplitPlan plan = k_way_stratified_y(4, 2, y, seed);
        CHECK(plan.method == "kwaycrossystratified");
        for (const auto& fold : plan.folds) {
            REQUIRE(fold.app.size() == 2);
            const bool low = fold.app[0] <= 1;
            const bool high = fold.app[1] >= 2;
            CHECK(low);
            CHECK(high);
        }
    }
}

TEST_CASE("stratified app means hug the overall mean") {
    // per-fold y means stay within (max - min) of the grand mean, 100 trials
    const std::size_t n = 100;
    Rng data_rng(99);
    std::vector<double> y(n);
    for (auto& v : y) v = oracle::gaussian(data_rng) * 5.0;
    double grand = 0.0;
    for (const double v : y) grand += v;
    grand /= static_cast<double>(n);
    const double spread =
        *std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end());
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const SplitPlan plan = k_way_stratified_y(n, 5, y, seed);
        for (const auto& fold : plan.folds) {
            double m = 0.0;
            for (const std::size_t r : fold.app) m += y[r];
            m /= static_cast<double>(fold.app.size());
            CHECK(std::fabs(m - grand) < spread);
        }
    }
}

TEST_CASE("constant y still yields a valid stratified plan") {
    const std::vector<double> y(9, 3.0);
    const SplitPlan plan = k_way_stratified_y(9, 3, y, 5);
    const auto report = oracle::split_check(plan, 9);
    CHECK(report.disjoint);
    CHECK(report.app_partitions_rows);
}

TEST_CASE("built-in plans partition for n up to 12 exhaustively") {
    for (std::size_t n = 4; n <= 12; ++n) {
        for (std::size_t k = 2; k <= std::min<std::size_t>(n, 4); ++k) {
            std::vector<double> y(n);
            Rng rng(n * 31 + k);
            for (auto& v : y) v = rng.unit_double();
            for (std::uint64_t seed = 0; seed < 8; ++seed) {
                for (const auto& plan :
                     {k_way_cross_validation(n, k, seed), k_way_stratified_y(n, k, y, seed)}) {
                    const auto report = oracle::split_check(plan, n);
                    CHECK(report.disjoint);
                    CHECK(report.app_partitions_rows);
                    CHECK(report.nonempty);
                }
            }
        }
    }
}

TEST_CASE("grouped plan keeps whole groups together") {
    // 4 groups, k=2: each fold's app holds exactly 2 whole groups
    const auto groups = testsupport::cat_col({"g1", "g1", "g2", "g2", "g3", "g3", "g4", "g4"});
    const std::vector<double> y{1, 1, 2, 2, 3, 3, 4, 4};
    const SplitPlan plan = grouped_k_way(8, 2, groups, y, 11);
    CHECK(plan.method == "kwaycrossgrouped");
    for (const auto& fold : plan.folds) {
        std::set<std::int32_t> fold_groups;
        for (const std::size_t r : fold.app) fold_groups.insert(groups.codes[r]);
        CHECK(fold_groups.size() == 2);
        // no group split across app sets: every row of each group present
        for (const auto g : fold_groups) {
            std::size_t expected = 0, got = 0;
            for (std::size_t r = 0; r < 8; ++r) {
                if (groups.codes[r] == g) {
                    ++expected;
                    if (std::find(fold.app.begin(), fold.app.end(), r) != fold.app.end()) ++got;
                }
            }
            CHECK(expected == got);
        }
    }
}

TEST_CASE("group atomicity on random instances") {
    Rng rng(303);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 10 + rng.below(41);
        const std::size_t ngroups = 4 + rng.below(6);
        std::vector<std::optional<std::string>> cells;
        std::vector<double> y(n);
        for (std::size_t r = 0; r < n; ++r) {
            cells.push_back("g" + std::to_string(rng.below(ngroups)));
            y[r] = rng.unit_double();
        }
        const auto groups = testsupport::cat_col(cells);
        std::set<std::int32_t> distinct(groups.codes.begin(), groups.codes.end());
        const std::size_t k = 2 + rng.below(2);
        if (distinct.size() < k) continue;
        const SplitPlan plan = grouped_k_way(n, k, groups, y, trial);
        const auto report = oracle::split_check(plan, n);
        CHECK(report.disjoint);
        CHECK(report.app_partitions_rows);
        // each group appears in exactly one app set
        for (const auto g : distinct) {
            std::set<std::size_t> folds_seen;
            for (std::size_t f = 0; f < plan.folds.size(); ++f) {
                for (const std::size_t r : plan.folds[f].app) {
                    if (groups.codes[r] == g) folds_seen.insert(f);
                }
            }
            CHECK(folds_seen.size() == 1);
        }
    }
}

TEST_CASE("one group per row behaves like a row-level plan") {
    const auto groups = testsupport::cat_col({"a", "b", "c", "d", "e", "f"});
    const std::vector<double> y{1, 2, 3, 4, 5, 6};
    const SplitPlan plan = grouped_k_way(6, 3, groups, y, 1);
    const auto report = oracle::split_check(plan, 6);
    CHECK(report.app_partitions_rows);
    for (const auto& fold : plan.folds) CHECK(fold.app.size() == 2);

    CHECK_THROWS_AS(grouped_k_way(6, 4, testsupport::cat_col({"a", "a", "b", "b", "c", "c"}), y, 1),
                    Error);
}

TEST_CASE("user-supplied plans: rolling frontier accepted, bad plans rejected") {
    // a time-ordered rolling frontier: app sets overlap, coverage incomplete
    const std::string rolling = R"([
      {"train": [0, 1], "app": [2, 3, 4, 5]},
      {"train": [0, 1, 2, 3], "app": [4, 5]}
    ])";
    const SplitPlan plan = parse_split_plan(rolling, 6);
    CHECK(plan.method == "userfunction");
    CHECK(plan.folds.size() == 2);

    CHECK_THROWS_AS(parse_split_plan(R"([{"train": [0], "app": [0]}])", 2), Error);
    CHECK_THROWS_AS(parse_split_plan("[]", 2), Error);
    CHECK_THROWS_AS(parse_split_plan(R"([{"train": [0], "app": [5]}])", 2), Error);
    CHECK_THROWS_AS(parse_split_plan(R"([{"train": [], "app": [1]}])", 2), Error);
    CHECK_THROWS_AS(parse_split_plan(R"([{"train": [0]}])", 2), Error);
}

TEST_CASE("default plan falls back to one-way holdout on small data") {
    const std::vector<double> y5{1, 2, 3, 4, 5};
    CHECK(default_split_plan(5, 3, y5, 1).method == "oneway");
    std::vector<double> y6{1, 2, 3, 4, 5, 6};
    CHECK(default_split_plan(6, 3, y6, 1).method == "kwaycrossystratified");
}

TEST_CASE("sampled sizes up to 10^4 keep the partition invariants") {
    std::vector<double> y(10000);
    Rng rng(8);
    for (auto& v : y) v = rng.unit_double();
    for (const std::size_t n : {std::size_t{100}, std::size_t{997}, std::size_t{10000}}) {
        const SplitPlan plan =
            k_way_stratified_y(n, 3, std::span<const double>(y.data(), n), 21);
        const auto report = oracle::split_check(plan, n);
        CHECK(report.disjoint);
        CHECK(report.app_partitions_rows);
    }
}

}  // TEST_SUITE
