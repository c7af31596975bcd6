#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "treatkit/frame.hpp"

namespace treatkit {

// One cross-validation fold: the rows a sub-model may be fit on, and the rows
// that fit is applied to. The two sets are always disjoint, so no application
// row is ever worked on by a model built using that row.
struct SplitFold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> app;
};

struct SplitPlan {
    std::vector<SplitFold> folds;
    std::string method;
    std::size_t nrows = 0;
};

// Leave-one-out: fold i applies to row i, trains on all others. method "oneway".
SplitPlan one_way_holdout(std::size_t nrows);

// Rows are shuffled by the seed and dealt round-robin into k app groups whose
// sizes differ by at most one. method "kwaycross".
SplitPlan k_way_cross_validation(std::size_t nrows, std::size_t k, std::uint64_t seed);

// Rows sorted by y (seeded random tie-breaking), consecutive blocks of k dealt
// one row per fold with a seeded rotation per block, so every fold sees a
// matched slice of the y distribution. method "kwaycrossystratified".
SplitPlan k_way_stratified_y(std::size_t nrows, std::size_t k, std::span<const double> y,
                             std::uint64_t seed);

// Whole groups (the distinct levels of group_col, with MISSING as one group)
// are assigned to folds by stratifying on per-group mean y; no group is ever
// split across app sets. method "kwaycrossgrouped".
SplitPlan grouped_k_way(std::size_t nrows, std::size_t k, const CategoricalColumn& group_col,
                        std::span<const double> y, std::uint64_t seed);

// User-supplied plan file: JSON array of {"train": [...], "app": [...]} with
// 0-based indices. Folds are validated for disjointness and non-emptiness but
// the app sets need not cover (or partition) the rows. method "userfunction".
SplitPlan load_split_plan(const std::string& path, std::size_t nrows);
SplitPlan parse_split_plan(const std::string& json_text, std::size_t nrows);

// Stratified k-way, falling back to one-way holdout when nrows < 2k so every
// fold keeps a nonempty train set. The default plan for cross-frames and for
// out-of-sample significance of complex variables.
SplitPlan default_split_plan(std::size_t nrows, std::size_t k, std::span<const double> y,
                             std::uint64_t seed);

// Checks fold invariants; with require_partition also checks that the app
// sets are pairwise disjoint and cover every row. Throws on violation.
void validate_split_plan(const SplitPlan& plan, std::size_t nrows, bool require_partition);

}  // namespace treatkit
