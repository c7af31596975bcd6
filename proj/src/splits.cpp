#include "treatkit/splits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "json.hpp"

#include "treatkit/rng.hpp"

namespace treatkit {

namespace {

// Turns a per-row fold assignment into app/train sets, rows ascending.
SplitPlan plan_from_assignment(const std::vector<std::size_t>& fold_of, std::size_t k,
                               std::string method) {
    const std::size_t n = fold_of.size();
    SplitPlan plan;
    plan.method = std::move(method);
    plan.nrows = n;
    plan.folds.resize(k);
    for (std::size_t r = 0; r < n; ++r) plan.folds[fold_of[r]].app.push_back(r);
    for (std::size_t f = 0; f < k; ++f) {
        auto& fold = plan.folds[f];
        fold.train.reserve(n - fold.app.size());
        std::size_t next_app = 0;
        for (std::size_t r = 0; r < n; ++r) {
            if (next_app < fold.app.size() && fold.app[next_app] == r) {
                ++next_app;
            } else {
                fold.train.push_back(r);
            }
        }
    }
    return plan;
}

// Sort-and-deal: order keys, then hand each consecutive block of k items to
// the k folds with a per-block rotation drawn from the rng.
std::vector<std::size_t> block_deal(const std::vector<std::size_t>& order, std::size_t k,
                                    Rng& rng) {
    std::vector<std::size_t> fold_of(order.size());
    for (std::size_t start = 0; start < order.size(); start += k) {
        const std::size_t len = std::min(k, order.size() - start);
        const std::size_t offset = rng.below(k);
        for (std::size_t i = 0; i < len; ++i) {
            fold_of[order[start + i]] = (offset + i) % k;
        }
    }
    return fold_of;
}

}  // namespace

SplitPlan one_way_holdout(std::size_t nrows) {
    if (nrows < 2) throw Error("splits: one-way holdout needs at least 2 rows");
    SplitPlan plan;
    plan.method = "oneway";
    plan.nrows = nrows;
    plan.folds.resize(nrows);
    for (std::size_t i = 0; i < nrows; ++i) {
        plan.folds[i].app = {i};
        plan.folds[i].train.reserve(nrows - 1);
        for (std::size_t r = 0; r < nrows; ++r) {
            if (r != i) plan.folds[i].train.push_back(r);
        }
    }
    return plan;
}

SplitPlan k_way_cross_validation(std::size_t nrows, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw Error("splits: need at least 2 folds");
    if (k > nrows) throw Error("splits: fold count exceeds row count");
    Rng rng(seed);
    std::vector<std::size_t> perm(nrows);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    std::vector<std::size_t> fold_of(nrows);
    for (std::size_t pos = 0; pos < nrows; ++pos) fold_of[perm[pos]] = pos % k;
    return plan_from_assignment(fold_of, k, "kwaycross");
}

SplitPlan k_way_stratified_y(std::size_t nrows, std::size_t k, std::span<const double> y,
                             std::uint64_t seed) {
    if (k < 2) throw Error("splits: need at least 2 folds");
    if (k > nrows) throw Error("splits: fold count exceeds row count");
    if (y.size() != nrows) throw Error("splits: y length must equal nrows");
    for (const double v : y) {
        if (!std::isfinite(v)) throw Error("splits: y must be finite for stratification");
    }
    Rng rng(seed);
    std::vector<std::uint64_t> tiebreak(nrows);
    for (auto& t : tiebreak) t = rng.next_u64();
    std::vector<std::size_t> order(nrows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (y[a] != y[b]) return y[a] < y[b];
        return tiebreak[a] < tiebreak[b];
    });
    return plan_from_assignment(block_deal(order, k, rng), k, "kwaycrossystratified");
}

SplitPlan grouped_k_way(std::size_t nrows, std::size_t k, const CategoricalColumn& group_col,
                        std::span<const double> y, std::uint64_t seed) {
    if (k < 2) throw Error("splits: need at least 2 folds");
    if (group_col.size() != nrows) throw Error("splits: group column length must equal nrows");
    if (y.size() != nrows) throw Error("splits: y length must equal nrows");

    // Rows per distinct group; MISSING is a group of its own.
    std::map<std::int32_t, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < nrows; ++r) groups[group_col.codes[r]].push_back(r);
    const std::size_t ngroups = groups.size();
    if (ngroups < k) throw Error("splits: fewer distinct groups than folds");

    struct GroupInfo {
        double mean_y;
        std::uint64_t tiebreak;
        const std::vector<std::size_t>* rows;
    };
    Rng rng(seed);
    std::vector<GroupInfo> infos;
    infos.reserve(ngroups);
    for (const auto& [code, rows] : groups) {
        double sum = 0.0;
        for (const std::size_t r : rows) sum += y[r];
        infos.push_back({sum / static_cast<double>(rows.size()), rng.next_u64(), &rows});
    }
    std::vector<std::size_t> order(ngroups);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (infos[a].mean_y != infos[b].mean_y) return infos[a].mean_y < infos[b].mean_y;
        return infos[a].tiebreak < infos[b].tiebreak;
    });
    const std::vector<std::size_t> fold_of_group = block_deal(order, k, rng);
    std::vector<std::size_t> fold_of(nrows);
    for (std::size_t g = 0; g < ngroups; ++g) {
        for (const std::size_t r : *infos[g].rows) fold_of[r] = fold_of_group[g];
    }
    return plan_from_assignment(fold_of, k, "kwaycrossgrouped");
}

SplitPlan default_split_plan(std::size_t nrows, std::size_t k, std::span<const double> y,
                             std::uint64_t seed) {
    if (nrows < 2 * k) return one_way_holdout(nrows);
    return k_way_stratified_y(nrows, k, y, seed);
}

SplitPlan parse_split_plan(const std::string& json_text, std::size_t nrows) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("split plan: invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw Error("split plan: top level must be an array of folds");

    SplitPlan plan;
    plan.method = "userfunction";
    plan.nrows = nrows;
    for (const auto& entry : doc) {
        if (!entry.is_object() || !entry.contains("train") || !entry.contains("app")) {
            throw Error("split plan: each fold needs 'train' and 'app' arrays");
        }
        SplitFold fold;
        for (const char* key : {"train", "app"}) {
            auto& dst = (key[0] == 't') ? fold.train : fold.app;
            for (const auto& v : entry[key]) {
                if (!v.is_number_unsigned() && !v.is_number_integer()) {
                    throw Error("split plan: indices must be integers");
                }
                const auto idx = v.get<long long>();
                if (idx < 0 || static_cast<std::size_t>(idx) >= nrows) {
                    throw Error("split plan: index " + std::to_string(idx) + " out of range for " +
                                std::to_string(nrows) + " rows");
                }
                dst.push_back(static_cast<std::size_t>(idx));
            }
            std::sort(dst.begin(), dst.end());
            dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
        }
        plan.folds.push_back(std::move(fold));
    }
    validate_split_plan(plan, nrows, /*require_partition=*/false);
    return plan;
}

SplitPlan load_split_plan(const std::string& path, std::size_t nrows) {
    std::ifstream in(path);
    if (!in) throw Error("split plan: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_split_plan(text, nrows);
}

void validate_split_plan(const SplitPlan& plan, std::size_t nrows, bool require_partition) {
    if (plan.folds.empty()) throw Error("split plan: no folds");
    std::vector<int> app_count(nrows, 0);
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        const auto& fold = plan.folds[f];
        if (fold.train.empty() || fold.app.empty()) {
            throw Error("split plan: fold " + std::to_string(f) + " has an empty set");
        }
        std::vector<bool> in_train(nrows, false);
        for (const std::size_t r : fold.train) {
            if (r >= nrows) throw Error("split plan: train index out of range");
            in_train[r] = true;
        }
        for (const std::size_t r : fold.app) {
            if (r >= nrows) throw Error("split plan: app index out of range");
            if (in_train[r]) {
                throw Error("split plan: fold " + std::to_string(f) + " has row " +
                            std::to_string(r) + " in both train and app");
            }
            ++app_count[r];
        }
    }
    if (require_partition) {
        for (std::size_t r = 0; r < nrows; ++r) {
            if (app_count[r] != 1) {
                throw Error("split plan: app sets do not partition the rows (row " +
                            std::to_string(r) + " covered " + std::to_string(app_count[r]) +
                            " times)");
            }
        }
    }
}

}  // namespace treatkit
