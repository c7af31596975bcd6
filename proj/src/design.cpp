#include "treatkit/design.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <thread>

namespace treatkit {

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    return rows;
}

bool is_constant(const std::vector<double>& v) {
    if (v.empty()) return true;
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    return *mn == *mx;
}

// Rare-level pooling decision for one categorical variable: levels occurring
// at most rare_count times form the pool, kept only when the pooled indicator
// passes the rare_sig test against the outcome. Needs an outcome, so the
// no-target task never pools.
LevelPooling decide_pooling(const CategoricalColumn& col, std::span<const std::size_t> rows,
                            std::span<const double> y, const DesignControls& controls, Task task) {
    LevelPooling pooling;
    if (controls.rare_count <= 0 || !controls.rare_sig || task == Task::kNoTarget) return pooling;

    std::unordered_map<std::int32_t, std::size_t> counts;
    for (const std::size_t r : rows) ++counts[col.codes[r]];
    std::unordered_set<std::string> members;
    bool missing_pooled = false;
    for (const auto& [code, count] : counts) {
        if (count <= static_cast<std::size_t>(controls.rare_count)) {
            if (code == CategoricalColumn::kMissingCode) missing_pooled = true;
            else members.insert(col.levels[code]);
        }
    }
    if (members.empty() && !missing_pooled) return pooling;

    std::vector<double> indicator(rows.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto code = col.codes[rows[i]];
        const bool pooled = code == CategoricalColumn::kMissingCode
                                ? missing_pooled
                                : members.count(col.levels[code]) != 0;
        indicator[i] = pooled ? 1.0 : 0.0;
    }
    if (is_constant(indicator)) return pooling;

    std::vector<double> y_sub(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) y_sub[i] = y[rows[i]];
    const SigResult sig = task == Task::kBinomial ? chisq_test_sig(indicator, y_sub, 0)
                                                  : f_test_sig(indicator, y_sub, 0);
    if (sig.sig <= *controls.rare_sig) {
        pooling.active = true;
        pooling.members = std::move(members);
        pooling.missing_pooled = missing_pooled;
    }
    return pooling;
}

std::vector<Code> cat_codes_for_task(Task task) {
    switch (task) {
        case Task::kNumeric: return {Code::kCatP, Code::kCatN, Code::kCatD};
        case Task::kBinomial: return {Code::kCatP, Code::kCatB};
        case Task::kNoTarget: return {Code::kCatP};
    }
    return {};
}

struct DesignedVariable {
    std::vector<VarSpec> specs;
    std::vector<ScoreFrameRow> rows;
};

struct DesignContext {
    const Frame& frame;
    std::span<const double> y;  // numeric outcome or 0/1 indicator; empty for no-target
    const DesignControls& controls;
    Task task;
    const SplitPlan* score_plan;  // shared split plan for complex-variable scoring
};

SigResult score_simple(const DesignContext& ctx, const std::vector<double>& encoded) {
    switch (ctx.task) {
        case Task::kNumeric: return f_test_sig(encoded, ctx.y, 0);
        case Task::kBinomial: return chisq_test_sig(encoded, ctx.y, 0);
        case Task::kNoTarget: return SigResult{};
    }
    return SigResult{};
}

SigResult score_complex(const DesignContext& ctx, Code code, const std::string& orig,
                        const Column& col, int extra_degrees) {
    if (ctx.task == Task::kNoTarget) return SigResult{};
    const OosEncoder encoder = [&](std::span<const std::size_t> train,
                                   std::span<const std::size_t> app) {
        const VarSpec spec = fit_spec_on_rows(code, orig, col, train, ctx.y, ctx.controls, ctx.task);
        return apply_spec(spec, col, app);
    };
    const SigTest test = ctx.task == Task::kBinomial ? SigTest::kLogistic : SigTest::kLinear;
    return cross_validated_sig(encoder, ctx.y, *ctx.score_plan, extra_degrees, test);
}

DesignedVariable design_one_variable(const DesignContext& ctx, const std::string& name) {
    DesignedVariable out;
    const Column& col = ctx.frame.column(name);
    const auto rows = all_rows(ctx.frame.nrows());

    auto consider = [&](VarSpec spec, int extra_degrees) {
        std::vector<double> encoded = apply_spec(spec, col, rows);
        if (is_constant(encoded)) return;  // constant derived variables are prohibited
        ScoreFrameRow row;
        row.var_name = spec_var_name(spec);
        row.orig_name = spec_orig_name(spec);
        row.code = spec_code(spec);
        row.extra_model_degrees = extra_degrees;
        if (extra_degrees > 0) {
            row.sig = score_complex(ctx, row.code, name, col, extra_degrees).sig;
        } else {
            row.sig = score_simple(ctx, encoded).sig;
        }
        out.specs.push_back(std::move(spec));
        out.rows.push_back(std::move(row));
    };

    if (const auto* num = std::get_if<NumericColumn>(&col)) {
        consider(fit_clean(name, *num, rows), 0);
        if (num->any_bad()) consider(fit_isbad(name), 0);
    } else {
        const auto& cat = std::get<CategoricalColumn>(col);
        const LevelPooling pooling = decide_pooling(cat, rows, ctx.y, ctx.controls, ctx.task);
        const int extra = observed_effective_levels(cat, rows, pooling) - 1;
        for (auto& lev : fit_levs(name, cat, rows, ctx.controls.min_fraction, pooling)) {
            consider(std::move(lev), 0);
        }
        for (const Code code : cat_codes_for_task(ctx.task)) {
            consider(fit_spec_on_rows(code, name, col, rows, ctx.y, ctx.controls, ctx.task), extra);
        }
    }
    return out;
}

void validate_varlist(const Frame& frame, const std::vector<std::string>& varlist,
                      const std::string& outcome_name) {
    for (const auto& name : varlist) {
        if (!frame.has_column(name)) throw Error("design: no column named '" + name + "'");
        if (name == outcome_name) {
            throw Error("design: outcome '" + name + "' may not be an input variable");
        }
    }
}

std::vector<double> numeric_outcome(const Frame& frame, const std::string& outcome_name) {
    const Column& col = frame.column(outcome_name);
    const auto* num = std::get_if<NumericColumn>(&col);
    if (!num) throw Error("design: outcome '" + outcome_name + "' must be numeric");
    if (num->any_bad()) {
        throw Error("design: outcome '" + outcome_name + "' has missing or non-finite values");
    }
    if (is_constant(num->values) || num->values.size() < 2) {
        throw Error("design: outcome '" + outcome_name + "' must take more than one value");
    }
    return num->values;
}

// Designs all variables (optionally on a worker pool), then assembles the
// plan in varlist order so the result is identical for any worker count.
TreatmentPlan run_design(const Frame& frame, const std::vector<std::string>& varlist, Task task,
                         const std::string& outcome_name, const std::string& target_level,
                         std::span<const double> y, const DesignControls& controls,
                         std::uint64_t seed) {
    SplitPlan score_plan;
    if (task != Task::kNoTarget) {
        score_plan = default_split_plan(frame.nrows(), static_cast<std::size_t>(controls.ncross),
                                        y, seed);
    }
    const DesignContext ctx{frame, y, controls, task, &score_plan};

    std::vector<DesignedVariable> designed(varlist.size());
    const int workers = std::max(1, controls.workers);
    if (workers == 1 || varlist.size() <= 1) {
        for (std::size_t i = 0; i < varlist.size(); ++i) {
            designed[i] = design_one_variable(ctx, varlist[i]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::string> errors(varlist.size());
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < varlist.size(); i = next.fetch_add(1)) {
                try {
                    designed[i] = design_one_variable(ctx, varlist[i]);
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        const int nthreads = std::min<std::size_t>(workers, varlist.size());
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        for (const auto& err : errors) {
            if (!err.empty()) throw Error(err);
        }
    }

    TreatmentPlan plan;
    plan.task = task;
    plan.outcome_name = outcome_name;
    plan.target_level = target_level;
    plan.controls = controls;
    if (task == Task::kNumeric) {
        double sum = 0.0;
        for (const double v : y) sum += v;
        plan.mean_y = sum / static_cast<double>(y.size());
    } else if (task == Task::kBinomial) {
        double pos = 0.0;
        for (const double v : y) pos += v;
        plan.grand_rate = pos / static_cast<double>(y.size());
    }
    for (auto& dv : designed) {
        for (std::size_t i = 0; i < dv.specs.size(); ++i) {
            plan.specs.push_back(std::move(dv.specs[i]));
            plan.score_frame.push_back(std::move(dv.rows[i]));
        }
    }
    if (task != Task::kNoTarget) {
        // freeze y-unit scaling into the plan: slope of y ~ derived column
        const auto rows = all_rows(frame.nrows());
        plan.scaling.reserve(plan.specs.size());
        for (const auto& spec : plan.specs) {
            const std::vector<double> encoded =
                apply_spec(spec, frame.column(spec_orig_name(spec)), rows);
            const OlsFit fit = ols_fit(encoded, y);
            double mean = 0.0;
            for (const double v : encoded) mean += v;
            mean /= static_cast<double>(encoded.size());
            plan.scaling.push_back({fit.slope, mean});
        }
    }
    return plan;
}

}  // namespace

const char* task_name(Task task) {
    switch (task) {
        case Task::kNumeric: return "numeric";
        case Task::kBinomial: return "binomial";
        case Task::kNoTarget: return "notarget";
    }
    return "?";
}

Task task_from_name(const std::string& name) {
    if (name == "numeric") return Task::kNumeric;
    if (name == "binomial") return Task::kBinomial;
    if (name == "notarget" || name == "none") return Task::kNoTarget;
    throw Error("unknown task '" + name + "'");
}

VarSpec fit_spec_on_rows(Code code, const std::string& orig, const Column& col,
                         std::span<const std::size_t> rows, std::span<const double> y,
                         const DesignControls& controls, Task task) {
    std::vector<double> y_sub;
    y_sub.reserve(rows.size());
    for (const std::size_t r : rows) y_sub.push_back(y.empty() ? 0.0 : y[r]);

    if (code == Code::kClean) return fit_clean(orig, std::get<NumericColumn>(col), rows);
    if (code == Code::kIsBad) return fit_isbad(orig);

    const auto& cat = std::get<CategoricalColumn>(col);
    const LevelPooling pooling = decide_pooling(cat, rows, y, controls, task);
    switch (code) {
        case Code::kCatN: return fit_catN(orig, cat, rows, y_sub, controls.sm_factor, pooling);
        case Code::kCatB:
            return fit_catB(orig, cat, rows, y_sub, controls.cat_b_epsilon, controls.sm_factor,
                            pooling);
        case Code::kCatP: return fit_catP(orig, cat, rows, pooling);
        case Code::kCatD: return fit_catD(orig, cat, rows, y_sub, pooling);
        default: throw Error("fit_spec_on_rows: unsupported code");
    }
}

std::vector<double> outcome_indicator(const Frame& frame, const std::string& outcome_name,
                                      const std::string& target_level) {
    const Column& col = frame.column(outcome_name);
    std::vector<double> ind(frame.nrows(), 0.0);
    if (const auto* cat = std::get_if<CategoricalColumn>(&col)) {
        for (std::size_t r = 0; r < cat->size(); ++r) {
            if (!cat->is_missing(r) && cat->level_at(r) == target_level) ind[r] = 1.0;
        }
    } else {
        const auto& num = std::get<NumericColumn>(col);
        if (num.any_bad()) {
            throw Error("design: outcome '" + outcome_name + "' has missing or non-finite values");
        }
        double target = 0.0;
        const char* first = target_level.data();
        const char* last = first + target_level.size();
        auto [ptr, ec] = std::from_chars(first, last, target);
        if (ec != std::errc() || ptr != last) {
            throw Error("design: target level '" + target_level +
                        "' is not comparable to numeric outcome '" + outcome_name + "'");
        }
        for (std::size_t r = 0; r < num.size(); ++r) {
            if (num.values[r] == target) ind[r] = 1.0;
        }
    }
    double pos = 0.0;
    for (const double v : ind) pos += v;
    if (pos == 0.0) throw Error("design: target level '" + target_level + "' never occurs");
    if (pos == static_cast<double>(ind.size())) {
        throw Error("design: target level '" + target_level + "' always occurs");
    }
    return ind;
}

TreatmentPlan design_treatments_n(const Frame& frame, const std::vector<std::string>& varlist,
                                  const std::string& outcome_name, const DesignControls& controls,
                                  std::uint64_t seed) {
    validate_varlist(frame, varlist, outcome_name);
    const std::vector<double> y = numeric_outcome(frame, outcome_name);
    return run_design(frame, varlist, Task::kNumeric, outcome_name, "", y, controls, seed);
}

TreatmentPlan design_treatments_c(const Frame& frame, const std::vector<std::string>& varlist,
                                  const std::string& outcome_name, const std::string& target_level,
                                  const DesignControls& controls, std::uint64_t seed) {
    validate_varlist(frame, varlist, outcome_name);
    const std::vector<double> y = outcome_indicator(frame, outcome_name, target_level);
    return run_design(frame, varlist, Task::kBinomial, outcome_name, target_level, y, controls,
                      seed);
}

TreatmentPlan design_treatments_z(const Frame& frame, const std::vector<std::string>& varlist,
                                  const DesignControls& controls) {
    if (varlist.empty()) throw Error("design: empty variable list");
    validate_varlist(frame, varlist, "");
    return run_design(frame, varlist, Task::kNoTarget, "", "", {}, controls, 0);
}

}  // namespace treatkit
