#include "treatkit/crossframe.hpp"

#include <algorithm>

namespace treatkit {

namespace {

CrossFrameResult build_cross_frame(const Frame& frame, TreatmentPlan plan,
                                   std::span<const double> y,
                                   const std::optional<SplitPlan>& user_plan, std::uint64_t seed) {
    const std::size_t n = frame.nrows();
    CrossFrameResult result;
    if (user_plan) {
        validate_split_plan(*user_plan, n, /*require_partition=*/false);
        result.eval_sets = *user_plan;
    } else {
        result.eval_sets =
            default_split_plan(n, static_cast<std::size_t>(plan.controls.ncross), y, seed);
    }
    result.method = result.eval_sets.method;

    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;

    Frame cf(n);
    for (std::size_t i = 0; i < plan.specs.size(); ++i) {
        const auto& row_meta = plan.score_frame[i];
        const Column& col = frame.column(row_meta.orig_name);
        std::vector<double> values;
        if (row_meta.extra_model_degrees > 0) {
            // complex variable: encode fold-wise; rows no fold covers (possible
            // only with user plans) keep the all-rows encoding
            values = apply_spec(plan.specs[i], col, rows);
            for (const auto& fold : result.eval_sets.folds) {
                const VarSpec fold_spec =
                    fit_spec_on_rows(row_meta.code, row_meta.orig_name, col, fold.train, y,
                                     plan.controls, plan.task);
                const std::vector<double> fold_vals = apply_spec(fold_spec, col, fold.app);
                for (std::size_t j = 0; j < fold.app.size(); ++j) {
                    values[fold.app[j]] = fold_vals[j];
                }
            }
        } else {
            values = apply_spec(plan.specs[i], col, rows);
        }
        NumericColumn out_col;
        out_col.bad_mask.assign(n, false);
        out_col.values = std::move(values);
        cf.add_column(row_meta.var_name, std::move(out_col));
    }
    cf.add_column(plan.outcome_name, frame.column(plan.outcome_name));

    result.cross_frame = std::move(cf);
    result.treatments = std::move(plan);
    return result;
}

}  // namespace

CrossFrameResult mk_cross_frame_n(const Frame& frame, const std::vector<std::string>& varlist,
                                  const std::string& outcome_name, const DesignControls& controls,
                                  const std::optional<SplitPlan>& split_plan, std::uint64_t seed) {
    TreatmentPlan plan = design_treatments_n(frame, varlist, outcome_name, controls, seed);
    const auto& outcome = std::get<NumericColumn>(frame.column(outcome_name));
    return build_cross_frame(frame, std::move(plan), outcome.values, split_plan, seed);
}

CrossFrameResult mk_cross_frame_c(const Frame& frame, const std::vector<std::string>& varlist,
                                  const std::string& outcome_name, const std::string& target_level,
                                  const DesignControls& controls,
                                  const std::optional<SplitPlan>& split_plan, std::uint64_t seed) {
    TreatmentPlan plan =
        design_treatments_c(frame, varlist, outcome_name, target_level, controls, seed);
    const std::vector<double> y = outcome_indicator(frame, outcome_name, target_level);
    return build_cross_frame(frame, std::move(plan), y, split_plan, seed);
}

}  // namespace treatkit
