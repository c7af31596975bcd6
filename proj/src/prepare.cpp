#include "treatkit/prepare.hpp"

#include <unordered_set>

namespace treatkit {

std::vector<std::size_t> surviving_specs(const TreatmentPlan& plan, const PrepareOptions& options) {
    std::unordered_set<std::string> restriction;
    if (options.var_restriction) {
        std::unordered_set<std::string> known;
        for (const auto& row : plan.score_frame) known.insert(row.var_name);
        for (const auto& name : *options.var_restriction) {
            if (!known.count(name)) {
                throw Error("prepare: variable restriction names unknown variable '" + name + "'");
            }
            restriction.insert(name);
        }
    }
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < plan.score_frame.size(); ++i) {
        const auto& row = plan.score_frame[i];
        if (options.prune_sig && !(row.sig < *options.prune_sig)) continue;
        if (options.var_restriction && !restriction.count(row.var_name)) continue;
        kept.push_back(i);
    }
    return kept;
}

Frame prepare(const TreatmentPlan& plan, const Frame& frame, const PrepareOptions& options) {
    if (options.scale && plan.task == Task::kNoTarget) {
        throw Error("prepare: scaling requires a plan with an outcome");
    }
    const std::vector<std::size_t> kept = surviving_specs(plan, options);

    // check the original columns the surviving specs need (type errors surface
    // inside apply_spec with the column named)
    for (const std::size_t i : kept) {
        const std::string& orig = plan.score_frame[i].orig_name;
        if (!frame.has_column(orig)) {
            throw Error("prepare: input frame lacks required column '" + orig + "'");
        }
    }

    Frame out(frame.nrows());
    for (const std::size_t i : kept) {
        std::vector<double> encoded = apply_spec(plan.specs[i], frame.column(plan.score_frame[i].orig_name));
        if (options.scale) {
            const ScalingEntry& sc = plan.scaling[i];
            for (double& v : encoded) v = sc.slope * (v - sc.center);
        }
        NumericColumn col;
        col.bad_mask.assign(encoded.size(), false);
        col.values = std::move(encoded);
        out.add_column(plan.score_frame[i].var_name, std::move(col));
    }
    if (!plan.outcome_name.empty() && frame.has_column(plan.outcome_name)) {
        out.add_column(plan.outcome_name, frame.column(plan.outcome_name));
    }
    return out;
}

}  // namespace treatkit
