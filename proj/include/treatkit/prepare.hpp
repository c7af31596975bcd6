#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treatkit/design.hpp"
#include "treatkit/frame.hpp"

namespace treatkit {

struct PrepareOptions {
    std::optional<double> prune_sig = std::nullopt;        // keep sig < prune_sig (strict)
    std::optional<std::vector<std::string>> var_restriction = std::nullopt;
    bool scale = false;                                    // rescale to y-units
};

// Applies a treatment plan to any frame holding the original input columns of
// the surviving derived variables. Output columns follow scoreFrame order,
// are all numeric and finite, and the outcome column is copied through last
// when present. Novel categorical levels and bad numeric cells encode per the
// plan, never as errors.
Frame prepare(const TreatmentPlan& plan, const Frame& frame, const PrepareOptions& options = {});

// Indexes (into plan.specs/score_frame) of the variables surviving pruning
// and restriction; shared by prepare and the cross-frame assembly.
std::vector<std::size_t> surviving_specs(const TreatmentPlan& plan, const PrepareOptions& options);

}  // namespace treatkit
