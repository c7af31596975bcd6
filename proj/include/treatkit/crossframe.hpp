#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treatkit/design.hpp"
#include "treatkit/frame.hpp"
#include "treatkit/splits.hpp"

namespace treatkit {

// Treatment plan fit on all rows plus a simulated out-of-sample training
// frame: every complex derived cell of row r was produced by an encoder fit
// on a train set excluding r, which is what future application data will see.
struct CrossFrameResult {
    TreatmentPlan treatments;
    Frame cross_frame;
    std::string method;
    SplitPlan eval_sets;
};

CrossFrameResult mk_cross_frame_n(const Frame& frame, const std::vector<std::string>& varlist,
                                  const std::string& outcome_name, const DesignControls& controls,
                                  const std::optional<SplitPlan>& split_plan, std::uint64_t seed);

CrossFrameResult mk_cross_frame_c(const Frame& frame, const std::vector<std::string>& varlist,
                                  const std::string& outcome_name, const std::string& target_level,
                                  const DesignControls& controls,
                                  const std::optional<SplitPlan>& split_plan, std::uint64_t seed);

}  // namespace treatkit
