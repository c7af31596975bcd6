#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treatkit/encoders.hpp"
#include "treatkit/frame.hpp"
#include "treatkit/significance.hpp"
#include "treatkit/splits.hpp"

namespace treatkit {

enum class Task { kNumeric, kBinomial, kNoTarget };

const char* task_name(Task task);
Task task_from_name(const std::string& name);

// Rare-level and smoothing controls. One setting drives the whole design.
struct DesignControls {
    double min_fraction = 0.02;          // level frequency needed for an indicator
    int rare_count = 0;                  // pool levels occurring at most this often (0 = off)
    std::optional<double> rare_sig = std::nullopt;  // pooled-indicator test threshold (off by default)
    double sm_factor = 0.0;              // pseudo-observations for impact-code smoothing
    double cat_b_epsilon = 1e-4;         // Laplace floor for the catB rates
    int ncross = 3;                      // folds for cross-frames and complex-variable scoring
    int workers = 1;                     // design-phase thread pool size
};

struct ScoreFrameRow {
    std::string var_name;
    double sig = 1.0;
    int extra_model_degrees = 0;
    std::string orig_name;
    Code code = Code::kClean;
};

// Per derived variable: y-unit scaling computed on the design data,
// x -> slope * (x - center).
struct ScalingEntry {
    double slope = 0.0;
    double center = 0.0;
};

struct TreatmentPlan {
    int format_version = 1;
    Task task = Task::kNumeric;
    std::string outcome_name;
    std::string target_level;  // binomial only
    double mean_y = 0.0;       // numeric task
    double grand_rate = 0.0;   // binomial task
    DesignControls controls;
    std::vector<VarSpec> specs;              // aligned with score_frame
    std::vector<ScoreFrameRow> score_frame;  // one row per surviving derived variable
    std::vector<ScalingEntry> scaling;       // aligned with specs; empty for no-target plans
};

// designTreatments* family. Every derived variable whose training-time output
// is constant is suppressed; remaining variables are scored (simple variables
// naively, complex ones out-of-sample) and assembled in varlist order.
TreatmentPlan design_treatments_n(const Frame& frame, const std::vector<std::string>& varlist,
                                  const std::string& outcome_name, const DesignControls& controls,
                                  std::uint64_t seed);

TreatmentPlan design_treatments_c(const Frame& frame, const std::vector<std::string>& varlist,
                                  const std::string& outcome_name, const std::string& target_level,
                                  const DesignControls& controls, std::uint64_t seed);

TreatmentPlan design_treatments_z(const Frame& frame, const std::vector<std::string>& varlist,
                                  const DesignControls& controls);

// 0/1 indicator of outcome == target level; accepts categorical outcomes and
// numeric ones (the target level is then parsed as a number). Errors when the
// target never occurs or always occurs.
std::vector<double> outcome_indicator(const Frame& frame, const std::string& outcome_name,
                                      const std::string& target_level);

// Internal entry point shared with the cross-frame module: fit one spec type
// on a row subset with design-time pooling semantics.
VarSpec fit_spec_on_rows(Code code, const std::string& orig, const Column& col,
                         std::span<const std::size_t> rows, std::span<const double> y,
                         const DesignControls& controls, Task task);

}  // namespace treatkit
