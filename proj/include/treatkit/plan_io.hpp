#pragma once

#include <string>

#include "treatkit/design.hpp"

namespace treatkit {

// Treatment plans persist as a single JSON document with a fixed field order,
// floats at 17 significant digits, and a trailing FNV-1a content hash, so a
// plan saved twice from the same design is byte-identical and any corruption
// is caught at load. Unknown fields or a different format version are errors.
std::string plan_to_json(const TreatmentPlan& plan);
TreatmentPlan plan_from_json(const std::string& text);

void save_plan(const TreatmentPlan& plan, const std::string& path);
TreatmentPlan load_plan(const std::string& path);

}  // namespace treatkit
