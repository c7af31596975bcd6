#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "treatkit/frame.hpp"

namespace treatkit {

// Derived-variable transform types.
enum class Code { kClean, kIsBad, kLev, kCatN, kCatB, kCatP, kCatD };

const char* code_name(Code code);
Code code_from_name(const std::string& name);

// Derived-variable name grammar: <orig>_clean, <orig>_isBAD, <orig>_lev_NA,
// <orig>_lev_x.<mangled level>, <orig>_lev_rare, <orig>_catN, ... with every
// non-alphanumeric character of the level mangled to '.'.
std::string mangle_level(const std::string& level);

// Pooling of rare levels decided at design time: the member levels are
// re-coded to one shared pseudo-level before any statistics are collected,
// and novel levels met at apply time map to that pooled level.
struct LevelPooling {
    bool active = false;
    std::unordered_set<std::string> members;
    bool missing_pooled = false;
};

// Replace masked values with the mean of the unmasked training values.
struct CleanSpec {
    std::string orig_name;
    std::string var_name;
    double fill_value = 0.0;
};

// 1 exactly where the value was replaced.
struct IsBadSpec {
    std::string orig_name;
    std::string var_name;
};

// 0/1 indicator for one level, the MISSING level, or the pooled-rare level.
// A pooled indicator also fires for levels never seen at design time.
struct LevSpec {
    enum class Kind { kLevel, kMissing, kPooled };
    std::string orig_name;
    std::string var_name;
    Kind kind = Kind::kLevel;
    std::string level;                                // kLevel only
    std::unordered_set<std::string> pooled_members;   // kPooled only
    bool pooled_includes_missing = false;
    std::unordered_set<std::string> known_levels;     // kPooled: non-pooled design levels
    bool missing_known = false;                       // kPooled: MISSING seen (unpooled) at design
};

// String-keyed value map shared by the cat* specs. Pooled member levels are
// entered individually with the pooled value, so apply needs no pool lookup.
struct LevelValueMap {
    std::unordered_map<std::string, double> by_level;
    bool has_missing = false;
    double missing_value = 0.0;
    double novel_value = 0.0;

    double value_for(const CategoricalColumn& col, std::size_t row) const {
        if (col.is_missing(row)) return has_missing ? missing_value : novel_value;
        auto it = by_level.find(col.level_at(row));
        return it == by_level.end() ? novel_value : it->second;
    }
};

// Numeric-outcome impact code: smoothed conditional mean of y minus the grand mean.
struct CatNSpec {
    std::string orig_name;
    std::string var_name;
    LevelValueMap map;
    double grand_mean = 0.0;
};

// Binomial impact code: delta of logits of the smoothed conditional rate
// against the smoothed grand rate.
struct CatBSpec {
    std::string orig_name;
    std::string var_name;
    LevelValueMap map;
    double grand_rate = 0.0;
    double epsilon = 1e-4;
};

// Level prevalence in the training data.
struct CatPSpec {
    std::string orig_name;
    std::string var_name;
    LevelValueMap map;
};

// Within-level sample standard deviation of y; singleton and novel levels get
// the fallback (largest observed per-level deviation, else the grand deviation).
struct CatDSpec {
    std::string orig_name;
    std::string var_name;
    LevelValueMap map;
    double fallback = 0.0;
};

using VarSpec = std::variant<CleanSpec, IsBadSpec, LevSpec, CatNSpec, CatBSpec, CatPSpec, CatDSpec>;

Code spec_code(const VarSpec& spec);
const std::string& spec_var_name(const VarSpec& spec);
const std::string& spec_orig_name(const VarSpec& spec);

// --- fitting (each over an explicit row subset, so the cross-frame and the
// --- out-of-sample significance paths reuse exactly the design-time code)

CleanSpec fit_clean(const std::string& orig, const NumericColumn& col,
                    std::span<const std::size_t> rows);
IsBadSpec fit_isbad(const std::string& orig);

std::vector<LevSpec> fit_levs(const std::string& orig, const CategoricalColumn& col,
                              std::span<const std::size_t> rows, double min_fraction,
                              const LevelPooling& pooling);

CatNSpec fit_catN(const std::string& orig, const CategoricalColumn& col,
                  std::span<const std::size_t> rows, std::span<const double> y, double sm_factor,
                  const LevelPooling& pooling);

CatBSpec fit_catB(const std::string& orig, const CategoricalColumn& col,
                  std::span<const std::size_t> rows, std::span<const double> y_ind,
                  double epsilon, double sm_factor, const LevelPooling& pooling);

CatPSpec fit_catP(const std::string& orig, const CategoricalColumn& col,
                  std::span<const std::size_t> rows, const LevelPooling& pooling);

CatDSpec fit_catD(const std::string& orig, const CategoricalColumn& col,
                  std::span<const std::size_t> rows, std::span<const double> y,
                  const LevelPooling& pooling);

// --- application

std::vector<double> apply_spec(const VarSpec& spec, const Column& col,
                               std::span<const std::size_t> rows);
std::vector<double> apply_spec(const VarSpec& spec, const Column& col);

// Distinct levels (MISSING and the pooled pseudo-level each count once)
// observed in the row subset; extraModelDegrees for cat* codes is this - 1.
int observed_effective_levels(const CategoricalColumn& col, std::span<const std::size_t> rows,
                              const LevelPooling& pooling);

}  // namespace treatkit
