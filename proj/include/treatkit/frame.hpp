#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace treatkit {

// Single error type for the whole library; messages carry the context.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Numeric column with an explicit bad-value mask. A masked position means the
// original cell was missing, NaN, or infinite; the stored value at a masked
// position is unspecified (kept as 0). Every unmasked value is finite.
struct NumericColumn {
    std::vector<double> values;
    std::vector<bool> bad_mask;

    std::size_t size() const { return values.size(); }
    bool any_bad() const;
    bool all_bad() const;
};

struct NumericStats {
    double mean = 0.0;     // mean of unmasked values; 0 when all masked
    std::size_t bad_count = 0;
    bool all_bad = false;
};

NumericStats column_stats(const NumericColumn& col);

// Dictionary-coded string column. Missing cells carry the distinguished code
// kMissingCode rather than a dictionary slot, so missingness survives every
// dictionary operation; encoders treat it as one more level.
struct CategoricalColumn {
    static constexpr std::int32_t kMissingCode = -1;

    std::vector<std::string> levels;   // distinct observed strings
    std::vector<std::int32_t> codes;   // per row: index into levels, or kMissingCode

    std::size_t size() const { return codes.size(); }
    bool is_missing(std::size_t row) const { return codes[row] == kMissingCode; }
    const std::string& level_at(std::size_t row) const { return levels[codes[row]]; }

    // Interning helper for builders.
    std::int32_t intern(const std::string& level,
                        std::unordered_map<std::string, std::int32_t>& index);
};

using Column = std::variant<NumericColumn, CategoricalColumn>;

inline bool is_numeric(const Column& c) { return std::holds_alternative<NumericColumn>(c); }
inline bool is_categorical(const Column& c) { return std::holds_alternative<CategoricalColumn>(c); }

// Ordered, named collection of equal-length columns. Immutable by convention
// once built; all mutation happens through add_column during construction.
class Frame {
  public:
    Frame() = default;
    explicit Frame(std::size_t nrows) : nrows_(nrows), has_rows_(true) {}

    std::size_t nrows() const { return nrows_; }
    std::size_t ncols() const { return columns_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    void add_column(std::string name, Column col);
    bool has_column(const std::string& name) const;
    const Column& column(const std::string& name) const;
    const Column& column(std::size_t i) const { return columns_[i]; }
    const std::string& name(std::size_t i) const { return names_[i]; }

  private:
    std::vector<std::string> names_;
    std::vector<Column> columns_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t nrows_ = 0;
    bool has_rows_ = false;  // set once the row count is pinned
};

// Declared column kinds and missing-token sets for CSV ingestion.
struct Schema {
    enum class Kind { kNumeric, kCategorical };
    struct ColumnSpec {
        std::optional<Kind> kind;
        std::optional<std::vector<std::string>> missing_tokens;
    };

    std::vector<std::string> default_missing_tokens{"", "NA"};
    std::unordered_map<std::string, ColumnSpec> columns;

    const std::vector<std::string>& missing_tokens_for(const std::string& col) const;
    std::optional<Kind> kind_for(const std::string& col) const;
};

}  // namespace treatkit
