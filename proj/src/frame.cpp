#include "treatkit/frame.hpp"

#include <algorithm>
#include <cmath>

namespace treatkit {

bool NumericColumn::any_bad() const {
    return std::find(bad_mask.begin(), bad_mask.end(), true) != bad_mask.end();
}

bool NumericColumn::all_bad() const {
    return std::find(bad_mask.begin(), bad_mask.end(), false) == bad_mask.end();
}

NumericStats column_stats(const NumericColumn& col) {
    NumericStats st;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < col.values.size(); ++i) {
        if (col.bad_mask[i]) {
            ++st.bad_count;
        } else {
            sum += col.values[i];
            ++n;
        }
    }
    if (n == 0) {
        st.all_bad = true;
        st.mean = 0.0;
    } else {
        st.mean = sum / static_cast<double>(n);
    }
    return st;
}

std::int32_t CategoricalColumn::intern(const std::string& level,
                                       std::unordered_map<std::string, std::int32_t>& index) {
    auto it = index.find(level);
    if (it != index.end()) return it->second;
    const auto code = static_cast<std::int32_t>(levels.size());
    levels.push_back(level);
    index.emplace(level, code);
    return code;
}

void Frame::add_column(std::string name, Column col) {
    if (name.empty()) throw Error("frame: column names must be nonempty");
    if (index_.count(name)) throw Error("frame: duplicate column name '" + name + "'");

    const std::size_t len = std::visit([](const auto& c) { return c.size(); }, col);
    if (const auto* num = std::get_if<NumericColumn>(&col)) {
        if (num->values.size() != num->bad_mask.size()) {
            throw Error("frame: numeric column '" + name + "' has mismatched mask length");
        }
        for (std::size_t i = 0; i < num->values.size(); ++i) {
            if (!num->bad_mask[i] && !std::isfinite(num->values[i])) {
                throw Error("frame: unmasked non-finite value in column '" + name + "'");
            }
        }
    } else {
        const auto& cat = std::get<CategoricalColumn>(col);
        for (const auto code : cat.codes) {
            if (code != CategoricalColumn::kMissingCode &&
                (code < 0 || static_cast<std::size_t>(code) >= cat.levels.size())) {
                throw Error("frame: invalid level code in column '" + name + "'");
            }
        }
    }

    if (!has_rows_) {
        nrows_ = len;
        has_rows_ = true;
    } else if (len != nrows_) {
        throw Error("frame: column '" + name + "' has " + std::to_string(len) +
                    " rows, expected " + std::to_string(nrows_));
    }

    index_.emplace(name, columns_.size());
    names_.push_back(std::move(name));
    columns_.push_back(std::move(col));
}

bool Frame::has_column(const std::string& name) const { return index_.count(name) != 0; }

const Column& Frame::column(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("frame: no column named '" + name + "'");
    return columns_[it->second];
}

const std::vector<std::string>& Schema::missing_tokens_for(const std::string& col) const {
    auto it = columns.find(col);
    if (it != columns.end() && it->second.missing_tokens) return *it->second.missing_tokens;
    return default_missing_tokens;
}

std::optional<Schema::Kind> Schema::kind_for(const std::string& col) const {
    auto it = columns.find(col);
    if (it != columns.end()) return it->second.kind;
    return std::nullopt;
}

}  // namespace treatkit
