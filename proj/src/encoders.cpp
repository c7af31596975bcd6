#include "treatkit/encoders.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace treatkit {

namespace {

// Pooled pseudo-level key used internally while collecting statistics. Keys
// for real levels are their strings; MISSING and the pool get sentinels that
// cannot collide because they are tracked out-of-band.
constexpr int kKeyMissing = -2;
constexpr int kKeyPooled = -3;

// Per effective level: rows grouped under dictionary code, kKeyMissing, or kKeyPooled.
struct LevelGroups {
    // parallel arrays: key (code or sentinel), count, y-sum, rows
    std::vector<int> keys;
    std::vector<std::size_t> counts;
    std::vector<double> y_sums;
    std::vector<std::vector<std::size_t>> rows;
    std::size_t total = 0;

    int find(int key) const {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (keys[i] == key) return static_cast<int>(i);
        }
        return -1;
    }
};

int effective_key(const CategoricalColumn& col, std::size_t row, const LevelPooling& pooling) {
    if (col.is_missing(row)) {
        return (pooling.active && pooling.missing_pooled) ? kKeyPooled : kKeyMissing;
    }
    if (pooling.active && pooling.members.count(col.level_at(row))) return kKeyPooled;
    return col.codes[row];
}

LevelGroups group_levels(const CategoricalColumn& col, std::span<const std::size_t> rows,
                         std::span<const double> y, const LevelPooling& pooling, bool keep_rows) {
    LevelGroups g;
    std::unordered_map<int, std::size_t> slot;
    for (const std::size_t r : rows) {
        const int key = effective_key(col, r, pooling);
        auto [it, inserted] = slot.emplace(key, g.keys.size());
        if (inserted) {
            g.keys.push_back(key);
            g.counts.push_back(0);
            g.y_sums.push_back(0.0);
            if (keep_rows) g.rows.emplace_back();
        }
        const std::size_t i = it->second;
        ++g.counts[i];
        if (!y.empty()) g.y_sums[i] += y[r];
        if (keep_rows) g.rows[i].push_back(r);
        ++g.total;
    }
    return g;
}

// Writes one (effective level -> value) entry into the map.
void map_insert(LevelValueMap& map, const CategoricalColumn& col, int key, double value,
                const LevelPooling& pooling) {
    if (key == kKeyMissing) {
        map.has_missing = true;
        map.missing_value = value;
    } else if (key == kKeyPooled) {
        map.novel_value = value;  // novel levels are re-coded as the pool
        for (const auto& member : pooling.members) map.by_level.emplace(member, value);
        if (pooling.missing_pooled) {
            map.has_missing = true;
            map.missing_value = value;
        }
    } else {
        map.by_level.emplace(col.levels[key], value);
    }
}

}  // namespace

const char* code_name(Code code) {
    switch (code) {
        case Code::kClean: return "clean";
        case Code::kIsBad: return "isBAD";
        case Code::kLev: return "lev";
        case Code::kCatN: return "catN";
        case Code::kCatB: return "catB";
        case Code::kCatP: return "catP";
        case Code::kCatD: return "catD";
    }
    return "?";
}

Code code_from_name(const std::string& name) {
    if (name == "clean") return Code::kClean;
    if (name == "isBAD") return Code::kIsBad;
    if (name == "lev") return Code::kLev;
    if (name == "catN") return Code::kCatN;
    if (name == "catB") return Code::kCatB;
    if (name == "catP") return Code::kCatP;
    if (name == "catD") return Code::kCatD;
    throw Error("unknown variable code '" + name + "'");
}

std::string mangle_level(const std::string& level) {
    std::string out = level;
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '.';
    }
    return out;
}

Code spec_code(const VarSpec& spec) {
    struct Visitor {
        Code operator()(const CleanSpec&) const { return Code::kClean; }
        Code operator()(const IsBadSpec&) const { return Code::kIsBad; }
        Code operator()(const LevSpec&) const { return Code::kLev; }
        Code operator()(const CatNSpec&) const { return Code::kCatN; }
        Code operator()(const CatBSpec&) const { return Code::kCatB; }
        Code operator()(const CatPSpec&) const { return Code::kCatP; }
        Code operator()(const CatDSpec&) const { return Code::kCatD; }
    };
    return std::visit(Visitor{}, spec);
}

const std::string& spec_var_name(const VarSpec& spec) {
    return std::visit([](const auto& s) -> const std::string& { return s.var_name; }, spec);
}

const std::string& spec_orig_name(const VarSpec& spec) {
    return std::visit([](const auto& s) -> const std::string& { return s.orig_name; }, spec);
}

CleanSpec fit_clean(const std::string& orig, const NumericColumn& col,
                    std::span<const std::size_t> rows) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const std::size_t r : rows) {
        if (!col.bad_mask[r]) {
            sum += col.values[r];
            ++n;
        }
    }
    // all-masked: fill 0; the derived column is then constant and the design
    // layer suppresses it
    return CleanSpec{orig, orig + "_clean", n ? sum / static_cast<double>(n) : 0.0};
}

IsBadSpec fit_isbad(const std::string& orig) { return IsBadSpec{orig, orig + "_isBAD"}; }

std::vector<LevSpec> fit_levs(const std::string& orig, const CategoricalColumn& col,
                              std::span<const std::size_t> rows, double min_fraction,
                              const LevelPooling& pooling) {
    const LevelGroups g = group_levels(col, rows, {}, pooling, false);
    std::vector<LevSpec> specs;
    for (std::size_t i = 0; i < g.keys.size(); ++i) {
        const int key = g.keys[i];
        const double freq = static_cast<double>(g.counts[i]) / static_cast<double>(g.total);
        if (key == kKeyPooled) {
            LevSpec spec;
            spec.orig_name = orig;
            spec.var_name = orig + "_lev_rare";
            spec.kind = LevSpec::Kind::kPooled;
            spec.pooled_members = pooling.members;
            spec.pooled_includes_missing = pooling.missing_pooled;
            for (std::size_t j = 0; j < g.keys.size(); ++j) {
                if (g.keys[j] >= 0) spec.known_levels.insert(col.levels[g.keys[j]]);
            }
            spec.missing_known = g.find(kKeyMissing) >= 0;
            specs.push_back(std::move(spec));
        } else if (freq >= min_fraction) {
            LevSpec spec;
            spec.orig_name = orig;
            if (key == kKeyMissing) {
                spec.var_name = orig + "_lev_NA";
                spec.kind = LevSpec::Kind::kMissing;
            } else {
                spec.level = col.levels[key];
                spec.var_name = orig + "_lev_x." + mangle_level(spec.level);
                spec.kind = LevSpec::Kind::kLevel;
            }
            specs.push_back(std::move(spec));
        }
    }
    std::sort(specs.begin(), specs.end(),
              [](const LevSpec& a, const LevSpec& b) { return a.var_name < b.var_name; });
    return specs;
}

CatNSpec fit_catN(const std::string& orig, const CategoricalColumn& col,
                  std::span<const std::size_t> rows, std::span<const double> y, double sm_factor,
                  const LevelPooling& pooling) {
    const LevelGroups g = group_levels(col, rows, y, pooling, false);
    double grand = 0.0;
    for (const double s : g.y_sums) grand += s;
    grand /= static_cast<double>(g.total);

    CatNSpec spec{orig, orig + "_catN", {}, grand};
    for (std::size_t i = 0; i < g.keys.size(); ++i) {
        const double delta = (g.y_sums[i] + sm_factor * grand) /
                                 (static_cast<double>(g.counts[i]) + sm_factor) -
                             grand;
        map_insert(spec.map, col, g.keys[i], delta, pooling);
    }
    return spec;
}

CatBSpec fit_catB(const std::string& orig, const CategoricalColumn& col,
                  std::span<const std::size_t> rows, std::span<const double> y_ind,
                  double epsilon, double sm_factor, const LevelPooling& pooling) {
    const LevelGroups g = group_levels(col, rows, y_ind, pooling, false);
    double pos = 0.0;
    for (const double s : g.y_sums) pos += s;
    const double n = static_cast<double>(g.total);
    const double grand_rate = pos / n;
    // the grand logit carries the same epsilon smoothing as the levels
    const double grand_smoothed = (pos + epsilon) / (n + 2.0 * epsilon);
    const double grand_logit = std::log(grand_smoothed / (1.0 - grand_smoothed));

    CatBSpec spec{orig, orig + "_catB", {}, grand_rate, epsilon};
    for (std::size_t i = 0; i < g.keys.size(); ++i) {
        const double cnt = static_cast<double>(g.counts[i]);
        const double rate =
            (g.y_sums[i] + epsilon + sm_factor * grand_rate) / (cnt + 2.0 * epsilon + sm_factor);
        const double delta = std::log(rate / (1.0 - rate)) - grand_logit;
        map_insert(spec.map, col, g.keys[i], delta, pooling);
    }
    return spec;
}

CatPSpec fit_catP(const std::string& orig, const CategoricalColumn& col,
                  std::span<const std::size_t> rows, const LevelPooling& pooling) {
    const LevelGroups g = group_levels(col, rows, {}, pooling, false);
    CatPSpec spec{orig, orig + "_catP", {}};
    for (std::size_t i = 0; i < g.keys.size(); ++i) {
        map_insert(spec.map, col, g.keys[i],
                   static_cast<double>(g.counts[i]) / static_cast<double>(g.total), pooling);
    }
    return spec;
}

CatDSpec fit_catD(const std::string& orig, const CategoricalColumn& col,
                  std::span<const std::size_t> rows, std::span<const double> y,
                  const LevelPooling& pooling) {
    const LevelGroups g = group_levels(col, rows, y, pooling, true);

    // per-level sample standard deviations (n >= 2)
    std::vector<double> sds(g.keys.size(), -1.0);
    double max_sd = -1.0;
    for (std::size_t i = 0; i < g.keys.size(); ++i) {
        if (g.counts[i] < 2) continue;
        const double mean = g.y_sums[i] / static_cast<double>(g.counts[i]);
        double ss = 0.0;
        for (const std::size_t r : g.rows[i]) ss += (y[r] - mean) * (y[r] - mean);
        sds[i] = std::sqrt(ss / static_cast<double>(g.counts[i] - 1));
        max_sd = std::max(max_sd, sds[i]);
    }
    double fallback;
    if (max_sd >= 0.0) {
        fallback = max_sd;
    } else if (g.total >= 2) {
        // no level has two rows: grand deviation of y
        double mean = 0.0;
        for (const std::size_t r : rows) mean += y[r];
        mean /= static_cast<double>(g.total);
        double ss = 0.0;
        for (const std::size_t r : rows) ss += (y[r] - mean) * (y[r] - mean);
        fallback = std::sqrt(ss / static_cast<double>(g.total - 1));
    } else {
        fallback = 0.0;
    }

    CatDSpec spec{orig, orig + "_catD", {}, fallback};
    spec.map.novel_value = fallback;
    for (std::size_t i = 0; i < g.keys.size(); ++i) {
        map_insert(spec.map, col, g.keys[i], sds[i] >= 0.0 ? sds[i] : fallback, pooling);
    }
    return spec;
}

namespace {

const CategoricalColumn& as_categorical(const Column& col, const std::string& orig) {
    if (const auto* cat = std::get_if<CategoricalColumn>(&col)) return *cat;
    throw Error("apply: column '" + orig + "' is numeric but a categorical treatment was designed");
}

const NumericColumn& as_numeric(const Column& col, const std::string& orig) {
    if (const auto* num = std::get_if<NumericColumn>(&col)) return *num;
    throw Error("apply: column '" + orig + "' is categorical but a numeric treatment was designed");
}

struct ApplyVisitor {
    const Column& col;
    std::span<const std::size_t> rows;

    std::vector<double> operator()(const CleanSpec& s) const {
        const auto& num = as_numeric(col, s.orig_name);
        std::vector<double> out(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::size_t r = rows[i];
            out[i] = num.bad_mask[r] ? s.fill_value : num.values[r];
        }
        return out;
    }
    std::vector<double> operator()(const IsBadSpec& s) const {
        const auto& num = as_numeric(col, s.orig_name);
        std::vector<double> out(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out[i] = num.bad_mask[rows[i]] ? 1.0 : 0.0;
        }
        return out;
    }
    std::vector<double> operator()(const LevSpec& s) const {
        const auto& cat = as_categorical(col, s.orig_name);
        std::vector<double> out(rows.size(), 0.0);
        switch (s.kind) {
            case LevSpec::Kind::kLevel:
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    const std::size_t r = rows[i];
                    if (!cat.is_missing(r) && cat.level_at(r) == s.level) out[i] = 1.0;
                }
                break;
            case LevSpec::Kind::kMissing:
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    if (cat.is_missing(rows[i])) out[i] = 1.0;
                }
                break;
            case LevSpec::Kind::kPooled:
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    const std::size_t r = rows[i];
                    if (cat.is_missing(r)) {
                        // pooled missing, or missing never seen at design (novel)
                        out[i] = (s.pooled_includes_missing || !s.missing_known) ? 1.0 : 0.0;
                    } else {
                        const std::string& lv = cat.level_at(r);
                        if (s.pooled_members.count(lv)) out[i] = 1.0;
                        else if (!s.known_levels.count(lv)) out[i] = 1.0;  // novel -> pool
                    }
                }
                break;
        }
        return out;
    }
    template <typename MapSpec>
    std::vector<double> map_apply(const MapSpec& s) const {
        const auto& cat = as_categorical(col, s.orig_name);
        // resolve each dictionary entry once, then stream the rows
        std::vector<double> resolved(cat.levels.size());
        for (std::size_t c = 0; c < cat.levels.size(); ++c) {
            auto it = s.map.by_level.find(cat.levels[c]);
            resolved[c] = it == s.map.by_level.end() ? s.map.novel_value : it->second;
        }
        const double for_missing = s.map.has_missing ? s.map.missing_value : s.map.novel_value;
        std::vector<double> out(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto code = cat.codes[rows[i]];
            out[i] = code == CategoricalColumn::kMissingCode ? for_missing : resolved[code];
        }
        return out;
    }
    std::vector<double> operator()(const CatNSpec& s) const { return map_apply(s); }
    std::vector<double> operator()(const CatBSpec& s) const { return map_apply(s); }
    std::vector<double> operator()(const CatPSpec& s) const { return map_apply(s); }
    std::vector<double> operator()(const CatDSpec& s) const { return map_apply(s); }
};

}  // namespace

std::vector<double> apply_spec(const VarSpec& spec, const Column& col,
                               std::span<const std::size_t> rows) {
    return std::visit(ApplyVisitor{col, rows}, spec);
}

std::vector<double> apply_spec(const VarSpec& spec, const Column& col) {
    const std::size_t n = std::visit([](const auto& c) { return c.size(); }, col);
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    return apply_spec(spec, col, rows);
}

int observed_effective_levels(const CategoricalColumn& col, std::span<const std::size_t> rows,
                              const LevelPooling& pooling) {
    const LevelGroups g = group_levels(col, rows, {}, pooling, false);
    return static_cast<int>(g.keys.size());
}

}  // namespace treatkit
