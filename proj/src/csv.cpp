#include "treatkit/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace treatkit {

namespace {

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // unquoted cell text
};

// One pass through the byte stream handling quoting, CRLF and a trailing
// line without newline. Raggedness is reported with the 1-based data row.
RawTable parse_csv(const std::string& text) {
    RawTable table;
    std::vector<std::string> record;
    std::string cell;
    bool in_quotes = false;
    bool cell_started = false;
    bool record_started = false;

    std::size_t i = 0;
    // UTF-8 BOM
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

    auto end_cell = [&] {
        record.push_back(std::move(cell));
        cell.clear();
        cell_started = false;
    };
    auto end_record = [&] {
        end_cell();
        if (table.header.empty()) {
            table.header = std::move(record);
        } else {
            if (record.size() != table.header.size()) {
                throw Error("csv: row " + std::to_string(table.rows.size() + 1) + " has " +
                            std::to_string(record.size()) + " fields, expected " +
                            std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(record));
        }
        record.clear();
        record_started = false;
    };

    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!cell_started || cell.empty()) {
                    in_quotes = true;
                    cell_started = true;
                    record_started = true;
                } else {
                    cell.push_back(c);  // stray quote mid-cell, keep verbatim
                }
                break;
            case ',':
                end_cell();
                record_started = true;
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                end_record();
                break;
            case '\n':
                end_record();
                break;
            default:
                cell.push_back(c);
                cell_started = true;
                record_started = true;
        }
    }
    if (in_quotes) throw Error("csv: unterminated quoted field");
    if (record_started || cell_started || !record.empty()) end_record();

    if (table.header.empty()) throw Error("csv: missing header row");
    return table;
}

bool parse_number(const std::string& raw, double& out) {
    std::size_t b = raw.find_first_not_of(" \t");
    if (b == std::string::npos) return false;
    std::size_t e = raw.find_last_not_of(" \t") + 1;
    const char* first = raw.data() + b;
    const char* last = raw.data() + e;
    if (first < last && *first == '+') ++first;  // from_chars rejects leading '+'
    if (first == last) return false;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

Frame build_frame(const RawTable& table, const Schema& schema) {
    std::unordered_set<std::string> seen;
    for (const auto& name : table.header) {
        if (name.empty()) throw Error("csv: empty column name in header");
        if (!seen.insert(name).second) throw Error("csv: duplicate header name '" + name + "'");
    }

    Frame frame(table.rows.size());
    const std::size_t nrows = table.rows.size();

    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const std::string& name = table.header[c];
        const auto& missing = schema.missing_tokens_for(name);
        auto is_missing_token = [&](const std::string& s) {
            return std::find(missing.begin(), missing.end(), s) != missing.end();
        };
        const auto declared = schema.kind_for(name);

        bool numeric_ok = true;
        std::vector<double> parsed(nrows, 0.0);
        std::vector<bool> parse_bad(nrows, false);
        for (std::size_t r = 0; r < nrows; ++r) {
            const std::string& cell = table.rows[r][c];
            if (is_missing_token(cell)) {
                parse_bad[r] = true;
                continue;
            }
            double v = 0.0;
            if (!parse_number(cell, v)) {
                numeric_ok = false;
                if (declared == Schema::Kind::kNumeric) {
                    throw Error("csv: column '" + name + "' declared numeric but row " +
                                std::to_string(r + 1) + " holds '" + cell + "'");
                }
                break;
            }
            if (!std::isfinite(v)) {
                parse_bad[r] = true;  // Inf/-Inf/NaN are numeric-class but bad
            } else {
                parsed[r] = v;
            }
        }

        const bool make_numeric =
            declared ? (*declared == Schema::Kind::kNumeric) : numeric_ok;
        if (make_numeric) {
            NumericColumn col;
            col.values = std::move(parsed);
            col.bad_mask = std::move(parse_bad);
            for (std::size_t r = 0; r < nrows; ++r) {
                if (col.bad_mask[r]) col.values[r] = 0.0;
            }
            frame.add_column(name, std::move(col));
        } else {
            CategoricalColumn col;
            col.codes.resize(nrows);
            std::unordered_map<std::string, std::int32_t> index;
            for (std::size_t r = 0; r < nrows; ++r) {
                const std::string& cell = table.rows[r][c];
                col.codes[r] = is_missing_token(cell) ? CategoricalColumn::kMissingCode
                                                      : col.intern(cell, index);
            }
            frame.add_column(name, std::move(col));
        }
    }
    return frame;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Frame read_csv_text(const std::string& text, const Schema& schema) {
    return build_frame(parse_csv(text), schema);
}

Frame read_csv(const std::string& path, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("csv: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_csv_text(buf.str(), schema);
}

std::string write_csv_text(const Frame& frame) {
    std::string out;
    for (std::size_t c = 0; c < frame.ncols(); ++c) {
        if (c) out.push_back(',');
        out += quote_if_needed(frame.name(c));
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < frame.nrows(); ++r) {
        for (std::size_t c = 0; c < frame.ncols(); ++c) {
            if (c) out.push_back(',');
            const Column& col = frame.column(c);
            if (const auto* num = std::get_if<NumericColumn>(&col)) {
                out += num->bad_mask[r] ? "NA" : format_double(num->values[r]);
            } else {
                const auto& cat = std::get<CategoricalColumn>(col);
                out += cat.is_missing(r) ? "NA" : quote_if_needed(cat.level_at(r));
            }
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv(const Frame& frame, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("csv: cannot write '" + path + "'");
    out << write_csv_text(frame);
    if (!out) throw Error("csv: write failed for '" + path + "'");
}

Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("schema: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("schema: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error("schema: top level must be an object");

    Schema schema;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        Schema::ColumnSpec spec;
        const auto& entry = it.value();
        if (!entry.is_object()) throw Error("schema: entry for '" + it.key() + "' must be an object");
        if (entry.contains("kind")) {
            const std::string kind = entry["kind"].get<std::string>();
            if (kind == "numeric") spec.kind = Schema::Kind::kNumeric;
            else if (kind == "categorical") spec.kind = Schema::Kind::kCategorical;
            else throw Error("schema: unknown kind '" + kind + "' for column '" + it.key() + "'");
        }
        if (entry.contains("missing_tokens")) {
            spec.missing_tokens = entry["missing_tokens"].get<std::vector<std::string>>();
        }
        schema.columns.emplace(it.key(), std::move(spec));
    }
    return schema;
}

}  // namespace treatkit
