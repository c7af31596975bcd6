#include "treatkit/plan_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "treatkit/csv.hpp"

namespace treatkit {

namespace {

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

// --- writer -----------------------------------------------------------

void write_json_string(std::string& out, const std::string& s) {
    out.push_back('"');
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

void write_number(std::string& out, double v) { out += format_double(v); }

// level/value pairs sorted by level bytes; MISSING and the novel fallback are
// written out-of-band so any level string is representable
void write_map(std::string& out, const LevelValueMap& map) {
    std::map<std::string, double> sorted(map.by_level.begin(), map.by_level.end());
    out += "{\"levels\":[";
    bool first = true;
    for (const auto& [level, value] : sorted) {
        if (!first) out.push_back(',');
        first = false;
        out.push_back('[');
        write_json_string(out, level);
        out.push_back(',');
        write_number(out, value);
        out.push_back(']');
    }
    out += "],\"missing\":";
    if (map.has_missing) write_number(out, map.missing_value);
    else out += "null";
    out += ",\"novel\":";
    write_number(out, map.novel_value);
    out.push_back('}');
}

void write_string_set(std::string& out, const std::unordered_set<std::string>& set) {
    std::vector<std::string> sorted(set.begin(), set.end());
    std::sort(sorted.begin(), sorted.end());
    out.push_back('[');
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i) out.push_back(',');
        write_json_string(out, sorted[i]);
    }
    out.push_back(']');
}

struct SpecWriter {
    std::string& out;

    void head(const char* code, const std::string& var, const std::string& orig) const {
        out += "{\"code\":\"";
        out += code;
        out += "\",\"var_name\":";
        write_json_string(out, var);
        out += ",\"orig_name\":";
        write_json_string(out, orig);
    }
    void operator()(const CleanSpec& s) const {
        head("clean", s.var_name, s.orig_name);
        out += ",\"fill\":";
        write_number(out, s.fill_value);
        out.push_back('}');
    }
    void operator()(const IsBadSpec& s) const {
        head("isBAD", s.var_name, s.orig_name);
        out.push_back('}');
    }
    void operator()(const LevSpec& s) const {
        head("lev", s.var_name, s.orig_name);
        out += ",\"kind\":\"";
        out += s.kind == LevSpec::Kind::kLevel ? "level"
               : s.kind == LevSpec::Kind::kMissing ? "missing"
                                                   : "pooled";
        out += "\"";
        if (s.kind == LevSpec::Kind::kLevel) {
            out += ",\"level\":";
            write_json_string(out, s.level);
        } else if (s.kind == LevSpec::Kind::kPooled) {
            out += ",\"members\":";
            write_string_set(out, s.pooled_members);
            out += ",\"members_include_missing\":";
            out += s.pooled_includes_missing ? "true" : "false";
            out += ",\"known_levels\":";
            write_string_set(out, s.known_levels);
            out += ",\"missing_known\":";
            out += s.missing_known ? "true" : "false";
        }
        out.push_back('}');
    }
    void operator()(const CatNSpec& s) const {
        head("catN", s.var_name, s.orig_name);
        out += ",\"grand_mean\":";
        write_number(out, s.grand_mean);
        out += ",\"map\":";
        write_map(out, s.map);
        out.push_back('}');
    }
    void operator()(const CatBSpec& s) const {
        head("catB", s.var_name, s.orig_name);
        out += ",\"grand_rate\":";
        write_number(out, s.grand_rate);
        out += ",\"epsilon\":";
        write_number(out, s.epsilon);
        out += ",\"map\":";
        write_map(out, s.map);
        out.push_back('}');
    }
    void operator()(const CatPSpec& s) const {
        head("catP", s.var_name, s.orig_name);
        out += ",\"map\":";
        write_map(out, s.map);
        out.push_back('}');
    }
    void operator()(const CatDSpec& s) const {
        head("catD", s.var_name, s.orig_name);
        out += ",\"fallback\":";
        write_number(out, s.fallback);
        out += ",\"map\":";
        write_map(out, s.map);
        out.push_back('}');
    }
};

std::string plan_body(const TreatmentPlan& plan) {
    std::string out;
    out.reserve(4096);
    out += "{\"format_version\":";
    out += std::to_string(plan.format_version);
    out += ",\"task\":\"";
    out += task_name(plan.task);
    out += "\",\"outcome\":";
    write_json_string(out, plan.outcome_name);
    if (plan.task == Task::kBinomial) {
        out += ",\"target_level\":";
        write_json_string(out, plan.target_level);
        out += ",\"grand_rate\":";
        write_number(out, plan.grand_rate);
    }
    if (plan.task == Task::kNumeric) {
        out += ",\"mean_y\":";
        write_number(out, plan.mean_y);
    }
    out += ",\"controls\":{\"min_fraction\":";
    write_number(out, plan.controls.min_fraction);
    out += ",\"rare_count\":";
    out += std::to_string(plan.controls.rare_count);
    out += ",\"rare_sig\":";
    if (plan.controls.rare_sig) write_number(out, *plan.controls.rare_sig);
    else out += "null";
    out += ",\"sm_factor\":";
    write_number(out, plan.controls.sm_factor);
    out += ",\"cat_b_epsilon\":";
    write_number(out, plan.controls.cat_b_epsilon);
    out += ",\"ncross\":";
    out += std::to_string(plan.controls.ncross);
    out += "},\"specs\":[";
    for (std::size_t i = 0; i < plan.specs.size(); ++i) {
        if (i) out.push_back(',');
        std::visit(SpecWriter{out}, plan.specs[i]);
    }
    out += "],\"score_frame\":[";
    for (std::size_t i = 0; i < plan.score_frame.size(); ++i) {
        const auto& row = plan.score_frame[i];
        if (i) out.push_back(',');
        out += "{\"var_name\":";
        write_json_string(out, row.var_name);
        out += ",\"sig\":";
        write_number(out, row.sig);
        out += ",\"extra_model_degrees\":";
        out += std::to_string(row.extra_model_degrees);
        out += ",\"orig_name\":";
        write_json_string(out, row.orig_name);
        out += ",\"code\":\"";
        out += code_name(row.code);
        out += "\"}";
    }
    out += "],\"scaling\":";
    if (plan.task == Task::kNoTarget) {
        out += "null";
    } else {
        out.push_back('[');
        for (std::size_t i = 0; i < plan.scaling.size(); ++i) {
            if (i) out.push_back(',');
            out += "{\"slope\":";
            write_number(out, plan.scaling[i].slope);
            out += ",\"center\":";
            write_number(out, plan.scaling[i].center);
            out.push_back('}');
        }
        out.push_back(']');
    }
    return out;
}

// --- reader -----------------------------------------------------------

using Json = nlohmann::json;

void require_fields(const Json& obj, const std::vector<std::string>& required,
                    const std::vector<std::string>& optional, const std::string& where) {
    for (const auto& f : required) {
        if (!obj.contains(f)) throw Error("plan: missing field '" + f + "' in " + where);
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& key = it.key();
        if (std::find(required.begin(), required.end(), key) == required.end() &&
            std::find(optional.begin(), optional.end(), key) == optional.end()) {
            throw Error("plan: unknown field '" + key + "' in " + where +
                        " (newer format version?)");
        }
    }
}

LevelValueMap read_map(const Json& j) {
    require_fields(j, {"levels", "missing", "novel"}, {}, "value map");
    LevelValueMap map;
    for (const auto& pair : j["levels"]) {
        if (!pair.is_array() || pair.size() != 2) throw Error("plan: malformed level entry");
        map.by_level.emplace(pair[0].get<std::string>(), pair[1].get<double>());
    }
    if (!j["missing"].is_null()) {
        map.has_missing = true;
        map.missing_value = j["missing"].get<double>();
    }
    map.novel_value = j["novel"].get<double>();
    return map;
}

std::unordered_set<std::string> read_string_set(const Json& j) {
    std::unordered_set<std::string> out;
    for (const auto& v : j) out.insert(v.get<std::string>());
    return out;
}

VarSpec read_spec(const Json& j) {
    require_fields(j, {"code", "var_name", "orig_name"},
                   {"fill", "kind", "level", "members", "members_include_missing", "known_levels",
                    "missing_known", "grand_mean", "grand_rate", "epsilon", "fallback", "map"},
                   "spec");
    const Code code = code_from_name(j["code"].get<std::string>());
    const std::string var = j["var_name"].get<std::string>();
    const std::string orig = j["orig_name"].get<std::string>();
    switch (code) {
        case Code::kClean: return CleanSpec{orig, var, j.at("fill").get<double>()};
        case Code::kIsBad: return IsBadSpec{orig, var};
        case Code::kLev: {
            LevSpec spec;
            spec.orig_name = orig;
            spec.var_name = var;
            const std::string kind = j.at("kind").get<std::string>();
            if (kind == "level") {
                spec.kind = LevSpec::Kind::kLevel;
                spec.level = j.at("level").get<std::string>();
            } else if (kind == "missing") {
                spec.kind = LevSpec::Kind::kMissing;
            } else if (kind == "pooled") {
                spec.kind = LevSpec::Kind::kPooled;
                spec.pooled_members = read_string_set(j.at("members"));
                spec.pooled_includes_missing = j.at("members_include_missing").get<bool>();
                spec.known_levels = read_string_set(j.at("known_levels"));
                spec.missing_known = j.at("missing_known").get<bool>();
            } else {
                throw Error("plan: unknown lev kind '" + kind + "'");
            }
            return spec;
        }
        case Code::kCatN:
            return CatNSpec{orig, var, read_map(j.at("map")), j.at("grand_mean").get<double>()};
        case Code::kCatB:
            return CatBSpec{orig, var, read_map(j.at("map")), j.at("grand_rate").get<double>(),
                            j.at("epsilon").get<double>()};
        case Code::kCatP: return CatPSpec{orig, var, read_map(j.at("map"))};
        case Code::kCatD:
            return CatDSpec{orig, var, read_map(j.at("map")), j.at("fallback").get<double>()};
    }
    throw Error("plan: unreachable spec code");
}

}  // namespace

std::string plan_to_json(const TreatmentPlan& plan) {
    std::string body = plan_body(plan);
    body += ",\"content_hash\":\"";
    body += hash_hex(fnv1a(body));
    body += "\"}\n";
    return body;
}

TreatmentPlan plan_from_json(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::exception& e) {
        throw Error(std::string("plan: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error("plan: top level must be an object");
    if (!doc.contains("format_version")) throw Error("plan: missing format_version");
    const int version = doc["format_version"].get<int>();
    if (version != 1) {
        throw Error("plan: unsupported format version " + std::to_string(version));
    }
    require_fields(doc,
                   {"format_version", "task", "outcome", "controls", "specs", "score_frame",
                    "scaling", "content_hash"},
                   {"target_level", "grand_rate", "mean_y"}, "plan");

    TreatmentPlan plan;
    plan.format_version = version;
    plan.task = task_from_name(doc["task"].get<std::string>());
    plan.outcome_name = doc["outcome"].get<std::string>();
    if (plan.task == Task::kBinomial) {
        plan.target_level = doc.at("target_level").get<std::string>();
        plan.grand_rate = doc.at("grand_rate").get<double>();
    }
    if (plan.task == Task::kNumeric) plan.mean_y = doc.at("mean_y").get<double>();

    const Json& controls = doc["controls"];
    require_fields(controls,
                   {"min_fraction", "rare_count", "rare_sig", "sm_factor", "cat_b_epsilon",
                    "ncross"},
                   {}, "controls");
    plan.controls.min_fraction = controls["min_fraction"].get<double>();
    plan.controls.rare_count = controls["rare_count"].get<int>();
    if (!controls["rare_sig"].is_null()) plan.controls.rare_sig = controls["rare_sig"].get<double>();
    plan.controls.sm_factor = controls["sm_factor"].get<double>();
    plan.controls.cat_b_epsilon = controls["cat_b_epsilon"].get<double>();
    plan.controls.ncross = controls["ncross"].get<int>();

    for (const auto& spec_json : doc["specs"]) plan.specs.push_back(read_spec(spec_json));
    for (const auto& row_json : doc["score_frame"]) {
        require_fields(row_json, {"var_name", "sig", "extra_model_degrees", "orig_name", "code"},
                       {}, "score_frame row");
        ScoreFrameRow row;
        row.var_name = row_json["var_name"].get<std::string>();
        row.sig = row_json["sig"].get<double>();
        row.extra_model_degrees = row_json["extra_model_degrees"].get<int>();
        row.orig_name = row_json["orig_name"].get<std::string>();
        row.code = code_from_name(row_json["code"].get<std::string>());
        if (!(row.sig >= 0.0 && row.sig <= 1.0)) throw Error("plan: sig outside [0, 1]");
        plan.score_frame.push_back(std::move(row));
    }
    if (plan.score_frame.size() != plan.specs.size()) {
        throw Error("plan: score_frame and specs disagree");
    }
    for (std::size_t i = 0; i < plan.specs.size(); ++i) {
        if (spec_var_name(plan.specs[i]) != plan.score_frame[i].var_name ||
            spec_code(plan.specs[i]) != plan.score_frame[i].code) {
            throw Error("plan: score_frame row " + std::to_string(i) + " does not match its spec");
        }
    }
    if (plan.task != Task::kNoTarget) {
        if (!doc["scaling"].is_array()) throw Error("plan: scaling must be an array");
        for (const auto& entry : doc["scaling"]) {
            require_fields(entry, {"slope", "center"}, {}, "scaling entry");
            plan.scaling.push_back({entry["slope"].get<double>(), entry["center"].get<double>()});
        }
        if (plan.scaling.size() != plan.specs.size()) {
            throw Error("plan: scaling and specs disagree");
        }
    } else if (!doc["scaling"].is_null()) {
        throw Error("plan: no-target plans carry no scaling");
    }

    // integrity: re-serialize and compare the content hash
    const std::string expected_hash = doc["content_hash"].get<std::string>();
    std::string body = plan_body(plan);
    if (hash_hex(fnv1a(body)) != expected_hash) {
        throw Error("plan: content hash mismatch (file corrupted or edited)");
    }
    return plan;
}

void save_plan(const TreatmentPlan& plan, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("plan: cannot write '" + path + "'");
    out << plan_to_json(plan);
    if (!out) throw Error("plan: write failed for '" + path + "'");
}

TreatmentPlan load_plan(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("plan: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return plan_from_json(buf.str());
}

}  // namespace treatkit
