// treatkit: batch data conditioning. Designs treatment plans from training
// CSVs, applies them to future CSVs, and builds simulated out-of-sample
// cross-frames. All outputs are written atomically (temp file + rename).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "treatkit/crossframe.hpp"
#include "treatkit/csv.hpp"
#include "treatkit/design.hpp"
#include "treatkit/plan_io.hpp"
#include "treatkit/prepare.hpp"

namespace {

using namespace treatkit;

std::vector<std::string> split_commas(const std::string& joined) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(joined);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// --seed flag, then TREATKIT_SEED, then a drawn seed announced on stderr so
// the run can be reproduced.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("TREATKIT_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw Error("TREATKIT_SEED is not a valid integer");
        }
    }
    std::random_device rd;
    const std::uint64_t seed =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    std::cerr << "treatkit: no seed given; using seed " << seed << "\n";
    return seed;
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

void print_score_frame(std::ostream& os, const TreatmentPlan& plan) {
    os << "varName,sig,extraModelDegrees,origName,code\n";
    for (const auto& row : plan.score_frame) {
        os << row.var_name << ',' << format_double(row.sig) << ',' << row.extra_model_degrees
           << ',' << row.orig_name << ',' << code_name(row.code) << '\n';
    }
}

Schema schema_or_default(const std::string& schema_path) {
    return schema_path.empty() ? Schema{} : load_schema(schema_path);
}

struct CommonDesignArgs {
    std::string task;
    std::string data_path;
    std::string vars_joined;
    std::string outcome;
    std::string target;
    std::string schema_path;
    DesignControls controls;
    double rare_sig_flag = -1.0;
    std::optional<std::uint64_t> seed_flag;

    void add_to(CLI::App* cmd, bool with_task_none) {
        cmd->add_option("--task", task, with_task_none ? "numeric|binomial|none" : "numeric|binomial")
            ->required();
        cmd->add_option("--data", data_path, "training CSV")->required();
        cmd->add_option("--vars", vars_joined, "comma-separated input variables")->required();
        cmd->add_option("--outcome", outcome, "outcome column name");
        cmd->add_option("--target", target, "target level (binomial)");
        cmd->add_option("--schema", schema_path, "optional schema JSON");
        cmd->add_option("--min-fraction", controls.min_fraction, "indicator eligibility frequency");
        cmd->add_option("--rare-count", controls.rare_count, "pool levels occurring at most this often");
        cmd->add_option("--rare-sig", rare_sig_flag, "pooled-level significance threshold");
        cmd->add_option("--sm-factor", controls.sm_factor, "impact-code smoothing pseudo-observations");
        cmd->add_option("--seed", seed_flag, "RNG seed (else TREATKIT_SEED, else drawn)");
        cmd->add_option("--workers", controls.workers, "design-phase worker threads");
    }

    Task resolve_task() const { return task_from_name(task); }

    void finish() {
        if (rare_sig_flag >= 0.0) controls.rare_sig = rare_sig_flag;
        const Task t = resolve_task();
        if (t == Task::kBinomial && target.empty()) {
            throw CLI::ValidationError("--target is required for binomial tasks");
        }
        if (t != Task::kBinomial && !target.empty()) {
            throw CLI::ValidationError("--target only applies to binomial tasks");
        }
        if (t != Task::kNoTarget && outcome.empty()) {
            throw CLI::ValidationError("--outcome is required for this task");
        }
    }
};

int cmd_design(CommonDesignArgs& args, const std::string& out_plan) {
    args.finish();
    const Frame frame = read_csv(args.data_path, schema_or_default(args.schema_path));
    const std::vector<std::string> vars = split_commas(args.vars_joined);
    TreatmentPlan plan;
    switch (args.resolve_task()) {
        case Task::kNumeric:
            plan = design_treatments_n(frame, vars, args.outcome, args.controls,
                                       resolve_seed(args.seed_flag));
            break;
        case Task::kBinomial:
            plan = design_treatments_c(frame, vars, args.outcome, args.target, args.controls,
                                       resolve_seed(args.seed_flag));
            break;
        case Task::kNoTarget:
            plan = design_treatments_z(frame, vars, args.controls);
            break;
    }
    atomic_write(out_plan, plan_to_json(plan));
    print_score_frame(std::cout, plan);
    return 0;
}

int cmd_prepare(const std::string& plan_path, const std::string& data_path,
                const std::string& schema_path, double prune_sig_flag,
                const std::string& vars_joined, bool scale, const std::string& out_path) {
    const TreatmentPlan plan = load_plan(plan_path);
    const Frame frame = read_csv(data_path, schema_or_default(schema_path));
    PrepareOptions options;
    if (prune_sig_flag >= 0.0) options.prune_sig = prune_sig_flag;
    if (!vars_joined.empty()) options.var_restriction = split_commas(vars_joined);
    options.scale = scale;
    const Frame treated = prepare(plan, frame, options);
    atomic_write(out_path, write_csv_text(treated));
    return 0;
}

int cmd_crossframe(CommonDesignArgs& args, const std::string& split_plan_path, int ncross,
                   const std::string& out_frame, const std::string& out_plan) {
    args.finish();
    if (args.resolve_task() == Task::kNoTarget) {
        throw CLI::ValidationError("crossframe requires a numeric or binomial task");
    }
    args.controls.ncross = ncross;
    const Frame frame = read_csv(args.data_path, schema_or_default(args.schema_path));
    const std::vector<std::string> vars = split_commas(args.vars_joined);
    const std::uint64_t seed = resolve_seed(args.seed_flag);

    std::optional<SplitPlan> user_plan;
    if (!split_plan_path.empty()) user_plan = load_split_plan(split_plan_path, frame.nrows());
    if (!user_plan && frame.nrows() < 2 * static_cast<std::size_t>(ncross)) {
        std::cerr << "treatkit: fewer than 2*ncross rows; falling back to one-way holdout\n";
    }

    CrossFrameResult result;
    if (args.resolve_task() == Task::kNumeric) {
        result = mk_cross_frame_n(frame, vars, args.outcome, args.controls, user_plan, seed);
    } else {
        result = mk_cross_frame_c(frame, vars, args.outcome, args.target, args.controls,
                                  user_plan, seed);
    }
    atomic_write(out_plan, plan_to_json(result.treatments));
    atomic_write(out_frame, write_csv_text(result.cross_frame));

    std::cout << "method: " << result.method << "\n";
    std::cout << "folds: " << result.eval_sets.folds.size() << " (app sizes:";
    for (const auto& fold : result.eval_sets.folds) std::cout << ' ' << fold.app.size();
    std::cout << ")\n";
    return 0;
}

int cmd_show(const std::string& plan_path) {
    const TreatmentPlan plan = load_plan(plan_path);
    std::cout << "task: " << task_name(plan.task) << "\n";
    if (!plan.outcome_name.empty()) std::cout << "outcome: " << plan.outcome_name << "\n";
    if (plan.task == Task::kBinomial) {
        std::cout << "target_level: " << plan.target_level << "\n";
        std::cout << "grand_rate: " << format_double(plan.grand_rate) << "\n";
    }
    if (plan.task == Task::kNumeric) std::cout << "mean_y: " << format_double(plan.mean_y) << "\n";
    std::cout << "derived_variables: " << plan.score_frame.size() << "\n";
    print_score_frame(std::cout, plan);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"treatkit: statistically sound data conditioning for predictive modeling"};
    app.require_subcommand(1);

    // design
    auto* design = app.add_subcommand("design", "fit a treatment plan from a training CSV");
    CommonDesignArgs design_args;
    design_args.add_to(design, /*with_task_none=*/true);
    std::string design_out;
    design->add_option("--out", design_out, "plan file to write")->required();

    // prepare
    auto* prep = app.add_subcommand("prepare", "apply a treatment plan to a CSV");
    std::string prep_plan, prep_data, prep_schema, prep_vars, prep_out;
    double prep_prune = -1.0;
    bool prep_scale = false;
    prep->add_option("--plan", prep_plan, "plan file")->required();
    prep->add_option("--data", prep_data, "input CSV")->required();
    prep->add_option("--schema", prep_schema, "optional schema JSON");
    prep->add_option("--prune-sig", prep_prune, "keep variables with sig strictly below this");
    prep->add_option("--vars", prep_vars, "comma-separated variable restriction");
    prep->add_flag("--scale", prep_scale, "rescale derived columns to y-units");
    prep->add_option("--out", prep_out, "treated CSV to write")->required();

    // crossframe
    auto* cross = app.add_subcommand("crossframe",
                                     "fit a plan and build a simulated out-of-sample frame");
    CommonDesignArgs cross_args;
    cross_args.add_to(cross, /*with_task_none=*/false);
    std::string cross_split, cross_out_frame, cross_out_plan;
    int cross_ncross = 3;
    cross->add_option("--ncross", cross_ncross, "cross-validation folds");
    cross->add_option("--split-plan", cross_split, "user-supplied split plan JSON");
    cross->add_option("--out-frame", cross_out_frame, "cross-frame CSV to write")->required();
    cross->add_option("--out-plan", cross_out_plan, "plan file to write")->required();

    // show
    auto* show = app.add_subcommand("show", "print a plan summary and its scoreFrame");
    std::string show_plan;
    show->add_option("--plan", show_plan, "plan file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (design->parsed()) return cmd_design(design_args, design_out);
        if (prep->parsed()) {
            return cmd_prepare(prep_plan, prep_data, prep_schema, prep_prune, prep_vars,
                               prep_scale, prep_out);
        }
        if (cross->parsed()) {
            return cmd_crossframe(cross_args, cross_split, cross_ncross, cross_out_frame,
                                  cross_out_plan);
        }
        if (show->parsed()) return cmd_show(show_plan);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "treatkit: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "treatkit: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
