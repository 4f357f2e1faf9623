// proptree: response-propensity trees for unit nonresponse analysis.
//
// Subcommands: generate, fit, cv, validate, predict, bias, simulate, logit.
// Every stochastic command takes an explicit 64-bit seed; outputs land in a
// run directory with a manifest and are never overwritten without --force.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "proptree/bias.hpp"
#include "proptree/dataset.hpp"
#include "proptree/linear_form.hpp"
#include "proptree/logistic.hpp"
#include "proptree/model_selection.hpp"
#include "proptree/simulation.hpp"
#include "proptree/synthetic.hpp"
#include "proptree/tree.hpp"
#include "run_output.hpp"

namespace {

using nlohmann::json;
using namespace proptree;

std::string format_num(double v) {
    char best[40];
    std::snprintf(best, sizeof(best), "%.17g", v);
    for (int prec = 1; prec <= 17; ++prec) {
        char candidate[40];
        std::snprintf(candidate, sizeof(candidate), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(candidate, "%lf", &back);
        if (back == v && std::char_traits<char>::length(candidate) <
                             std::char_traits<char>::length(best))
            std::snprintf(best, sizeof(best), "%s", candidate);
    }
    return best;
}

std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

struct DataArgs {
    std::string data_path;
    std::string schema_path;
    std::string response;
    std::string outcome;
    bool drop_missing = false;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.data_path, "input CSV file")->required();
    cmd->add_option("--schema", args.schema_path, "schema sidecar (JSON)")->required();
    cmd->add_option("--response", args.response, "response column (overrides schema file)");
    cmd->add_option("--outcome", args.outcome, "outcome column (overrides schema file)");
    cmd->add_flag("--drop-missing", args.drop_missing,
                  "drop rows with missing cells instead of failing");
}

Dataset load_data(const DataArgs& args, CsvLoadReport* report = nullptr) {
    const SchemaFile schema = load_schema_file(args.schema_path);
    CsvOptions options;
    options.listwise_deletion = args.drop_missing;
    CsvLoadReport local;
    Dataset ds = load_csv(args.data_path, schema.columns, options, report ? report : &local);
    const std::string response = !args.response.empty() ? args.response : schema.response;
    const std::string outcome = !args.outcome.empty() ? args.outcome : schema.outcome;
    if (!response.empty() || !outcome.empty()) ds = ds.with_roles(response, outcome);
    return ds;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------

int cmd_generate(const std::string& spec_path, const std::string& out_dir, bool force) {
    const SyntheticSpec spec = load_synthetic_spec(spec_path);
    const Dataset ds = generate_synthetic(spec);

    cli::RunOutputs run("generate", out_dir, force);
    run.set_config({{"spec", spec_path}, {"seed", spec.seed}, {"n", spec.n}});

    const std::string data_name = "data.csv";
    // Serialize via the library writer to keep the dialect identical.
    const std::filesystem::path tmp = std::filesystem::path(out_dir) / (data_name + ".tmp");
    write_csv(ds, tmp.string());
    const std::string content = read_file(tmp.string());
    std::filesystem::remove(tmp);
    run.write_text(data_name, content);

    SchemaFile schema_out;
    schema_out.columns = ds.schema();
    schema_out.response = ds.response_name();
    schema_out.outcome = ds.outcome_name();
    const std::filesystem::path tmp_schema =
        std::filesystem::path(out_dir) / "schema.json.tmp";
    write_schema_file(schema_out, tmp_schema.string());
    const std::string schema_content = read_file(tmp_schema.string());
    std::filesystem::remove(tmp_schema);
    run.write_text("schema.json", schema_content);
    run.finish();

    std::cout << "generated " << ds.n_rows() << " rows, " << ds.n_columns()
              << " columns -> " << out_dir << "\n";
    return 0;
}

GrowConfig make_grow_config(int k_max, std::uint64_t min_leaf,
                            const std::vector<std::string>& columns) {
    GrowConfig config;
    config.k_max = k_max;
    config.min_leaf = min_leaf;
    config.columns = columns;
    return config;
}

int cmd_fit(const DataArgs& data_args, int k_max, std::uint64_t min_leaf,
            const std::vector<std::string>& columns, std::uint64_t seed,
            const std::string& out_dir, bool force) {
    const Dataset ds = load_data(data_args);
    const GrowConfig config = make_grow_config(k_max, min_leaf, columns);
    const SelectionResult result = fit_with_selection(ds, config, seed, /*full_trace=*/true);

    cli::RunOutputs run("fit", out_dir, force);
    run.set_config({{"data", data_args.data_path},
                    {"schema", data_args.schema_path},
                    {"response", ds.response_name()},
                    {"k_max", k_max},
                    {"min_leaf", min_leaf},
                    {"seed", seed}});
    run.write_text("tree.json", result.model.to_json());
    run.write_text("split_form.csv", split_form_csv(to_split_form(result.model)));
    run.write_text("cell_form.csv", cell_form_csv(to_cell_form(result.model)));
    run.write_text("cv_trace.csv", trace_csv(result.trace));
    run.finish();

    std::cout << "selected k=" << result.k_selected << " ("
              << result.model.leaf_ids().size() << " cells), R_bar="
              << format_num(result.trace.r_bar) << " -> " << out_dir << "\n";
    return 0;
}

int cmd_cv(const DataArgs& data_args, int k_max, std::uint64_t min_leaf,
           const std::vector<std::string>& columns, std::uint64_t seed,
           const std::string& out_dir, bool force) {
    const Dataset ds = load_data(data_args);
    const GrowConfig config = make_grow_config(k_max, min_leaf, columns);
    const CVTrace trace = cv_trace(ds, config, k_max, seed);

    std::printf("%-6s %-14s %s\n", "k", "estimate", "std_error");
    for (const auto& e : trace.entries)
        std::printf("%-6d %-14.7f %.9f\n", e.k, e.r_sq, e.sigma);
    std::printf("selected k = %d\n", select_k(trace));

    if (!out_dir.empty()) {
        cli::RunOutputs run("cv", out_dir, force);
        run.set_config({{"data", data_args.data_path},
                        {"schema", data_args.schema_path},
                        {"k_max", k_max},
                        {"seed", seed}});
        run.write_text("cv_trace.csv", trace_csv(trace));
        run.finish();
    }
    return 0;
}

int cmd_validate(const std::string& model_path, const DataArgs& data_args,
                 const std::string& target_override, const std::string& out_dir,
                 bool force) {
    const TreeModel tree = TreeModel::load(model_path);
    const Dataset ds = load_data(data_args);
    const std::string target =
        !target_override.empty() ? target_override : tree.response_name();

    const SplitForm fit_split = to_split_form(tree);
    const CellForm fit_cells = to_cell_form(tree);
    const RefitResult refitted = refit(tree, ds, target);

    std::ostringstream split_cmp;
    split_cmp << "term,fit_coefficient,refit_coefficient,order\n";
    split_cmp << "1," << format_num(fit_split.intercept) << ','
              << (refitted.split_form.intercept_defined
                      ? format_num(refitted.split_form.intercept)
                      : "")
              << ",0\n";
    for (std::size_t t = 0; t < fit_split.terms.size(); ++t) {
        const auto& a = fit_split.terms[t];
        const auto& b = refitted.split_form.terms[t];
        split_cmp << quote_field(predicate_text(a.predicate, fit_split.schema))
                  << ',' << format_num(a.beta) << ','
                  << (b.defined ? format_num(b.beta) : "") << ',' << a.order << '\n';
    }

    std::ostringstream cell_cmp;
    cell_cmp << "cell,predicate,count_fit,mu_fit,count_refit,mu_refit,defined\n";
    for (std::size_t c = 0; c < fit_cells.cells.size(); ++c) {
        const auto& a = fit_cells.cells[c];
        const auto& b = refitted.cell_form.cells[c];
        cell_cmp << a.id << ','
                 << quote_field(predicate_text(a.predicate, fit_cells.schema))
                 << ',' << a.count << ',' << format_num(a.mu) << ',' << b.count << ','
                 << (b.defined ? format_num(b.mu) : "") << ',' << (b.defined ? 1 : 0)
                 << '\n';
    }

    cli::RunOutputs run("validate", out_dir, force);
    run.set_config({{"model", model_path},
                    {"data", data_args.data_path},
                    {"schema", data_args.schema_path},
                    {"target", target}});
    run.write_text("validate_split.csv", split_cmp.str());
    run.write_text("validate_cells.csv", cell_cmp.str());
    run.finish();

    int undefined = 0;
    for (const auto& cell : refitted.cell_form.cells)
        if (!cell.defined) ++undefined;
    std::cout << "refit " << refitted.cell_form.cells.size() << " cells on "
              << ds.n_rows() << " rows (" << undefined << " empty) -> " << out_dir << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const DataArgs& data_args,
                const std::string& out_dir, bool force) {
    const TreeModel tree = TreeModel::load(model_path);
    const Dataset ds = load_data(data_args);
    const BoundTree bound(tree, ds);
    const CellForm cells = to_cell_form(tree);
    std::vector<int> cell_of_leaf(tree.nodes().size(), 0);
    for (const auto& cell : cells.cells)
        cell_of_leaf[static_cast<std::size_t>(cell.leaf_node)] = cell.id;

    std::ostringstream csv;
    csv << "row,cell,propensity\n";
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        const int leaf = bound.leaf_node(i);
        csv << (i + 1) << ',' << cell_of_leaf[static_cast<std::size_t>(leaf)] << ','
            << format_num(tree.nodes()[static_cast<std::size_t>(leaf)].mean) << '\n';
    }

    cli::RunOutputs run("predict", out_dir, force);
    run.set_config({{"model", model_path}, {"data", data_args.data_path}});
    run.write_text("predictions.csv", csv.str());
    run.finish();

    std::cout << "scored " << ds.n_rows() << " rows -> " << out_dir << "\n";
    return 0;
}

int cmd_bias(const std::string& model_path, const DataArgs& data_args, double threshold,
             const std::string& out_dir, bool force) {
    const TreeModel tree = TreeModel::load(model_path);
    const Dataset ds = load_data(data_args);
    if (!ds.has_outcome()) throw ConfigError("bias analysis needs an outcome column");
    const CellForm cells = to_cell_form(tree);
    GapConfig config;
    config.threshold = threshold;
    const GapReport report =
        cell_gaps(cells, ds, ds.outcome_name(), ds.response_name(), config);

    cli::RunOutputs run("bias", out_dir, force);
    run.set_config({{"model", model_path},
                    {"data", data_args.data_path},
                    {"outcome", ds.outcome_name()},
                    {"threshold", threshold}});
    run.write_text("gap_report.csv", gap_report_csv(report));
    run.finish();

    std::cout << "overall: respondents " << format_num(report.overall.respondent_mean)
              << ", nonrespondents " << format_num(report.overall.nonrespondent_mean)
              << ", gap " << format_num(report.overall.gap) << "\n";
    int flagged = 0;
    for (const auto& row : report.cells)
        if (row.flagged) ++flagged;
    std::cout << flagged << " of " << report.cells.size() << " cells flagged -> "
              << out_dir << "\n";
    return 0;
}

int cmd_simulate(int model_id, int replicates, std::size_t n, std::uint64_t seed,
                 bool fresh_eval, int k_max, const std::string& model5_path,
                 const std::string& out_dir, bool force) {
    SimConfig config;
    config.model_id = model_id;
    config.replicates = replicates;
    config.n = n;
    config.seed = seed;
    config.fresh_eval = fresh_eval;
    config.k_max = k_max;
    if (!model5_path.empty()) config.model5 = TreeModel::load(model5_path);
    const SimReport report = run_comparison(config);

    cli::RunOutputs run("simulate", out_dir, force);
    run.set_config({{"model", model_id},
                    {"replicates", replicates},
                    {"n", n},
                    {"seed", seed},
                    {"fresh_eval", fresh_eval}});
    run.write_text("sim_summary.csv", sim_report_csv(report));
    run.write_text("sim_p_summary.csv", sim_p_summary_csv(report));
    run.finish();

    std::cout << "model " << model_id << ": tree mean |err| "
              << format_num(report.tree.mean_abs_error) << ", logistic mean |err| "
              << format_num(report.logistic.mean_abs_error) << " ("
              << report.tree.failed_replicates << " failed replicates) -> " << out_dir
              << "\n";
    return 0;
}

int cmd_logit(const DataArgs& data_args, const std::string& scope_name, bool stepwise,
              const std::string& out_dir, bool force) {
    const Dataset ds = load_data(data_args);
    if (!ds.has_response()) throw ConfigError("logit needs a response column");

    std::vector<TermSpec> scope;
    if (scope_name == "mains") scope = mains_scope(ds);
    else if (scope_name == "quadratics") scope = quadratic_scope(ds);
    else throw ConfigError("unknown scope '" + scope_name + "' (mains|quadratics)");

    const LogisticModel model = stepwise
                                    ? stepwise_select(ds, scope, ds.response_name())
                                    : fit_logistic(ds, scope, ds.response_name());

    cli::RunOutputs run("logit", out_dir, force);
    run.set_config({{"data", data_args.data_path},
                    {"response", ds.response_name()},
                    {"scope", scope_name},
                    {"stepwise", stepwise}});
    run.write_text("logit_report.json", logistic_report_json(model));
    run.write_text("logit_coefficients.csv", logistic_coefficients_csv(model));
    run.finish();

    std::cout << "AIC " << format_num(model.aic) << ", " << model.terms.size()
              << " terms, " << (model.converged ? "converged" : "NOT converged") << " in "
              << model.iterations << " iterations -> " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"response propensity trees with cross-validated split selection"};
    app.require_subcommand(1);

    // generate
    std::string gen_spec, gen_out;
    bool gen_force = false;
    auto* generate = app.add_subcommand("generate", "draw a synthetic dataset from a spec");
    generate->add_option("--spec", gen_spec, "synthetic spec (JSON, includes seed)")
        ->required();
    generate->add_option("--out", gen_out, "output directory")->required();
    generate->add_flag("--force", gen_force, "overwrite existing outputs");

    // fit
    DataArgs fit_data;
    int fit_kmax = 20;
    std::uint64_t fit_min_leaf = 0, fit_seed = 0;
    std::vector<std::string> fit_columns;
    std::string fit_out;
    bool fit_force = false;
    auto* fit = app.add_subcommand("fit", "grow a tree with CV-selected size");
    add_data_options(fit, fit_data);
    fit->add_option("--k-max", fit_kmax, "largest number of splits to consider");
    fit->add_option("--min-leaf", fit_min_leaf, "minimum leaf size (0 = n^(5/8) rule)");
    fit->add_option("--columns", fit_columns, "candidate split columns")->delimiter(',');
    fit->add_option("--seed", fit_seed, "fold assignment seed")->required();
    fit->add_option("--out", fit_out, "output directory")->required();
    fit->add_flag("--force", fit_force, "overwrite existing outputs");

    // cv
    DataArgs cv_data;
    int cv_kmax = 20;
    std::uint64_t cv_min_leaf = 0, cv_seed = 0;
    std::vector<std::string> cv_columns;
    std::string cv_out;
    bool cv_force = false;
    auto* cv = app.add_subcommand("cv", "print the cross-validation error trace");
    add_data_options(cv, cv_data);
    cv->add_option("--k-max", cv_kmax, "largest number of splits to consider");
    cv->add_option("--min-leaf", cv_min_leaf, "minimum leaf size (0 = n^(5/8) rule)");
    cv->add_option("--columns", cv_columns, "candidate split columns")->delimiter(',');
    cv->add_option("--seed", cv_seed, "fold assignment seed")->required();
    cv->add_option("--out", cv_out, "optional output directory");
    cv->add_flag("--force", cv_force, "overwrite existing outputs");

    // validate
    std::string val_model, val_target, val_out;
    DataArgs val_data;
    bool val_force = false;
    auto* validate =
        app.add_subcommand("validate", "refit a frozen structure on a second panel");
    validate->add_option("--model", val_model, "fitted tree (tree.json)")->required();
    add_data_options(validate, val_data);
    validate->add_option("--target", val_target,
                         "refit target column (default: the model's response)");
    validate->add_option("--out", val_out, "output directory")->required();
    validate->add_flag("--force", val_force, "overwrite existing outputs");

    // predict
    std::string pred_model, pred_out;
    DataArgs pred_data;
    bool pred_force = false;
    auto* predict = app.add_subcommand("predict", "score a CSV with a saved model");
    predict->add_option("--model", pred_model, "fitted tree (tree.json)")->required();
    add_data_options(predict, pred_data);
    predict->add_option("--out", pred_out, "output directory")->required();
    predict->add_flag("--force", pred_force, "overwrite existing outputs");

    // bias
    std::string bias_model, bias_out;
    DataArgs bias_data;
    double bias_threshold = -1.0;
    bool bias_force = false;
    auto* bias = app.add_subcommand("bias", "respondent/nonrespondent outcome gaps by cell");
    bias->add_option("--model", bias_model, "fitted tree (tree.json)")->required();
    add_data_options(bias, bias_data);
    bias->add_option("--threshold", bias_threshold,
                     "absolute gap threshold for flags (default: 4 standard errors)");
    bias->add_option("--out", bias_out, "output directory")->required();
    bias->add_flag("--force", bias_force, "overwrite existing outputs");

    // simulate
    int sim_model = 1, sim_replicates = 100, sim_kmax = 10;
    std::size_t sim_n = 500;
    std::uint64_t sim_seed = 0;
    bool sim_fresh = false, sim_force = false;
    std::string sim_model5, sim_out;
    auto* simulate = app.add_subcommand("simulate", "tree vs logistic comparison study");
    simulate->add_option("--model", sim_model, "response model id (1..5)")
        ->check(CLI::Range(1, 5))
        ->required();
    simulate->add_option("--replicates", sim_replicates, "number of replicates");
    simulate->add_option("--n", sim_n, "records per replicate");
    simulate->add_option("--seed", sim_seed, "master seed")->required();
    simulate->add_flag("--fresh-eval", sim_fresh, "evaluate on a fresh draw");
    simulate->add_option("--k-max", sim_kmax, "tree trace cap per replicate");
    simulate->add_option("--model5-tree", sim_model5, "override tree for model 5 (JSON)");
    simulate->add_option("--out", sim_out, "output directory")->required();
    simulate->add_flag("--force", sim_force, "overwrite existing outputs");

    // logit
    DataArgs logit_data;
    std::string logit_scope = "quadratics", logit_out;
    bool logit_no_stepwise = false, logit_force = false;
    auto* logit = app.add_subcommand("logit", "logistic-regression baseline");
    add_data_options(logit, logit_data);
    logit->add_option("--scope", logit_scope, "term scope: mains|quadratics");
    logit->add_flag("--no-stepwise", logit_no_stepwise, "fit the full scope directly");
    logit->add_option("--out", logit_out, "output directory")->required();
    logit->add_flag("--force", logit_force, "overwrite existing outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen_spec, gen_out, gen_force);
        if (fit->parsed())
            return cmd_fit(fit_data, fit_kmax, fit_min_leaf, fit_columns, fit_seed, fit_out,
                           fit_force);
        if (cv->parsed())
            return cmd_cv(cv_data, cv_kmax, cv_min_leaf, cv_columns, cv_seed, cv_out,
                          cv_force);
        if (validate->parsed())
            return cmd_validate(val_model, val_data, val_target, val_out, val_force);
        if (predict->parsed()) return cmd_predict(pred_model, pred_data, pred_out, pred_force);
        if (bias->parsed())
            return cmd_bias(bias_model, bias_data, bias_threshold, bias_out, bias_force);
        if (simulate->parsed())
            return cmd_simulate(sim_model, sim_replicates, sim_n, sim_seed, sim_fresh,
                                sim_kmax, sim_model5, sim_out, sim_force);
        if (logit->parsed())
            return cmd_logit(logit_data, logit_scope, !logit_no_stepwise, logit_out,
                             logit_force);
    } catch (const proptree::Error& e) {
        nlohmann::json err{{"error", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
