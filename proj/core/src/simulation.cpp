#include "proptree/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "proptree/linear_form.hpp"
#include "proptree/logistic.hpp"
#include "proptree/model_selection.hpp"
#include "proptree/parallel.hpp"
#include "proptree/rng.hpp"
#include "text_util.hpp"

namespace proptree {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_domain(const SimRecord& r) {
    for (const double v : r.x)
        if (!(v >= 0.0 && v <= 100.0) || v != std::floor(v))
            throw DataError("simulation x values must be integers in [0,100]");
    if (r.c1 < 0 || r.c1 > 4) throw DataError("simulation c1 must be in 0..4");
    if (r.c2 < 0 || r.c2 > 1) throw DataError("simulation c2 must be 0/1");
}

// Evaluates a model-5 style tree directly on a SimRecord (columns x1..x4,
// c1, c2 by name).
double tree_propensity(const TreeModel& tree, const SimRecord& r) {
    auto scalar = [&](const std::string& name) -> double {
        if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '4')
            return r.x[static_cast<std::size_t>(name[1] - '1')];
        if (name == "c2") return r.c2;
        throw SchemaError("model-5 tree threshold on unknown column '" + name + "'");
    };
    auto code = [&](const std::string& name) -> std::int32_t {
        if (name == "c1") return r.c1;
        if (name == "c2") return r.c2;
        throw SchemaError("model-5 tree subset on unknown column '" + name + "'");
    };
    std::size_t cur = 0;
    while (true) {
        const TreeNode& node = tree.nodes()[cur];
        if (node.is_leaf()) return node.mean;
        bool left;
        if (node.split->kind == SplitRule::Kind::threshold)
            left = scalar(node.split->column) <= node.split->threshold;
        else
            left = std::binary_search(node.split->subset.begin(), node.split->subset.end(),
                                      code(node.split->column));
        cur = static_cast<std::size_t>(left ? node.left : node.right);
    }
}

}  // namespace

TreeModel default_model5_tree() {
    std::vector<ColumnSchema> schema{{"x1", ColumnKind::numeric, {}},
                                     {"x2", ColumnKind::numeric, {}},
                                     {"RESP", ColumnKind::binary, {}}};
    std::vector<TreeNode> nodes(7);
    auto split = [](std::string col, double thr, int order, int left, int right) {
        TreeNode n;
        n.split = SplitRule{std::move(col), SplitRule::Kind::threshold, thr, {}, order};
        n.left = left;
        n.right = right;
        return n;
    };
    auto leaf = [](double mean) {
        TreeNode n;
        n.mean = mean;
        return n;
    };
    nodes[0] = split("x1", 36.0, 1, 1, 2);
    nodes[1] = split("x2", 29.0, 2, 3, 4);
    nodes[2] = split("x2", 47.0, 3, 5, 6);
    nodes[3] = leaf(0.21);
    nodes[4] = leaf(0.51);
    nodes[5] = leaf(0.65);
    nodes[6] = leaf(0.90);
    return TreeModel::from_nodes(std::move(schema), "RESP", std::move(nodes), 0);
}

double p_model(int id, const SimRecord& r, const TreeModel* model5) {
    check_domain(r);
    const double x1 = r.x[0], x2 = r.x[1], x3 = r.x[2];
    switch (id) {
        case 1:
            return sigmoid(0.003 * (1.0 + 3.0 * x1 - 2.0 * x2 + 3.0 * x3));
        case 2:
            return sigmoid(0.0001 *
                           (x1 + 2.0 * x2 - 3.0 * x3 - x1 * x2 + 2.0 * x1 * x3 + x3 * x3));
        case 3:
            return sigmoid(0.0001 * (r.c1 * x2 * x3 - x1 * x2 + 2.0 * x1 * x3 +
                                     r.c2 * x3 * x3));
        case 4:
            return x1 > 35.0 ? sigmoid(0.01 * (x1 - x2)) : sigmoid(0.01 * (2.0 * x1 + x2));
        case 5: {
            if (model5) return tree_propensity(*model5, r);
            static const TreeModel default_tree = default_model5_tree();
            return tree_propensity(default_tree, r);
        }
        default:
            throw ConfigError("simulation model id must be 1..5");
    }
}

SimData gen_sim_data(int id, std::size_t n, std::uint64_t seed, const TreeModel* model5) {
    if (n < 1) throw ConfigError("simulation needs n >= 1");
    if (id < 1 || id > 5) throw ConfigError("simulation model id must be 1..5");

    Rng rng(seed);
    std::vector<SimRecord> records(n);
    for (std::size_t v = 0; v < 4; ++v)
        for (std::size_t i = 0; i < n; ++i)
            records[i].x[v] = static_cast<double>(rng.uniform_int(0, 100));
    for (std::size_t i = 0; i < n; ++i) records[i].c1 = rng.binomial(4, 0.2);
    for (std::size_t i = 0; i < n; ++i) records[i].c2 = rng.bernoulli(0.3) ? 1 : 0;

    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = p_model(id, records[i], model5);

    std::vector<std::int32_t> response(n);
    for (std::size_t i = 0; i < n; ++i) response[i] = rng.bernoulli(p[i]) ? 1 : 0;

    std::vector<ColumnSchema> schema{
        {"x1", ColumnKind::numeric, {}},
        {"x2", ColumnKind::numeric, {}},
        {"x3", ColumnKind::numeric, {}},
        {"x4", ColumnKind::numeric, {}},
        {"c1", ColumnKind::nominal, {"0", "1", "2", "3", "4"}},
        {"c2", ColumnKind::binary, {}},
        {"RESP", ColumnKind::binary, {}}};
    std::vector<std::vector<double>> numeric(7);
    std::vector<std::vector<std::int32_t>> codes(7);
    for (std::size_t v = 0; v < 4; ++v) {
        numeric[v].resize(n);
        for (std::size_t i = 0; i < n; ++i) numeric[v][i] = records[i].x[v];
    }
    codes[4].resize(n);
    codes[5].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        codes[4][i] = records[i].c1;
        codes[5][i] = records[i].c2;
    }
    codes[6] = std::move(response);
    Dataset dataset(std::move(schema), std::move(numeric), std::move(codes), "RESP");
    return SimData{std::move(dataset), std::move(p)};
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted.front();
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

BoxStats box_stats(std::vector<double>& errors) {
    BoxStats out;
    out.count = errors.size();
    if (errors.empty()) return out;
    std::sort(errors.begin(), errors.end());
    out.q1 = quantile_sorted(errors, 0.25);
    out.median = quantile_sorted(errors, 0.5);
    out.q3 = quantile_sorted(errors, 0.75);
    const double iqr = out.q3 - out.q1;
    const double lo_fence = out.q1 - 1.5 * iqr;
    const double hi_fence = out.q3 + 1.5 * iqr;
    out.whisker_low = errors.back();
    out.whisker_high = errors.front();
    std::uint64_t outliers = 0;
    for (const double e : errors) {
        if (e < lo_fence || e > hi_fence) {
            ++outliers;
            continue;
        }
        out.whisker_low = std::min(out.whisker_low, e);
        out.whisker_high = std::max(out.whisker_high, e);
    }
    out.outliers = outliers;
    return out;
}

struct ReplicateOutput {
    bool ok = false;
    // errors per quartile bin per method
    std::array<std::vector<double>, 4> tree_errors;
    std::array<std::vector<double>, 4> logit_errors;
    std::vector<double> true_p;
};

ReplicateOutput run_replicate(const SimConfig& config, int replicate) {
    ReplicateOutput out;
    const std::uint64_t data_seed =
        derive_seed(config.seed, static_cast<std::uint64_t>(replicate) * 4 + 0);
    const std::uint64_t cv_seed =
        derive_seed(config.seed, static_cast<std::uint64_t>(replicate) * 4 + 1);
    const TreeModel* m5 = config.model5 ? &*config.model5 : nullptr;
    const SimData fit_data = gen_sim_data(config.model_id, config.n, data_seed, m5);

    GrowConfig grow;
    grow.k_max = config.k_max;
    grow.columns = {"x1", "x2", "x3", "x4", "c1", "c2"};

    TreeModel tree = [&] {
        SelectionResult sel = fit_with_selection(fit_data.dataset, grow, cv_seed);
        return std::move(sel.model);
    }();
    LogisticModel logit =
        stepwise_select(fit_data.dataset, quadratic_scope(fit_data.dataset), "RESP");

    const SimData* eval_data = &fit_data;
    std::optional<SimData> fresh;
    if (config.fresh_eval) {
        fresh = gen_sim_data(config.model_id, config.n,
                             derive_seed(config.seed,
                                         static_cast<std::uint64_t>(replicate) * 4 + 2),
                             m5);
        eval_data = &*fresh;
    }

    const std::size_t n = eval_data->dataset.n_rows();
    const BoundTree bound(tree, eval_data->dataset);
    const LogisticPredictor predictor(logit, eval_data->dataset);

    // Rank-based quartile bins of true p (ties broken by record index).
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return eval_data->true_p[a] < eval_data->true_p[b];
    });
    std::vector<int> bin_of(n, 0);
    const std::size_t base = n / 4, rem = n % 4;
    std::size_t pos = 0;
    for (int b = 0; b < 4; ++b) {
        const std::size_t size = base + (static_cast<std::size_t>(b) < rem ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) bin_of[order[pos++]] = b;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double truth = eval_data->true_p[i];
        const auto b = static_cast<std::size_t>(bin_of[i]);
        out.tree_errors[b].push_back(bound.predict(i) - truth);
        out.logit_errors[b].push_back(predictor.probability(i) - truth);
        out.true_p.push_back(truth);
    }
    out.ok = true;
    return out;
}

}  // namespace

SimReport run_comparison(const SimConfig& config) {
    if (config.replicates < 1) throw ConfigError("simulation needs replicates >= 1");
    if (config.model_id < 1 || config.model_id > 5)
        throw ConfigError("simulation model id must be 1..5");

    std::vector<ReplicateOutput> outputs(static_cast<std::size_t>(config.replicates));
    parallel_for(outputs.size(), [&](std::size_t r) {
        try {
            outputs[r] = run_replicate(config, static_cast<int>(r));
        } catch (const Error&) {
            outputs[r].ok = false;  // recorded below
        }
    });

    SimReport report;
    report.model_id = config.model_id;
    report.replicates = config.replicates;
    report.n = config.n;

    std::array<std::vector<double>, 4> tree_pool, logit_pool;
    std::vector<double> p_pool;
    int failed = 0;
    for (auto& out : outputs) {
        if (!out.ok) {
            ++failed;
            continue;
        }
        for (std::size_t b = 0; b < 4; ++b) {
            tree_pool[b].insert(tree_pool[b].end(), out.tree_errors[b].begin(),
                                out.tree_errors[b].end());
            logit_pool[b].insert(logit_pool[b].end(), out.logit_errors[b].begin(),
                                 out.logit_errors[b].end());
        }
        p_pool.insert(p_pool.end(), out.true_p.begin(), out.true_p.end());
    }

    auto summarize = [&](std::array<std::vector<double>, 4>& pool) {
        MethodReport m;
        m.failed_replicates = failed;
        double abs_sum = 0.0;
        for (std::size_t b = 0; b < 4; ++b) {
            for (const double e : pool[b]) abs_sum += std::abs(e);
            m.records += pool[b].size();
            m.quartiles[b] = box_stats(pool[b]);
        }
        m.mean_abs_error = m.records ? abs_sum / static_cast<double>(m.records) : 0.0;
        return m;
    };
    report.tree = summarize(tree_pool);
    report.logistic = summarize(logit_pool);

    std::sort(p_pool.begin(), p_pool.end());
    if (!p_pool.empty()) {
        const double mean =
            std::accumulate(p_pool.begin(), p_pool.end(), 0.0) /
            static_cast<double>(p_pool.size());
        report.p_summary = {p_pool.front(), quantile_sorted(p_pool, 0.25),
                            quantile_sorted(p_pool, 0.5), mean,
                            quantile_sorted(p_pool, 0.75), p_pool.back()};
    }
    return report;
}

std::string sim_report_csv(const SimReport& report) {
    std::ostringstream out;
    out << "method,quartile,count,q1,median,q3,whisker_low,whisker_high,outliers,"
           "mean_abs_error,failed_replicates\n";
    auto rows = [&](const char* method, const MethodReport& m) {
        for (std::size_t b = 0; b < 4; ++b) {
            const BoxStats& s = m.quartiles[b];
            out << method << ",Q" << (b + 1) << ',' << s.count << ','
                << detail::format_double(s.q1) << ',' << detail::format_double(s.median)
                << ',' << detail::format_double(s.q3) << ','
                << detail::format_double(s.whisker_low) << ','
                << detail::format_double(s.whisker_high) << ',' << s.outliers << ",,\n";
        }
        out << method << ",all," << m.records << ",,,,,,,"
            << detail::format_double(m.mean_abs_error) << ',' << m.failed_replicates
            << '\n';
    };
    rows("tree", report.tree);
    rows("logistic", report.logistic);
    return out.str();
}

std::string sim_p_summary_csv(const SimReport& report) {
    std::ostringstream out;
    out << "model,min,q1,median,mean,q3,max\n";
    out << report.model_id;
    for (const double v : report.p_summary) out << ',' << detail::format_double(v);
    out << '\n';
    return out.str();
}

}  // namespace proptree
