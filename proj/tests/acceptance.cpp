// Acceptance suite: end-to-end checks of the library against its frozen
// reference values and statistical targets. One line per criterion is
// printed so a run can be audited at a glance.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "proptree/bias.hpp"
#include "proptree/linear_form.hpp"
#include "proptree/logistic.hpp"
#include "proptree/model_selection.hpp"
#include "proptree/rng.hpp"
#include "proptree/simulation.hpp"
#include "proptree/synthetic.hpp"
#include "proptree/tree.hpp"
#include "support/builders.hpp"
#include "support/oracle.hpp"

using namespace proptree;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[acceptance] criterion %d (%s): %s%s%s\n", id, name.c_str(),
                pass ? "PASS" : "FAIL", detail.empty() ? "" : " | ", detail.c_str());
    std::fflush(stdout);
}

}  // namespace

TEST_CASE("criterion 1: stopping-rule replication") {
    const auto start = Clock::now();
    const int survey = select_k(testsupport::survey_collected_trace());
    const int central = select_k(testsupport::centrally_collected_trace());
    const double elapsed = seconds_since(start);
    const bool pass = survey == 6 && central == 1 && elapsed < 0.001;
    report(1, "stopping-rule replication", pass,
           "survey k=" + std::to_string(survey) + " central k=" + std::to_string(central) +
               " in " + std::to_string(elapsed * 1e6) + "us");
    CHECK(survey == 6);
    CHECK(central == 1);
    CHECK(elapsed < 0.001);
}

TEST_CASE("criterion 2: propensity summary replication") {
    const auto start = Clock::now();
    const double reference[5][6] = {{0.36, 0.58, 0.65, 0.64, 0.71, 0.86},
                                    {0.28, 0.52, 0.61, 0.63, 0.73, 0.95},
                                    {0.27, 0.48, 0.53, 0.55, 0.61, 0.97},
                                    {0.35, 0.52, 0.60, 0.60, 0.68, 0.85},
                                    {0.21, 0.51, 0.65, 0.65, 0.90, 0.90}};
    bool pass = true;
    std::string detail;
    for (int id = 1; id <= 5; ++id) {
        const SimData data = gen_sim_data(id, 100000, 1);
        std::vector<double> p = data.true_p;
        std::sort(p.begin(), p.end());
        const double mean =
            std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
        const double summary[6] = {p.front(),
                                   quantile_sorted(p, 0.25),
                                   quantile_sorted(p, 0.5),
                                   mean,
                                   quantile_sorted(p, 0.75),
                                   p.back()};
        bool model_ok = true;
        for (int j = 0; j < 6; ++j) {
            const bool entry_ok =
                std::abs(summary[j] - reference[id - 1][j]) <= 0.02;
            model_ok &= entry_ok;
            CHECK_MESSAGE(entry_ok, "model ", id, " entry ", j, ": got ", summary[j],
                          " want ", reference[id - 1][j], " +-0.02");
        }
        pass &= model_ok;
        detail += "m" + std::to_string(id) + (model_ok ? ":ok " : ":MISS ");
    }
    const double elapsed = seconds_since(start);
    pass &= elapsed < 10.0;
    report(2, "propensity summary replication", pass,
           detail + "in " + std::to_string(elapsed) + "s");
    CHECK(elapsed < 10.0);
}

TEST_CASE("criterion 3: method-ordering study") {
    const auto start = Clock::now();
    auto count_wins = [&](int model_id, std::uint64_t seed_base) {
        int wins = 0;
        for (std::uint64_t study = 0; study < 100; ++study) {
            SimConfig config;
            config.model_id = model_id;
            config.replicates = 100;
            config.n = 500;
            config.seed = derive_seed(seed_base, study);
            const SimReport r = run_comparison(config);
            const bool win = model_id == 1
                                 ? r.logistic.mean_abs_error <= r.tree.mean_abs_error
                                 : r.tree.mean_abs_error < r.logistic.mean_abs_error;
            wins += win ? 1 : 0;
        }
        return wins;
    };
    const int model1_wins = count_wins(1, 0xACC3'0001ULL);
    const int model5_wins = count_wins(5, 0xACC3'0005ULL);
    const double elapsed = seconds_since(start);
    const bool pass = model1_wins >= 80 && model5_wins >= 80;
    report(3, "method-ordering study", pass,
           "model1 logistic<=tree in " + std::to_string(model1_wins) +
               "/100, model5 tree<logistic in " + std::to_string(model5_wins) + "/100, " +
               std::to_string(elapsed) + "s");
    CHECK(model1_wins >= 80);
    CHECK(model5_wins >= 80);
}

TEST_CASE("criterion 4: split-search oracle equivalence") {
    Rng rng(0xACC4ULL);
    int exact_matches = 0;
    const int cases = 200;
    for (int rep = 0; rep < cases; ++rep) {
        const std::size_t n = 5 + rng.next_below(56);  // n <= 60
        const std::size_t n_cols = 1 + rng.next_below(4);
        std::vector<testsupport::ColumnSpec> cols;
        std::vector<std::string> names;
        for (std::size_t c = 0; c < n_cols; ++c) {
            const std::string name = "v" + std::to_string(c);
            names.push_back(name);
            switch (rng.next_below(4)) {
                case 0: {
                    std::vector<double> x(n);
                    for (auto& v : x) v = static_cast<double>(rng.next_below(10));
                    cols.push_back(testsupport::num_col(name, x));
                    break;
                }
                case 1: {
                    const std::size_t arity = 2 + rng.next_below(5);  // <= 6
                    std::vector<std::string> levels;
                    for (std::size_t l = 0; l < arity; ++l)
                        levels.push_back("L" + std::to_string(l));
                    std::vector<std::int32_t> codes(n);
                    for (auto& v : codes) v = static_cast<std::int32_t>(rng.next_below(arity));
                    cols.push_back(testsupport::nom_col(name, levels, codes));
                    break;
                }
                case 2: {
                    std::vector<std::int32_t> codes(n);
                    for (auto& v : codes) v = static_cast<std::int32_t>(rng.next_below(4));
                    cols.push_back(
                        testsupport::ord_col(name, {"1", "2", "3", "4"}, codes));
                    break;
                }
                default: {
                    std::vector<std::int32_t> codes(n);
                    for (auto& v : codes) v = rng.bernoulli(0.5) ? 1 : 0;
                    cols.push_back(testsupport::bin_col(name, codes));
                }
            }
        }
        std::vector<std::int32_t> resp(n);
        for (auto& v : resp) v = rng.bernoulli(0.5) ? 1 : 0;
        cols.push_back(testsupport::bin_col("RESP", resp));
        const Dataset ds = testsupport::make_dataset(std::move(cols), "RESP");
        const std::uint64_t min_leaf = 1 + rng.next_below(3);

        const auto fast = best_split(ds, testsupport::all_rows(ds), names, min_leaf);
        const auto brute =
            testsupport::oracle_best_split(ds, testsupport::all_rows(ds), names, min_leaf);
        const bool same_presence = fast.has_value() == brute.has_value();
        bool same_value = same_presence;
        if (fast && brute) {
            same_value = fast->sse_reduction == brute->sse_reduction;  // bitwise
            if (brute->argmax_size == 1) same_value &= fast->rule == brute->rule;
        }
        CHECK(same_presence);
        CHECK(same_value);
        exact_matches += same_presence && same_value ? 1 : 0;
    }
    const bool pass = exact_matches == cases;
    report(4, "split-search oracle equivalence", pass,
           std::to_string(exact_matches) + "/" + std::to_string(cases) + " bitwise-equal");
    CHECK(exact_matches == cases);
}

namespace {

SyntheticSpec acceptance_tree_spec(std::uint64_t seed, std::uint64_t n) {
    SyntheticSpec spec;
    spec.n = n;
    spec.seed = seed;
    spec.features.push_back(
        {{"EMPL", ColumnKind::numeric, {}}, {FeatureDist::Type::uniform_int, 1, 200, {}}});
    spec.features.push_back({{"IND", ColumnKind::nominal, {"a", "b", "c", "d"}},
                             {FeatureDist::Type::categorical, 0, 0, {2, 1, 1, 1}}});
    spec.features.push_back({{"MSA", ColumnKind::ordinal, {"1", "2", "3", "4", "5", "6"}},
                             {FeatureDist::Type::categorical, 0, 0, {1, 1, 1, 1, 1, 2}}});
    spec.features.push_back(
        {{"AUX", ColumnKind::binary, {}}, {FeatureDist::Type::bernoulli, 0.3, 0, {}}});

    std::vector<ColumnSchema> schema{{"EMPL", ColumnKind::numeric, {}},
                                     {"IND", ColumnKind::nominal, {"a", "b", "c", "d"}},
                                     {"MSA", ColumnKind::ordinal, {"1", "2", "3", "4", "5", "6"}},
                                     {"RESP", ColumnKind::binary, {}}};
    std::vector<TreeNode> nodes(7);
    nodes[0].split = SplitRule{"EMPL", SplitRule::Kind::threshold, 50.5, {}, 1};
    nodes[0].left = 1;
    nodes[0].right = 2;
    nodes[1].split = SplitRule{"IND", SplitRule::Kind::subset, 0.0, {0, 1}, 2};
    nodes[1].left = 3;
    nodes[1].right = 4;
    nodes[2].split = SplitRule{"EMPL", SplitRule::Kind::threshold, 120.5, {}, 3};
    nodes[2].left = 5;
    nodes[2].right = 6;
    nodes[3].mean = 0.85;
    nodes[4].mean = 0.70;
    nodes[5].mean = 0.60;
    nodes[6].mean = 0.45;
    spec.propensity.type = PropensityModel::Type::tree;
    spec.propensity.tree = TreeModel::from_nodes(std::move(schema), "RESP", std::move(nodes), 0);
    return spec;
}

}  // namespace

TEST_CASE("criterion 5: linear-form identities") {
    bool pass = true;
    std::uint64_t records = 0;
    for (const std::uint64_t seed : {11ull, 22ull, 33ull, 44ull}) {
        const Dataset ds = generate_synthetic(acceptance_tree_spec(seed, 4000));
        for (const int k_max : {0, 2, 5}) {
            const TreeModel tree =
                grow_tree(ds, {k_max, 0, {"EMPL", "IND", "MSA", "AUX"}});
            const SplitForm split = to_split_form(tree);
            const CellForm cells = to_cell_form(tree);
            const BoundTree bound(tree, ds);
            const SplitFormEvaluator split_eval(split, ds);
            const CellFormEvaluator cell_eval(cells, ds);

            double respondent_sum = 0.0, cell_sum = 0.0;
            for (std::size_t i = 0; i < ds.n_rows(); ++i) {
                const double truth = bound.predict(i);
                const bool row_ok = std::abs(truth - split_eval.value(i)) <= 1e-12 &&
                                    std::abs(truth - cell_eval.value(i)) <= 1e-12;
                pass &= row_ok;
                CHECK(row_ok);
                respondent_sum += ds.response(i);
                ++records;
            }
            for (const auto& cell : cells.cells) cell_sum += cell.target_sum;
            const bool sum_ok = cell_sum == respondent_sum;
            pass &= sum_ok;
            CHECK(sum_ok);
        }
    }
    report(5, "linear-form identities", pass,
           std::to_string(records) + " record evaluations across 12 trees");
}

TEST_CASE("criterion 6: cross-validation formula fidelity") {
    bool identities_ok = true;
    {
        const Dataset ds = generate_synthetic(acceptance_tree_spec(7, 2000));
        const CVTrace trace = cv_trace(ds, {3, 0, {"EMPL", "IND", "MSA", "AUX"}}, 3, 13);
        for (const auto& entry : trace.entries) {
            double esum = 0.0;
            for (const double e : entry.fold_errors) esum += e;
            const double eps = esum / 10.0;
            double dev = 0.0;
            for (const double e : entry.fold_errors) dev += (e - eps) * (e - eps);
            identities_ok &= std::abs(entry.epsilon_sq - eps) <= 1e-12;
            identities_ok &= std::abs(entry.r_sq - eps / trace.alpha_sq0) <= 1e-12;
            identities_ok &=
                std::abs(entry.sigma - std::sqrt(dev / (9.0 * trace.alpha_sq0))) <= 1e-12;
        }
        CHECK(identities_ok);
    }

    int in_band = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SyntheticSpec spec;
        spec.n = 1000;
        spec.seed = derive_seed(0xACC6ULL, seed);
        spec.features.push_back(
            {{"A", ColumnKind::numeric, {}}, {FeatureDist::Type::uniform_real, 0, 1, {}}});
        spec.features.push_back(
            {{"B", ColumnKind::numeric, {}}, {FeatureDist::Type::uniform_real, 0, 1, {}}});
        spec.propensity.constant = 0.6;
        const Dataset ds = generate_synthetic(spec);
        const CVTrace trace =
            cv_trace(ds, {0, 0, {"A", "B"}}, 0, derive_seed(0xACC7ULL, seed));
        const double r0 = trace.entries[0].r_sq;
        if (r0 >= 0.9 && r0 <= 1.1) ++in_band;
    }
    const bool pass = identities_ok && in_band >= 48;
    report(6, "cross-validation formula fidelity", pass,
           "identities to 1e-12; r2_0 in [0.9,1.1] for " + std::to_string(in_band) + "/50");
    CHECK(in_band >= 48);
}

TEST_CASE("criterion 7: logistic correctness") {
    // Intercept-only maximum likelihood equals the log odds of the mean.
    std::vector<std::int32_t> y(1000, 0);
    for (std::size_t i = 0; i < 750; ++i) y[i] = 1;
    const Dataset intercept_ds = testsupport::make_dataset(
        {testsupport::num_col("x", std::vector<double>(1000, 1.0)),
         testsupport::bin_col("RESP", y)},
        "RESP");
    const LogisticModel intercept_model =
        fit_logistic(intercept_ds, {TermSpec::intercept()}, "RESP");
    const bool mle_ok = std::abs(intercept_model.beta[0] - std::log(3.0)) <= 1e-8;
    CHECK(mle_ok);

    // Analytic score vs central finite differences at 100 random points.
    Rng rng(0xACC8ULL);
    std::vector<double> x1(80), x2(80);
    std::vector<std::int32_t> g(80), resp(80);
    for (std::size_t i = 0; i < 80; ++i) {
        x1[i] = rng.uniform_real(-2, 2);
        x2[i] = rng.uniform_real(0.5, 4);
        g[i] = static_cast<std::int32_t>(rng.next_below(3));
        resp[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    const Dataset grad_ds = testsupport::make_dataset(
        {testsupport::num_col("x1", x1), testsupport::num_col("x2", x2),
         testsupport::nom_col("g", {"a", "b", "c"}, g), testsupport::bin_col("RESP", resp)},
        "RESP");
    const std::vector<TermSpec> grad_terms{
        TermSpec::intercept(), TermSpec::main("x1"), TermSpec::main("g"),
        TermSpec::quadratic("x2"), TermSpec::interaction({{"x1", false}, {"x2", false}})};
    bool grad_ok = true;
    for (int point = 0; point < 100; ++point) {
        std::vector<double> beta(6);
        for (auto& b : beta) b = rng.uniform_real(-0.5, 0.5);
        const std::vector<double> grad = logistic_gradient(grad_ds, grad_terms, "RESP", beta);
        for (std::size_t j = 0; j < beta.size(); ++j) {
            const double h = 1e-5 * std::max(1.0, std::abs(beta[j]));
            auto up = beta, down = beta;
            up[j] += h;
            down[j] -= h;
            const double fd = (logistic_loglik(grad_ds, grad_terms, "RESP", up) -
                               logistic_loglik(grad_ds, grad_terms, "RESP", down)) /
                              (2.0 * h);
            grad_ok &= std::abs(grad[j] - fd) <= 1e-5 * std::max(1.0, std::abs(fd));
        }
    }
    CHECK(grad_ok);

    // Known-coefficient recovery at n = 50,000.
    int recovered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng gen(derive_seed(0xACC9ULL, seed));
        const std::size_t n = 50000;
        std::vector<double> a(n), b(n);
        std::vector<std::int32_t> r(n);
        const double b0 = 0.3, b1 = -0.7, b2 = 0.45;
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = gen.uniform_real(-2, 2);
            b[i] = gen.uniform_real(-2, 2);
            const double z = b0 + b1 * a[i] + b2 * b[i];
            r[i] = gen.bernoulli(1.0 / (1.0 + std::exp(-z))) ? 1 : 0;
        }
        const Dataset ds = testsupport::make_dataset(
            {testsupport::num_col("a", a), testsupport::num_col("b", b),
             testsupport::bin_col("RESP", r)},
            "RESP");
        const LogisticModel model = fit_logistic(
            ds, {TermSpec::intercept(), TermSpec::main("a"), TermSpec::main("b")}, "RESP");
        if (std::abs(model.beta[0] - b0) <= 3 * model.se[0] &&
            std::abs(model.beta[1] - b1) <= 3 * model.se[1] &&
            std::abs(model.beta[2] - b2) <= 3 * model.se[2])
            ++recovered;
    }
    const bool pass = mle_ok && grad_ok && recovered >= 95;
    report(7, "logistic correctness", pass,
           "intercept MLE 1e-8, gradient checks, recovery " + std::to_string(recovered) +
               "/100");
    CHECK(recovered >= 95);
}

TEST_CASE("criterion 8: disjoint-panel validation") {
    SyntheticSpec spec_a = acceptance_tree_spec(0xA11CE, 50000);
    SyntheticSpec spec_b = spec_a;
    spec_b.seed = 0xB0B;
    const Dataset panel_a = generate_synthetic(spec_a);
    const Dataset panel_b = generate_synthetic(spec_b);

    const SelectionResult sel =
        fit_with_selection(panel_a, {8, 0, {"EMPL", "IND", "MSA", "AUX"}}, 77);
    const CellForm fit_cells = to_cell_form(sel.model);
    const RefitResult re = refit(sel.model, panel_b, "RESP");

    bool pass = true;
    std::string detail = "k=" + std::to_string(sel.k_selected) + ";";
    for (std::size_t c = 0; c < fit_cells.cells.size(); ++c) {
        const auto& a = fit_cells.cells[c];
        const auto& b = re.cell_form.cells[c];
        const bool defined = b.defined;
        const double bound =
            4.0 * std::sqrt(a.mu * (1.0 - a.mu) / static_cast<double>(b.count));
        const bool cell_ok = defined && std::abs(a.mu - b.mu) <= bound;
        pass &= cell_ok;
        CHECK(cell_ok);
        char buf[64];
        std::snprintf(buf, sizeof(buf), " |%0.4f-%0.4f|<=%.4f", a.mu, b.mu, bound);
        detail += buf;
    }
    report(8, "disjoint-panel validation", pass, detail);
}

TEST_CASE("criterion 9: planted-gap detection") {
    int exact_detections = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SyntheticSpec spec = testsupport::planted_one_split_spec(
            50000, derive_seed(0xACCAULL, seed), 0.8, 0.6);
        OutcomeModel outcome;
        outcome.name = "WAGE";
        outcome.cell_means = {8000.0, 9000.0};
        outcome.nonrespondent_shifts = {0.0, 500.0};
        outcome.noise_sd = 1000.0;
        spec.outcome = outcome;
        const Dataset ds = generate_synthetic(spec);
        const CellForm cells = to_cell_form(*spec.propensity.tree);
        GapConfig config;
        config.threshold = 250.0;
        const GapReport rep = cell_gaps(cells, ds, "WAGE", "RESP", config);
        if (!rep.cells[0].flagged && rep.cells[1].flagged) ++exact_detections;
    }
    const bool pass = exact_detections >= 95;
    report(9, "planted-gap detection", pass,
           std::to_string(exact_detections) + "/100 seeds flagged exactly the planted cell");
    CHECK(exact_detections >= 95);
}
