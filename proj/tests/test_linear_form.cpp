#include <doctest.h>

#include <cmath>
#include <set>

#include "proptree/linear_form.hpp"
#include "proptree/rng.hpp"
#include "proptree/synthetic.hpp"
#include "proptree/tree.hpp"
#include "support/builders.hpp"

using namespace proptree;
using testsupport::all_rows;
using testsupport::bin_col;
using testsupport::four_row_dataset;
using testsupport::make_dataset;
using testsupport::num_col;
using testsupport::planted_one_split_spec;
using testsupport::published_survey_tree;

namespace {

TreeModel zero_split_tree(double mean) {
    std::vector<ColumnSchema> schema{{"x", ColumnKind::numeric, {}},
                                     {"RESP", ColumnKind::binary, {}}};
    std::vector<TreeNode> nodes(1);
    nodes[0].mean = mean;
    nodes[0].count = 100;
    return TreeModel::from_nodes(std::move(schema), "RESP", std::move(nodes), 1);
}

}  // namespace

TEST_CASE("zero-split forms are the base rate alone") {
    const TreeModel tree = zero_split_tree(0.75);
    const SplitForm split = to_split_form(tree);
    CHECK(split.intercept == 0.75);
    CHECK(split.terms.empty());
    const CellForm cells = to_cell_form(tree);
    REQUIRE(cells.cells.size() == 1);
    CHECK(cells.cells[0].id == 1);
    CHECK(cells.cells[0].mu == 0.75);
    CHECK(cells.cells[0].predicate.empty());
}

TEST_CASE("the published six-split model reproduces its coefficient table") {
    const TreeModel tree = published_survey_tree();
    const SplitForm form = to_split_form(tree);

    CHECK(form.intercept == 0.8883);
    REQUIRE(form.terms.size() == 6);
    // Terms ordered by growth order; coefficients with 1e-12 of the table.
    CHECK(std::abs(form.terms[0].beta - (-0.1411)) <= 1e-12);
    CHECK(std::abs(form.terms[1].beta - (-0.1036)) <= 1e-12);
    CHECK(std::abs(form.terms[2].beta - (-0.1691)) <= 1e-12);
    CHECK(std::abs(form.terms[3].beta - (-0.0810)) <= 1e-12);
    CHECK(std::abs(form.terms[4].beta - (-0.1579)) <= 1e-12);
    CHECK(std::abs(form.terms[5].beta - (-0.0707)) <= 1e-12);

    CHECK(predicate_text(form.terms[0].predicate, form.schema) == "EMPL > 20");
    CHECK(predicate_text(form.terms[1].predicate, form.schema) ==
          "EMPL > 20 and IND in {information, finance, professional}");
    CHECK(predicate_text(form.terms[3].predicate, form.schema) ==
          "EMPL > 20 and IND not in {information, finance, professional} and MSA > '5'");

    // Path sum for a large white-collar multi-unit record: the published
    // arithmetic 0.8883 - 0.1411 - 0.1036 - 0.1691 = 0.4745.
    const Dataset record = make_dataset(
        {num_col("EMPL", {50}),
         testsupport::nom_col("IND",
                              {"mining", "construction", "manufacturing", "trade",
                               "information", "finance", "professional", "education",
                               "leisure", "other", "government"},
                              {5}),
         num_col("MULTI", {3}), testsupport::ord_col("MSA", {"1", "2", "3", "4", "5", "6"}, {1}),
         bin_col("RESP", {1})},
        "RESP");
    const SplitFormEvaluator eval(form, record);
    CHECK(std::abs(eval.value(0) - 0.4745) <= 1e-12);
    CHECK(std::abs(eval.value(0) - predict(tree, record, 0)) <= 1e-12);
}

TEST_CASE("four-record tree yields the two perfect cells") {
    const Dataset ds = four_row_dataset();
    const TreeModel tree = grow_tree(ds, {1, 1, {"x"}});
    const CellForm cells = to_cell_form(tree);
    REQUIRE(cells.cells.size() == 2);
    CHECK(cells.cells[0].mu == 0.0);
    CHECK(cells.cells[0].count == 2);
    CHECK(cells.cells[1].mu == 1.0);
    CHECK(cells.cells[1].count == 2);

    // Respondent identity: sum of cell sums equals the respondent count.
    double respondents = 0.0;
    for (const auto& cell : cells.cells) respondents += cell.target_sum;
    CHECK(respondents == 2.0);

    SUBCASE("cell_assign routes records to the right cell") {
        CHECK(cell_assign(cells, ds, 3) == 2);  // x = 4 takes the x > 2.5 cell
        CHECK(cell_assign(cells, ds, 0) == 1);
        const TreeModel zero = zero_split_tree(0.5);
        const CellForm one = to_cell_form(zero);
        const Dataset any = make_dataset({num_col("x", {42}), bin_col("RESP", {1})}, "RESP");
        CHECK(cell_assign(one, any, 0) == 1);
    }
}

namespace {

SyntheticSpec mixed_tree_spec(std::uint64_t seed, std::uint64_t n) {
    SyntheticSpec spec;
    spec.n = n;
    spec.seed = seed;
    spec.features.push_back(
        {{"EMPL", ColumnKind::numeric, {}}, {FeatureDist::Type::uniform_int, 1, 60, {}}});
    spec.features.push_back({{"IND", ColumnKind::nominal, {"a", "b", "c", "d"}},
                             {FeatureDist::Type::categorical, 0, 0, {2, 1, 1, 2}}});
    spec.features.push_back({{"MSA", ColumnKind::ordinal, {"1", "2", "3", "4", "5", "6"}},
                             {FeatureDist::Type::categorical, 0, 0, {1, 1, 1, 1, 1, 2}}});
    spec.features.push_back(
        {{"AUX", ColumnKind::binary, {}}, {FeatureDist::Type::bernoulli, 0.3, 0, {}}});

    std::vector<ColumnSchema> schema{{"EMPL", ColumnKind::numeric, {}},
                                     {"IND", ColumnKind::nominal, {"a", "b", "c", "d"}},
                                     {"MSA", ColumnKind::ordinal, {"1", "2", "3", "4", "5", "6"}},
                                     {"RESP", ColumnKind::binary, {}}};
    std::vector<TreeNode> nodes(7);
    nodes[0].split = SplitRule{"EMPL", SplitRule::Kind::threshold, 30.5, {}, 1};
    nodes[0].left = 1;
    nodes[0].right = 2;
    nodes[1].split = SplitRule{"IND", SplitRule::Kind::subset, 0.0, {0, 3}, 2};
    nodes[1].left = 3;
    nodes[1].right = 4;
    nodes[2].split = SplitRule{"MSA", SplitRule::Kind::threshold, 4.5, {}, 3};
    nodes[2].left = 5;
    nodes[2].right = 6;
    nodes[3].mean = 0.92;
    nodes[4].mean = 0.75;
    nodes[5].mean = 0.62;
    nodes[6].mean = 0.45;
    spec.propensity.type = PropensityModel::Type::tree;
    spec.propensity.tree = TreeModel::from_nodes(std::move(schema), "RESP", std::move(nodes), 0);
    return spec;
}

}  // namespace

TEST_CASE("tree, split form and cell form agree on every record") {
    for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const Dataset ds = generate_synthetic(mixed_tree_spec(seed, 800));
        const TreeModel tree =
            grow_tree(ds, {4, 0, {"EMPL", "IND", "MSA", "AUX"}});
        const SplitForm split = to_split_form(tree);
        const CellForm cells = to_cell_form(tree);
        REQUIRE(static_cast<int>(split.terms.size()) == tree.k());

        const BoundTree bound(tree, ds);
        const SplitFormEvaluator split_eval(split, ds);
        const CellFormEvaluator cell_eval(cells, ds);
        double mu_count_sum = 0.0, respondent_sum = 0.0, target_sum_total = 0.0;
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
            const double by_tree = bound.predict(i);
            CHECK(std::abs(by_tree - split_eval.value(i)) <= 1e-12);
            CHECK(std::abs(by_tree - cell_eval.value(i)) <= 1e-12);
            respondent_sum += ds.response(i);
        }
        for (const auto& cell : cells.cells) {
            mu_count_sum += cell.mu * static_cast<double>(cell.count);
            target_sum_total += cell.target_sum;
        }
        CHECK(target_sum_total == respondent_sum);
        CHECK(std::abs(mu_count_sum - respondent_sum) <= 1e-9);
        CHECK(std::abs(mu_count_sum / static_cast<double>(ds.n_rows()) -
                       respondent_sum / static_cast<double>(ds.n_rows())) <= 1e-10);
    }
}

TEST_CASE("cell predicates partition the record space") {
    const Dataset ds = generate_synthetic(mixed_tree_spec(11, 10000));
    const TreeModel tree = grow_tree(ds, {5, 0, {"EMPL", "IND", "MSA", "AUX"}});
    const CellForm cells = to_cell_form(tree);
    const CellFormEvaluator eval(cells, ds);
    // assign throws unless exactly one predicate matches.
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        const int id = eval.assign(i);
        CHECK(id >= 1);
        CHECK(id <= static_cast<int>(cells.cells.size()));
    }
}

TEST_CASE("refit on the fitting data is the identity") {
    const Dataset ds = generate_synthetic(mixed_tree_spec(4, 1200));
    const TreeModel tree = grow_tree(ds, {3, 0, {"EMPL", "IND", "MSA", "AUX"}});
    const SplitForm split = to_split_form(tree);
    const CellForm cells = to_cell_form(tree);
    const RefitResult re = refit(tree, ds, "RESP");
    CHECK(re.split_form.intercept == split.intercept);
    for (std::size_t t = 0; t < split.terms.size(); ++t) {
        CHECK(re.split_form.terms[t].beta == split.terms[t].beta);
        CHECK(re.split_form.terms[t].predicate == split.terms[t].predicate);
    }
    for (std::size_t c = 0; c < cells.cells.size(); ++c) {
        CHECK(re.cell_form.cells[c].mu == cells.cells[c].mu);
        CHECK(re.cell_form.cells[c].count == cells.cells[c].count);
    }
    // The cell-only variant agrees as well.
    const CellForm re_cells = refit_cells(cells, ds, "RESP");
    for (std::size_t c = 0; c < cells.cells.size(); ++c)
        CHECK(re_cells.cells[c].mu == cells.cells[c].mu);
}

TEST_CASE("refit against a numeric outcome recovers per-cell means") {
    SyntheticSpec spec = planted_one_split_spec(4000, 31, 0.85, 0.6);
    OutcomeModel outcome;
    outcome.name = "WAGE";
    outcome.cell_means = {8261.0, 9100.0};
    outcome.noise_sd = 400.0;
    spec.outcome = outcome;
    const Dataset ds = generate_synthetic(spec);
    const TreeModel tree = grow_tree(ds, {1, 0, {"EMPL"}});
    REQUIRE(tree.k() == 1);

    const RefitResult re = refit(tree, ds, "WAGE");
    const BoundTree bound(tree, ds);
    const std::size_t wage = ds.column_index("WAGE");
    for (const auto& cell : re.cell_form.cells) {
        double sum = 0.0;
        std::uint64_t count = 0;
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
            if (bound.leaf_node(i) == cell.leaf_node) {
                sum += ds.numeric_value(wage, i);
                ++count;
            }
        }
        REQUIRE(count == cell.count);
        CHECK(cell.mu == doctest::Approx(sum / static_cast<double>(count)).epsilon(1e-12));
        // The planted means are recovered within a few standard errors.
        const double planted = cell.predicate.front().left ? 8261.0 : 9100.0;
        CHECK(std::abs(cell.mu - planted) < 5.0 * 400.0 / std::sqrt(static_cast<double>(count)));
    }
    CHECK(re.split_form.target == "WAGE");
}

TEST_CASE("empty cells on refit are flagged, not fatal") {
    const Dataset fit_ds = generate_synthetic(mixed_tree_spec(8, 1500));
    const TreeModel tree = grow_tree(fit_ds, {2, 0, {"EMPL", "IND", "MSA", "AUX"}});
    REQUIRE(tree.k() == 2);

    // A scoring panel confined to EMPL <= 5 leaves every large-EMPL cell empty.
    SyntheticSpec small = mixed_tree_spec(9, 400);
    small.features[0].dist = {FeatureDist::Type::uniform_int, 1, 5, {}};
    const Dataset panel = generate_synthetic(small);
    const RefitResult re = refit(tree, panel, "RESP");
    int undefined = 0;
    double covered = 0;
    for (const auto& cell : re.cell_form.cells) {
        if (!cell.defined) {
            ++undefined;
            CHECK(cell.count == 0);
        }
        covered += static_cast<double>(cell.count);
    }
    CHECK(covered == static_cast<double>(panel.n_rows()));
    CHECK(undefined > 0);
}

TEST_CASE("disjoint panels from one truth agree within binomial error") {
    const SyntheticSpec truth = mixed_tree_spec(100, 20000);
    SyntheticSpec panel_b_spec = truth;
    panel_b_spec.seed = 101;
    const Dataset panel_a = generate_synthetic(truth);
    const Dataset panel_b = generate_synthetic(panel_b_spec);

    const TreeModel tree = grow_tree(panel_a, {3, 0, {"EMPL", "IND", "MSA", "AUX"}});
    const CellForm fit_cells = to_cell_form(tree);
    const RefitResult re = refit(tree, panel_b, "RESP");
    for (std::size_t c = 0; c < fit_cells.cells.size(); ++c) {
        const auto& a = fit_cells.cells[c];
        const auto& b = re.cell_form.cells[c];
        REQUIRE(b.defined);
        const double bound = 4.0 * std::sqrt(a.mu * (1.0 - a.mu) /
                                             static_cast<double>(b.count));
        CHECK(std::abs(a.mu - b.mu) <= bound);
    }
}

TEST_CASE("form CSV exports carry the table layout") {
    const TreeModel tree = published_survey_tree();
    const std::string split_csv = split_form_csv(to_split_form(tree));
    CHECK(split_csv.rfind("term,coefficient,std_error,order,defined\n", 0) == 0);
    CHECK(split_csv.find("\n1,0.8883,") != std::string::npos);
    CHECK(split_csv.find("EMPL > 20,") != std::string::npos);
    const std::string cell_csv = cell_form_csv(to_cell_form(tree));
    CHECK(cell_csv.rfind("cell,predicate,count,coefficient,std_error,defined\n", 0) == 0);
}
