#include "proptree/linear_form.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "text_util.hpp"

namespace proptree {

namespace {

int designated_child(const TreeModel& tree, int node_id) {
    const TreeNode& node = tree.nodes()[static_cast<std::size_t>(node_id)];
    const double left_mean = tree.nodes()[static_cast<std::size_t>(node.left)].mean;
    const double right_mean = tree.nodes()[static_cast<std::size_t>(node.right)].mean;
    return left_mean < right_mean ? node.left : node.right;
}

// Leaf reached from `node_id` by always taking the non-designated branch;
// its cell carries the value of every record that satisfies the path to
// `node_id` but none of the deeper term predicates.
int basal_leaf(const TreeModel& tree, int node_id) {
    int cur = node_id;
    while (!tree.nodes()[static_cast<std::size_t>(cur)].is_leaf()) {
        const TreeNode& node = tree.nodes()[static_cast<std::size_t>(cur)];
        const int designated = designated_child(tree, cur);
        cur = designated == node.left ? node.right : node.left;
    }
    return cur;
}

BranchAtom make_atom(const TreeNode& node, bool left) {
    BranchAtom atom;
    atom.rule = *node.split;
    atom.left = left;
    return atom;
}

struct LeafStat {
    double mu = 0.0;
    double se = 0.0;
    bool defined = true;
};

// Shared assembly for to_split_form and refit: leaf_stats maps node id ->
// value/SE of that leaf's cell under the current target.
SplitForm build_split_form(const TreeModel& tree, const std::vector<LeafStat>& leaf_stats,
                           const std::string& target) {
    SplitForm form;
    form.schema = tree.schema();
    form.target = target;

    auto stat_at = [&](int node_id) { return leaf_stats[static_cast<std::size_t>(basal_leaf(tree, node_id))]; };

    const LeafStat root_stat = stat_at(0);
    form.intercept = root_stat.mu;
    form.intercept_se = root_stat.se;
    form.intercept_defined = root_stat.defined;

    // Depth-first walk collecting one term per internal node.
    struct Frame {
        int node_id;
        std::vector<BranchAtom> path;
    };
    std::vector<Frame> stack{{0, {}}};
    while (!stack.empty()) {
        Frame frame = std::move(stack.back());
        stack.pop_back();
        const TreeNode& node = tree.nodes()[static_cast<std::size_t>(frame.node_id)];
        if (node.is_leaf()) continue;

        const int designated = designated_child(tree, frame.node_id);
        SplitTerm term;
        term.predicate = frame.path;
        term.predicate.push_back(make_atom(node, designated == node.left));
        const LeafStat to = stat_at(designated);
        const LeafStat from = stat_at(frame.node_id);
        term.defined = to.defined && from.defined;
        term.beta = term.defined ? to.mu - from.mu : 0.0;
        term.se = term.defined ? std::sqrt(to.se * to.se + from.se * from.se) : 0.0;
        term.order = node.split->order;
        term.node_id = frame.node_id;
        form.terms.push_back(std::move(term));

        Frame left{node.left, frame.path};
        left.path.push_back(make_atom(node, true));
        Frame right{node.right, std::move(frame.path)};
        right.path.push_back(make_atom(node, false));
        stack.push_back(std::move(right));
        stack.push_back(std::move(left));
    }
    std::sort(form.terms.begin(), form.terms.end(),
              [](const SplitTerm& a, const SplitTerm& b) { return a.order < b.order; });
    return form;
}

std::vector<BranchAtom> path_to_leaf(const TreeModel& tree, int leaf) {
    // Parent links are implicit; rebuild by walking from the root.
    std::vector<BranchAtom> path;
    int cur = 0;
    while (cur != leaf) {
        const TreeNode& node = tree.nodes()[static_cast<std::size_t>(cur)];
        // The leaf is in exactly one subtree; creation order makes ids grow
        // downward, so compare against subtree spans via a containment walk.
        bool in_left = false;
        std::vector<int> stack{node.left};
        while (!stack.empty()) {
            const int id = stack.back();
            stack.pop_back();
            if (id == leaf) {
                in_left = true;
                break;
            }
            const TreeNode& n = tree.nodes()[static_cast<std::size_t>(id)];
            if (!n.is_leaf()) {
                stack.push_back(n.left);
                stack.push_back(n.right);
            }
        }
        path.push_back(make_atom(node, in_left));
        cur = in_left ? node.left : node.right;
    }
    return path;
}

double binomial_se(double mu, std::uint64_t count) {
    if (count == 0) return 0.0;
    return std::sqrt(std::max(0.0, mu * (1.0 - mu)) / static_cast<double>(count));
}

bool is_binary_target(const Dataset& dataset, std::size_t col) {
    return dataset.column(col).kind == ColumnKind::binary;
}

}  // namespace

std::string predicate_text(std::span<const BranchAtom> atoms,
                           const std::vector<ColumnSchema>& schema) {
    if (atoms.empty()) return "1";
    std::string out;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (i) out += " and ";
        out += describe_branch(atoms[i].rule, schema, atoms[i].left);
    }
    return out;
}

SplitForm to_split_form(const TreeModel& tree) {
    std::vector<LeafStat> stats(tree.nodes().size());
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
        const TreeNode& node = tree.nodes()[i];
        if (!node.is_leaf()) continue;
        stats[i].mu = node.mean;
        stats[i].se = binomial_se(node.mean, node.count);
    }
    return build_split_form(tree, stats, tree.response_name());
}

CellForm to_cell_form(const TreeModel& tree) {
    CellForm form;
    form.schema = tree.schema();
    form.target = tree.response_name();
    int next_id = 1;
    for (const int leaf : tree.leaf_ids()) {
        const TreeNode& node = tree.nodes()[static_cast<std::size_t>(leaf)];
        Cell cell;
        cell.id = next_id++;
        cell.leaf_node = leaf;
        cell.predicate = path_to_leaf(tree, leaf);
        cell.mu = node.mean;
        cell.count = node.count;
        // Leaf means are exact ratios of an integer response sum, so the sum
        // is recoverable exactly.
        cell.target_sum = static_cast<double>(
            std::llround(node.mean * static_cast<double>(node.count)));
        cell.se = binomial_se(node.mean, node.count);
        form.cells.push_back(std::move(cell));
    }
    return form;
}

RefitResult refit(const TreeModel& tree, const Dataset& dataset, const std::string& target) {
    const std::size_t target_col = dataset.column_index(target);
    const bool binary = is_binary_target(dataset, target_col);
    if (!binary && dataset.column(target_col).kind != ColumnKind::numeric)
        throw SchemaError("refit target '" + target + "' must be binary or numeric");

    BoundTree bound(tree, dataset);
    const std::size_t n_nodes = tree.nodes().size();
    std::vector<std::uint64_t> count(n_nodes, 0);
    std::vector<double> sum(n_nodes, 0.0);
    std::vector<double> sum_sq(n_nodes, 0.0);
    for (std::size_t row = 0; row < dataset.n_rows(); ++row) {
        const auto leaf = static_cast<std::size_t>(bound.leaf_node(row));
        const double v = binary ? static_cast<double>(dataset.code(target_col, row))
                                : dataset.numeric_value(target_col, row);
        ++count[leaf];
        sum[leaf] += v;
        sum_sq[leaf] += v * v;
    }

    std::vector<LeafStat> stats(n_nodes);
    RefitResult result;
    result.cell_form.schema = tree.schema();
    result.cell_form.target = target;
    int next_id = 1;
    for (const int leaf : tree.leaf_ids()) {
        const auto i = static_cast<std::size_t>(leaf);
        Cell cell;
        cell.id = next_id++;
        cell.leaf_node = leaf;
        cell.predicate = path_to_leaf(tree, leaf);
        cell.count = count[i];
        cell.target_sum = sum[i];
        cell.defined = count[i] > 0;
        if (cell.defined) {
            cell.mu = sum[i] / static_cast<double>(count[i]);
            if (binary) {
                cell.se = binomial_se(cell.mu, cell.count);
            } else if (count[i] > 1) {
                const double ss =
                    std::max(0.0, sum_sq[i] - sum[i] * sum[i] / static_cast<double>(count[i]));
                cell.se = std::sqrt(ss / static_cast<double>(count[i] - 1) /
                                    static_cast<double>(count[i]));
            }
        }
        stats[i] = LeafStat{cell.mu, cell.se, cell.defined};
        result.cell_form.cells.push_back(std::move(cell));
    }
    result.split_form = build_split_form(tree, stats, target);
    return result;
}

CellForm refit_cells(const CellForm& form, const Dataset& dataset, const std::string& target) {
    const std::size_t target_col = dataset.column_index(target);
    const bool binary = is_binary_target(dataset, target_col);
    if (!binary && dataset.column(target_col).kind != ColumnKind::numeric)
        throw SchemaError("refit target '" + target + "' must be binary or numeric");

    CellFormEvaluator eval(form, dataset);
    CellForm out = form;
    out.target = target;
    std::vector<std::uint64_t> count(form.cells.size(), 0);
    std::vector<double> sum(form.cells.size(), 0.0);
    std::vector<double> sum_sq(form.cells.size(), 0.0);
    for (std::size_t row = 0; row < dataset.n_rows(); ++row) {
        const auto c = static_cast<std::size_t>(eval.assign(row) - 1);
        const double v = binary ? static_cast<double>(dataset.code(target_col, row))
                                : dataset.numeric_value(target_col, row);
        ++count[c];
        sum[c] += v;
        sum_sq[c] += v * v;
    }
    for (std::size_t c = 0; c < out.cells.size(); ++c) {
        Cell& cell = out.cells[c];
        cell.count = count[c];
        cell.target_sum = sum[c];
        cell.defined = count[c] > 0;
        cell.mu = cell.defined ? sum[c] / static_cast<double>(count[c]) : 0.0;
        cell.se = 0.0;
        if (cell.defined) {
            if (binary) {
                cell.se = binomial_se(cell.mu, cell.count);
            } else if (count[c] > 1) {
                const double ss =
                    std::max(0.0, sum_sq[c] - sum[c] * sum[c] / static_cast<double>(count[c]));
                cell.se = std::sqrt(ss / static_cast<double>(count[c] - 1) /
                                    static_cast<double>(count[c]));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> resolve_atoms(const std::vector<BranchAtom>& atoms,
                                       const Dataset& dataset) {
    std::vector<std::size_t> cols;
    cols.reserve(atoms.size());
    for (const auto& atom : atoms) cols.push_back(dataset.column_index(atom.rule.column));
    return cols;
}

bool atom_matches(const BranchAtom& atom, const Dataset& dataset, std::size_t col,
                  std::size_t row) {
    bool left;
    if (atom.rule.kind == SplitRule::Kind::threshold)
        left = dataset.scalar_value(col, row) <= atom.rule.threshold;
    else
        left = std::binary_search(atom.rule.subset.begin(), atom.rule.subset.end(),
                                  dataset.code(col, row));
    return left == atom.left;
}

}  // namespace

SplitFormEvaluator::SplitFormEvaluator(const SplitForm& form, const Dataset& dataset)
    : form_(&form), dataset_(&dataset) {
    for (const auto& term : form.terms) atom_columns_.push_back(resolve_atoms(term.predicate, dataset));
}

double SplitFormEvaluator::value(std::size_t row) const {
    double acc = form_->intercept;
    for (std::size_t t = 0; t < form_->terms.size(); ++t) {
        const auto& term = form_->terms[t];
        bool satisfied = true;
        for (std::size_t a = 0; a < term.predicate.size() && satisfied; ++a)
            satisfied = atom_matches(term.predicate[a], *dataset_, atom_columns_[t][a], row);
        if (satisfied) acc += term.beta;
    }
    return acc;
}

CellFormEvaluator::CellFormEvaluator(const CellForm& form, const Dataset& dataset)
    : form_(&form), dataset_(&dataset) {
    for (const auto& cell : form.cells) atom_columns_.push_back(resolve_atoms(cell.predicate, dataset));
}

int CellFormEvaluator::assign(std::size_t row) const {
    int found = -1;
    for (std::size_t c = 0; c < form_->cells.size(); ++c) {
        const auto& cell = form_->cells[c];
        bool satisfied = true;
        for (std::size_t a = 0; a < cell.predicate.size() && satisfied; ++a)
            satisfied = atom_matches(cell.predicate[a], *dataset_, atom_columns_[c][a], row);
        if (satisfied) {
            if (found >= 0)
                throw Error("cell predicates overlap at row " + std::to_string(row));
            found = cell.id;
        }
    }
    if (found < 0) throw Error("no cell predicate matches row " + std::to_string(row));
    return found;
}

double CellFormEvaluator::value(std::size_t row) const {
    const int id = assign(row);
    for (const auto& cell : form_->cells)
        if (cell.id == id) return cell.mu;
    return 0.0;
}

int cell_assign(const CellForm& form, const Dataset& dataset, std::size_t row) {
    return CellFormEvaluator(form, dataset).assign(row);
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

std::string split_form_csv(const SplitForm& form) {
    std::ostringstream out;
    out << "term,coefficient,std_error,order,defined\n";
    out << "1," << (form.intercept_defined ? detail::format_double(form.intercept) : "")
        << ',' << detail::format_double(form.intercept_se) << ",0,"
        << (form.intercept_defined ? 1 : 0) << '\n';
    for (const auto& term : form.terms) {
        out << detail::csv_quote(predicate_text(term.predicate, form.schema)) << ','
            << (term.defined ? detail::format_double(term.beta) : "") << ','
            << detail::format_double(term.se) << ',' << term.order << ','
            << (term.defined ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string cell_form_csv(const CellForm& form) {
    std::ostringstream out;
    out << "cell,predicate,count,coefficient,std_error,defined\n";
    for (const auto& cell : form.cells) {
        out << cell.id << ',' << detail::csv_quote(predicate_text(cell.predicate, form.schema))
            << ',' << cell.count << ',' << (cell.defined ? detail::format_double(cell.mu) : "")
            << ',' << detail::format_double(cell.se) << ',' << (cell.defined ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace proptree
