#include "proptree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "text_util.hpp"

namespace proptree {

using nlohmann::json;

std::uint64_t min_leaf_size(std::uint64_t n) {
    if (n < 1) throw DataError("min_leaf_size requires n >= 1");
    if (n == 1) return 1;
    const long double r = std::pow(static_cast<long double>(n), 0.625L);
    auto m = static_cast<std::uint64_t>(std::ceil(r));
    if (m < 1) m = 1;
    if (n <= 50'000'000ULL) {
        // ceil(n^(5/8)) is the least m with m^8 >= n^5; settle the boundary
        // exactly, since pow can land a hair off an exact integer.
        auto p8 = [](unsigned __int128 x) {
            const unsigned __int128 x2 = x * x;
            const unsigned __int128 x4 = x2 * x2;
            return x4 * x4;
        };
        const unsigned __int128 n2 = static_cast<unsigned __int128>(n) * n;
        const unsigned __int128 n5 = n2 * n2 * n;
        while (m > 1 && p8(m - 1) >= n5) --m;
        while (p8(m) < n5) ++m;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Split search
// ---------------------------------------------------------------------------

namespace {

// True when candidate a (at column position a_pos) wins over b.
bool candidate_better(const SplitCandidate& a, std::size_t a_pos, const SplitCandidate& b,
                      std::size_t b_pos) {
    if (a.sse_reduction != b.sse_reduction) return a.sse_reduction > b.sse_reduction;
    if (a_pos != b_pos) return a_pos < b_pos;
    if (a.rule.kind == SplitRule::Kind::threshold) return a.rule.threshold < b.rule.threshold;
    return a.rule.subset < b.rule.subset;
}

struct SearchContext {
    const Dataset& dataset;
    std::span<const std::size_t> columns;  // resolved, in tie-break order
    const std::vector<double>& y;          // indexed by dataset row
    std::uint64_t min_leaf;
};

void scan_threshold_column(const SearchContext& ctx, std::span<const std::uint32_t> rows,
                           std::size_t col, std::size_t col_pos,
                           std::optional<SplitCandidate>& best, std::size_t& best_pos) {
    const std::size_t m = rows.size();
    std::vector<std::pair<double, std::uint32_t>> order(m);
    for (std::size_t i = 0; i < m; ++i)
        order[i] = {ctx.dataset.scalar_value(col, rows[i]), rows[i]};
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (order.front().first == order.back().first) return;  // constant column

    std::vector<double> prefix(m);
    double run = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        run += ctx.y[order[i].second];
        prefix[i] = run;
    }
    const double total = prefix[m - 1];
    const double parent_term = total * total / static_cast<double>(m);

    for (std::size_t b = 0; b + 1 < m; ++b) {
        if (order[b].first == order[b + 1].first) continue;
        const std::uint64_t n_left = b + 1;
        const std::uint64_t n_right = m - n_left;
        if (n_left < ctx.min_leaf || n_right < ctx.min_leaf) continue;
        const double sum_left = prefix[b];
        const double sum_right = total - sum_left;
        const double reduction = sum_left * sum_left / static_cast<double>(n_left) +
                                 sum_right * sum_right / static_cast<double>(n_right) -
                                 parent_term;
        if (!(reduction > 0.0)) continue;
        SplitCandidate cand;
        cand.rule.column = ctx.dataset.column(col).name;
        cand.rule.kind = SplitRule::Kind::threshold;
        cand.rule.threshold = order[b].first + (order[b + 1].first - order[b].first) / 2.0;
        cand.sse_reduction = reduction;
        cand.left_count = n_left;
        cand.right_count = n_right;
        cand.left_mean = sum_left / static_cast<double>(n_left);
        cand.right_mean = sum_right / static_cast<double>(n_right);
        if (!best || candidate_better(cand, col_pos, *best, best_pos)) {
            best = std::move(cand);
            best_pos = col_pos;
        }
    }
}

void scan_nominal_column(const SearchContext& ctx, std::span<const std::uint32_t> rows,
                         std::size_t col, std::size_t col_pos,
                         std::optional<SplitCandidate>& best, std::size_t& best_pos) {
    const auto& schema = ctx.dataset.column(col);
    const std::size_t n_levels = schema.levels.size();
    std::vector<std::uint64_t> count(n_levels, 0);
    std::vector<double> sum(n_levels, 0.0);
    for (const std::uint32_t r : rows) {
        const auto code = static_cast<std::size_t>(ctx.dataset.code(col, r));
        ++count[code];
        sum[code] += ctx.y[r];
    }
    std::vector<std::int32_t> present;
    for (std::size_t l = 0; l < n_levels; ++l)
        if (count[l] > 0) present.push_back(static_cast<std::int32_t>(l));
    if (present.size() < 2) return;

    // Mean-sorted order; prefixes of this order contain the optimal subset
    // for squared error.
    std::vector<std::int32_t> by_mean = present;
    std::sort(by_mean.begin(), by_mean.end(), [&](std::int32_t a, std::int32_t b) {
        const double ma = sum[a] / static_cast<double>(count[a]);
        const double mb = sum[b] / static_cast<double>(count[b]);
        if (ma != mb) return ma < mb;
        return a < b;
    });

    const std::size_t m = rows.size();
    double total = 0.0;
    for (const std::int32_t l : present) total += sum[l];
    const double parent_term = total * total / static_cast<double>(m);

    std::vector<std::int32_t> left_levels;
    for (std::size_t q = 1; q < by_mean.size(); ++q) {
        left_levels.assign(by_mean.begin(), by_mean.begin() + static_cast<std::ptrdiff_t>(q));
        std::sort(left_levels.begin(), left_levels.end());
        std::uint64_t n_left = 0;
        double sum_left = 0.0;
        for (const std::int32_t l : left_levels) {  // ascending level order
            n_left += count[l];
            sum_left += sum[l];
        }
        const std::uint64_t n_right = m - n_left;
        if (n_left < ctx.min_leaf || n_right < ctx.min_leaf) continue;
        const double sum_right = total - sum_left;
        const double reduction = sum_left * sum_left / static_cast<double>(n_left) +
                                 sum_right * sum_right / static_cast<double>(n_right) -
                                 parent_term;
        if (!(reduction > 0.0)) continue;

        SplitCandidate cand;
        cand.rule.column = schema.name;
        cand.rule.kind = SplitRule::Kind::subset;
        // Canonical orientation: the subset contains the lowest present level.
        if (left_levels.front() == present.front()) {
            cand.rule.subset = left_levels;
            cand.left_count = n_left;
            cand.right_count = n_right;
            cand.left_mean = sum_left / static_cast<double>(n_left);
            cand.right_mean = sum_right / static_cast<double>(n_right);
        } else {
            std::vector<std::int32_t> complement;
            std::set_difference(present.begin(), present.end(), left_levels.begin(),
                                left_levels.end(), std::back_inserter(complement));
            cand.rule.subset = std::move(complement);
            cand.left_count = n_right;
            cand.right_count = n_left;
            cand.left_mean = sum_right / static_cast<double>(n_right);
            cand.right_mean = sum_left / static_cast<double>(n_left);
        }
        cand.sse_reduction = reduction;
        if (!best || candidate_better(cand, col_pos, *best, best_pos)) {
            best = std::move(cand);
            best_pos = col_pos;
        }
    }
}

std::optional<SplitCandidate> search_best_split(const SearchContext& ctx,
                                                std::span<const std::uint32_t> rows,
                                                std::size_t* winning_pos = nullptr) {
    std::optional<SplitCandidate> best;
    std::size_t best_pos = 0;
    for (std::size_t pos = 0; pos < ctx.columns.size(); ++pos) {
        const std::size_t col = ctx.columns[pos];
        if (ctx.dataset.column(col).kind == ColumnKind::nominal)
            scan_nominal_column(ctx, rows, col, pos, best, best_pos);
        else
            scan_threshold_column(ctx, rows, col, pos, best, best_pos);
    }
    if (winning_pos && best) *winning_pos = best_pos;
    return best;
}

std::vector<double> response_values(const Dataset& dataset) {
    std::vector<double> y(dataset.n_rows());
    for (std::size_t r = 0; r < dataset.n_rows(); ++r) y[r] = dataset.response(r);
    return y;
}

std::vector<std::size_t> resolve_split_columns(const Dataset& dataset,
                                               std::vector<std::string>& names) {
    if (names.empty()) {
        for (const auto& col : dataset.schema()) {
            if (col.name == dataset.response_name() || col.name == dataset.outcome_name())
                continue;
            names.push_back(col.name);
        }
    }
    if (names.empty()) throw ConfigError("no candidate split columns");
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& name : names) {
        const std::size_t c = dataset.column_index(name);
        if (name == dataset.response_name())
            throw ConfigError("response column '" + name + "' cannot be a split column");
        idx.push_back(c);
    }
    return idx;
}

}  // namespace

std::optional<SplitCandidate> best_split(const Dataset& dataset,
                                         std::span<const std::uint32_t> rows,
                                         std::span<const std::string> columns,
                                         std::uint64_t min_leaf) {
    if (rows.empty()) throw DataError("best_split requires a nonempty row subset");
    std::vector<std::string> names(columns.begin(), columns.end());
    const std::vector<std::size_t> idx = resolve_split_columns(dataset, names);
    const std::vector<double> y = response_values(dataset);
    SearchContext ctx{dataset, idx, y, std::max<std::uint64_t>(min_leaf, 1)};
    return search_best_split(ctx, rows);
}

// ---------------------------------------------------------------------------
// TreeGrower
// ---------------------------------------------------------------------------

TreeGrower::TreeGrower(const Dataset& dataset, std::vector<std::uint32_t> rows,
                       const GrowConfig& config)
    : dataset_(dataset), columns_(config.columns) {
    if (rows.empty()) throw DataError("cannot grow a tree on an empty row set");
    if (config.k_max < 0) throw ConfigError("k_max must be >= 0");
    k_max_ = config.k_max;
    column_idx_ = resolve_split_columns(dataset_, columns_);
    response_ = response_values(dataset_);
    min_leaf_ = config.min_leaf > 0 ? config.min_leaf : min_leaf_size(rows.size());

    GrowNode root;
    root.rows = std::move(rows);
    double sum = 0.0, sum_sq = 0.0;
    for (const std::uint32_t r : root.rows) {
        sum += response_[r];
        sum_sq += response_[r] * response_[r];
    }
    root.node.count = root.rows.size();
    root.node.mean = sum / static_cast<double>(root.rows.size());
    root.node.sse =
        std::max(0.0, sum_sq - sum * sum / static_cast<double>(root.rows.size()));
    nodes_.push_back(std::move(root));
    compute_candidate(0);
}

void TreeGrower::compute_candidate(int node_id) {
    GrowNode& g = nodes_[static_cast<std::size_t>(node_id)];
    g.candidate_ready = true;
    g.candidate.reset();
    if (g.rows.size() < 2 * min_leaf_) return;  // no feasible split can exist
    SearchContext ctx{dataset_, column_idx_, response_, min_leaf_};
    std::size_t pos = 0;
    g.candidate = search_best_split(ctx, g.rows, &pos);
    g.candidate_col_pos = pos;
}

bool TreeGrower::step() {
    if (k_ >= k_max_) return false;
    int best_id = -1;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const GrowNode& g = nodes_[i];
        if (!g.node.is_leaf() || !g.candidate) continue;
        if (best_id < 0 ||
            candidate_better(*g.candidate, g.candidate_col_pos,
                             *nodes_[static_cast<std::size_t>(best_id)].candidate,
                             nodes_[static_cast<std::size_t>(best_id)].candidate_col_pos))
            best_id = static_cast<int>(i);
    }
    if (best_id < 0) return false;

    GrowNode& parent = nodes_[static_cast<std::size_t>(best_id)];
    SplitCandidate cand = *parent.candidate;
    cand.rule.order = ++k_;
    const std::size_t col = dataset_.column_index(cand.rule.column);

    GrowNode left, right;
    left.rows.reserve(cand.left_count);
    right.rows.reserve(cand.right_count);
    if (cand.rule.kind == SplitRule::Kind::threshold) {
        for (const std::uint32_t r : parent.rows)
            (dataset_.scalar_value(col, r) <= cand.rule.threshold ? left.rows : right.rows)
                .push_back(r);
    } else {
        for (const std::uint32_t r : parent.rows)
            (std::binary_search(cand.rule.subset.begin(), cand.rule.subset.end(),
                                dataset_.code(col, r))
                 ? left.rows
                 : right.rows)
                .push_back(r);
    }

    auto fill_stats = [&](GrowNode& g) {
        double sum = 0.0, sum_sq = 0.0;
        for (const std::uint32_t r : g.rows) {
            sum += response_[r];
            sum_sq += response_[r] * response_[r];
        }
        g.node.count = g.rows.size();
        g.node.mean = sum / static_cast<double>(g.rows.size());
        g.node.sse =
            std::max(0.0, sum_sq - sum * sum / static_cast<double>(g.rows.size()));
    };
    fill_stats(left);
    fill_stats(right);

    const int left_id = static_cast<int>(nodes_.size());
    const int right_id = left_id + 1;
    parent.node.split = cand.rule;
    parent.column = col;
    parent.node.left = left_id;
    parent.node.right = right_id;
    parent.rows.clear();
    parent.rows.shrink_to_fit();
    parent.candidate.reset();
    nodes_.push_back(std::move(left));
    nodes_.push_back(std::move(right));
    compute_candidate(left_id);
    compute_candidate(right_id);
    return true;
}

double TreeGrower::predict_at(std::size_t row, int k) const {
    std::size_t cur = 0;
    while (true) {
        const GrowNode& g = nodes_[cur];
        if (g.node.is_leaf() || g.node.split->order > k) return g.node.mean;
        bool go_left;
        if (g.node.split->kind == SplitRule::Kind::threshold)
            go_left = dataset_.scalar_value(g.column, row) <= g.node.split->threshold;
        else
            go_left = std::binary_search(g.node.split->subset.begin(),
                                         g.node.split->subset.end(),
                                         dataset_.code(g.column, row));
        cur = static_cast<std::size_t>(go_left ? g.node.left : g.node.right);
    }
}

TreeModel TreeGrower::snapshot() const {
    std::vector<TreeNode> nodes;
    nodes.reserve(nodes_.size());
    for (const auto& g : nodes_) nodes.push_back(g.node);

    // Schema snapshot: split columns (in dataset order) plus the response.
    std::vector<ColumnSchema> schema;
    for (std::size_t c = 0; c < dataset_.n_columns(); ++c) {
        const auto& col = dataset_.column(c);
        const bool used_candidate =
            std::find(column_idx_.begin(), column_idx_.end(), c) != column_idx_.end();
        if (used_candidate || col.name == dataset_.response_name())
            schema.push_back(col);
    }
    return TreeModel::from_nodes(std::move(schema), dataset_.response_name(),
                                 std::move(nodes), min_leaf_);
}

TreeModel grow_tree(const Dataset& dataset, const GrowConfig& config) {
    std::vector<std::uint32_t> rows(dataset.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
    TreeGrower grower(dataset, std::move(rows), config);
    grower.grow_to(config.k_max);
    return grower.snapshot();
}

// ---------------------------------------------------------------------------
// TreeModel
// ---------------------------------------------------------------------------

TreeModel TreeModel::from_nodes(std::vector<ColumnSchema> schema, std::string response,
                                std::vector<TreeNode> nodes, std::uint64_t min_leaf) {
    if (nodes.empty()) throw DataError("tree needs at least a root node");

    TreeModel tree;
    tree.schema_ = std::move(schema);
    tree.response_ = std::move(response);
    tree.nodes_ = std::move(nodes);
    tree.min_leaf_ = min_leaf;

    auto find_col = [&](const std::string& name) -> const ColumnSchema& {
        for (const auto& col : tree.schema_)
            if (col.name == name) return col;
        throw SchemaError("split column '" + name + "' missing from tree schema");
    };

    const ColumnSchema* response_schema = nullptr;
    for (const auto& col : tree.schema_)
        if (col.name == tree.response_) response_schema = &col;
    const bool binary_response =
        response_schema && response_schema->kind == ColumnKind::binary;

    bool any_counts = false;
    for (const auto& node : tree.nodes_) any_counts |= node.count > 0;

    std::vector<int> child_refs(tree.nodes_.size(), 0);
    std::vector<int> orders;
    for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
        const TreeNode& node = tree.nodes_[i];
        if (node.split.has_value() != (node.left >= 0 && node.right >= 0))
            throw DataError("node " + std::to_string(i) +
                            ": split and children must come together");
        if (binary_response && node.is_leaf() &&
            (node.mean < 0.0 || node.mean > 1.0))
            throw DataError("node " + std::to_string(i) + ": leaf mean outside [0,1]");
        if (node.sse < 0.0)
            throw DataError("node " + std::to_string(i) + ": negative SSE");
        if (node.is_leaf()) {
            if (any_counts && node.count < min_leaf)
                throw DataError("node " + std::to_string(i) + ": leaf count below min_leaf");
            continue;
        }
        const auto li = static_cast<std::size_t>(node.left);
        const auto ri = static_cast<std::size_t>(node.right);
        if (li >= tree.nodes_.size() || ri >= tree.nodes_.size() || li <= i || ri <= i ||
            li == ri)
            throw DataError("node " + std::to_string(i) + ": bad child indices");
        ++child_refs[li];
        ++child_refs[ri];
        if (any_counts &&
            tree.nodes_[li].count + tree.nodes_[ri].count != node.count)
            throw DataError("node " + std::to_string(i) + ": child counts do not sum");

        const SplitRule& rule = *node.split;
        const ColumnSchema& col = find_col(rule.column);
        if (rule.kind == SplitRule::Kind::subset) {
            if (col.kind != ColumnKind::nominal)
                throw SchemaError("subset split on non-nominal column '" + col.name + "'");
            if (rule.subset.empty() || rule.subset.size() >= col.levels.size())
                throw DataError("subset split on '" + col.name +
                                "' must be a nonempty proper subset");
            if (!std::is_sorted(rule.subset.begin(), rule.subset.end()))
                throw DataError("subset levels must be sorted");
            for (const std::int32_t l : rule.subset)
                if (l < 0 || static_cast<std::size_t>(l) >= col.levels.size())
                    throw DataError("subset level code out of range on '" + col.name + "'");
        } else if (col.kind == ColumnKind::nominal) {
            throw SchemaError("threshold split on nominal column '" + col.name + "'");
        }
        orders.push_back(rule.order);

        // Truncation semantics need orders increasing along every path.
        for (const int child : {node.left, node.right}) {
            const TreeNode& cn = tree.nodes_[static_cast<std::size_t>(child)];
            if (!cn.is_leaf() && cn.split->order <= rule.order)
                throw DataError("split order must increase along paths");
        }
    }
    for (std::size_t i = 1; i < tree.nodes_.size(); ++i)
        if (child_refs[i] != 1)
            throw DataError("node " + std::to_string(i) + " must have exactly one parent");
    if (child_refs[0] != 0) throw DataError("root must not be a child");

    std::sort(orders.begin(), orders.end());
    for (std::size_t i = 0; i < orders.size(); ++i)
        if (orders[i] != static_cast<int>(i) + 1)
            throw DataError("split orders must be a permutation of 1..k");
    tree.k_ = static_cast<int>(orders.size());
    return tree;
}

std::vector<int> TreeModel::leaf_ids() const {
    std::vector<int> leaves;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
            leaves.push_back(id);
        } else {
            stack.push_back(node.right);  // left child visited first
            stack.push_back(node.left);
        }
    }
    return leaves;
}

std::string TreeModel::to_json() const {
    json doc;
    doc["format"] = "proptree.tree";
    doc["version"] = 1;
    doc["response"] = response_;
    doc["min_leaf"] = min_leaf_;
    doc["k"] = k_;
    doc["schema"] = json::array();
    for (const auto& col : schema_) {
        json jc;
        jc["name"] = col.name;
        jc["kind"] = to_string(col.kind);
        if (!col.levels.empty()) jc["levels"] = col.levels;
        doc["schema"].push_back(std::move(jc));
    }
    doc["nodes"] = json::array();
    for (const auto& node : nodes_) {
        json jn;
        jn["count"] = node.count;
        jn["mean"] = node.mean;
        jn["sse"] = node.sse;
        if (!node.is_leaf()) {
            jn["left"] = node.left;
            jn["right"] = node.right;
            json js;
            js["column"] = node.split->column;
            js["order"] = node.split->order;
            if (node.split->kind == SplitRule::Kind::threshold) {
                js["kind"] = "threshold";
                js["threshold"] = node.split->threshold;
            } else {
                js["kind"] = "subset";
                const ColumnSchema* col = nullptr;
                for (const auto& c : schema_)
                    if (c.name == node.split->column) col = &c;
                json labels = json::array();
                for (const std::int32_t l : node.split->subset)
                    labels.push_back(col->levels[static_cast<std::size_t>(l)]);
                js["subset"] = std::move(labels);
            }
            jn["split"] = std::move(js);
        }
        doc["nodes"].push_back(std::move(jn));
    }
    return doc.dump(2) + "\n";
}

TreeModel TreeModel::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("tree document: ") + e.what());
    }
    if (doc.value("format", "") != "proptree.tree")
        throw DataError("not a tree document (format field mismatch)");
    if (doc.value("version", 0) != 1)
        throw DataError("unsupported tree document version");

    std::vector<ColumnSchema> schema;
    for (const auto& jc : doc.at("schema")) {
        ColumnSchema col;
        col.name = jc.at("name").get<std::string>();
        col.kind = column_kind_from_string(jc.at("kind").get<std::string>());
        if (jc.contains("levels")) col.levels = jc["levels"].get<std::vector<std::string>>();
        schema.push_back(std::move(col));
    }
    auto level_code = [&](const std::string& column, const std::string& label) {
        for (const auto& col : schema) {
            if (col.name != column) continue;
            for (std::size_t l = 0; l < col.levels.size(); ++l)
                if (col.levels[l] == label) return static_cast<std::int32_t>(l);
            throw DataError("level '" + label + "' not in column '" + column + "'");
        }
        throw DataError("split column '" + column + "' missing from tree schema");
    };

    std::vector<TreeNode> nodes;
    for (const auto& jn : doc.at("nodes")) {
        TreeNode node;
        node.count = jn.at("count").get<std::uint64_t>();
        node.mean = jn.at("mean").get<double>();
        node.sse = jn.at("sse").get<double>();
        if (jn.contains("split")) {
            const auto& js = jn["split"];
            SplitRule rule;
            rule.column = js.at("column").get<std::string>();
            rule.order = js.at("order").get<int>();
            const std::string kind = js.at("kind").get<std::string>();
            if (kind == "threshold") {
                rule.kind = SplitRule::Kind::threshold;
                rule.threshold = js.at("threshold").get<double>();
            } else if (kind == "subset") {
                rule.kind = SplitRule::Kind::subset;
                for (const auto& jl : js.at("subset"))
                    rule.subset.push_back(level_code(rule.column, jl.get<std::string>()));
                std::sort(rule.subset.begin(), rule.subset.end());
            } else {
                throw DataError("unknown split kind '" + kind + "'");
            }
            node.split = std::move(rule);
            node.left = jn.at("left").get<int>();
            node.right = jn.at("right").get<int>();
        }
        nodes.push_back(std::move(node));
    }
    return from_nodes(std::move(schema), doc.value("response", ""), std::move(nodes),
                      doc.value("min_leaf", std::uint64_t{0}));
}

void TreeModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << to_json();
    if (!out) throw DataError("failed writing '" + path + "'");
}

TreeModel TreeModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

// ---------------------------------------------------------------------------
// BoundTree
// ---------------------------------------------------------------------------

BoundTree::BoundTree(const TreeModel& tree, const Dataset& dataset)
    : tree_(&tree), dataset_(&dataset), node_column_(tree.nodes().size(), SIZE_MAX) {
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
        const TreeNode& node = tree.nodes()[i];
        if (node.is_leaf()) continue;
        const std::size_t c = dataset.column_index(node.split->column);
        const ColumnSchema& actual = dataset.column(c);
        const ColumnSchema* expected = nullptr;
        for (const auto& col : tree.schema())
            if (col.name == node.split->column) expected = &col;
        if (expected && (actual.kind != expected->kind || actual.levels != expected->levels))
            throw SchemaError("column '" + actual.name +
                              "' does not match the model's schema");
        node_column_[i] = c;
    }
}

int BoundTree::leaf_node_at(std::size_t row, int k) const {
    std::size_t cur = 0;
    while (true) {
        const TreeNode& node = tree_->nodes()[cur];
        if (node.is_leaf() || node.split->order > k) return static_cast<int>(cur);
        bool go_left;
        if (node.split->kind == SplitRule::Kind::threshold)
            go_left = dataset_->scalar_value(node_column_[cur], row) <= node.split->threshold;
        else
            go_left = std::binary_search(node.split->subset.begin(), node.split->subset.end(),
                                         dataset_->code(node_column_[cur], row));
        cur = static_cast<std::size_t>(go_left ? node.left : node.right);
    }
}

double predict(const TreeModel& tree, const Dataset& dataset, std::size_t row) {
    return BoundTree(tree, dataset).predict(row);
}

std::string describe_branch(const SplitRule& rule, const std::vector<ColumnSchema>& schema,
                            bool left_branch) {
    const ColumnSchema* col = nullptr;
    for (const auto& c : schema)
        if (c.name == rule.column) col = &c;
    if (!col) return rule.column + (left_branch ? " <= ?" : " > ?");

    if (rule.kind == SplitRule::Kind::subset) {
        std::string levels;
        for (std::size_t i = 0; i < rule.subset.size(); ++i) {
            if (i) levels += ", ";
            levels += col->levels[static_cast<std::size_t>(rule.subset[i])];
        }
        return rule.column + (left_branch ? " in {" : " not in {") + levels + "}";
    }
    if (col->kind == ColumnKind::binary)
        return rule.column + (left_branch ? " = 0" : " = 1");
    if (col->kind == ColumnKind::ordinal) {
        const auto rank = static_cast<std::size_t>(
            std::clamp(std::floor(rule.threshold), 0.0,
                       static_cast<double>(col->levels.size() - 1)));
        return rule.column + (left_branch ? " <= '" : " > '") + col->levels[rank] + "'";
    }
    return rule.column + (left_branch ? " <= " : " > ") +
           detail::format_double(rule.threshold);
}

}  // namespace proptree
