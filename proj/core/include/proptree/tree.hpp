#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proptree/dataset.hpp"

namespace proptree {

// Minimum leaf size rule: ceil(n^(5/8)). Exact for n up to 5e7 (verified in
// 128-bit integer arithmetic); long-double beyond that.
std::uint64_t min_leaf_size(std::uint64_t n);

// Binary split predicate. Threshold rules send scalar values <= threshold to
// the left child (numeric values, ordinal ranks, binary codes). Subset rules
// send rows whose level code is in `subset` (sorted, nonempty proper subset
// of the column's levels) to the left child.
struct SplitRule {
    enum class Kind { threshold, subset };

    std::string column;
    Kind kind = Kind::threshold;
    double threshold = 0.0;
    std::vector<std::int32_t> subset;
    int order = 0;  // 1-based index of when the split was added during growth

    bool operator==(const SplitRule&) const = default;
};

struct TreeNode {
    std::optional<SplitRule> split;
    int left = -1;
    int right = -1;
    std::uint64_t count = 0;
    double mean = 0.0;
    double sse = 0.0;  // within-node sum of squared residuals

    bool is_leaf() const { return !split.has_value(); }
};

// A fitted best-first regression tree over a schema snapshot. Nodes are in
// creation order (root first, children of the s-th split next); along any
// root-to-leaf path split orders strictly increase, so "the tree after k
// splits" is obtained by routing only through splits with order <= k.
class TreeModel {
  public:
    static TreeModel from_nodes(std::vector<ColumnSchema> schema, std::string response,
                                std::vector<TreeNode> nodes, std::uint64_t min_leaf);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }
    const std::vector<ColumnSchema>& schema() const { return schema_; }
    const std::string& response_name() const { return response_; }
    std::uint64_t min_leaf() const { return min_leaf_; }
    int k() const { return k_; }

    // Leaf node ids in depth-first, left-first order; defines cell numbering.
    std::vector<int> leaf_ids() const;

    // Versioned structured-text serialization (subsets stored as level labels).
    std::string to_json() const;
    static TreeModel from_json(const std::string& text);
    void save(const std::string& path) const;
    static TreeModel load(const std::string& path);

  private:
    TreeModel() = default;

    std::vector<ColumnSchema> schema_;
    std::string response_;
    std::vector<TreeNode> nodes_;
    std::uint64_t min_leaf_ = 0;
    int k_ = 0;
};

struct SplitCandidate {
    SplitRule rule;
    double sse_reduction = 0.0;
    std::uint64_t left_count = 0;
    std::uint64_t right_count = 0;
    double left_mean = 0.0;
    double right_mean = 0.0;
};

// Searches all candidate splits of `rows` over `columns` and returns the one
// with the largest SSE reduction whose children both have at least min_leaf
// rows, or nullopt when no candidate strictly reduces the SSE.
//
// Canonical arithmetic (tests reproduce it independently):
//  - threshold columns: rows are stably sorted by value; the left response
//    sum at each boundary is the prefix sum in that order; candidate
//    thresholds are midpoints between consecutive distinct values;
//  - nominal columns: per-level (count, sum) accumulate in row order; levels
//    present in the node are sorted by mean response and only prefixes of
//    that order are scanned (optimal for squared error); prefix sums combine
//    per-level sums in ascending level-code order; the reported subset is
//    the side containing the lowest present level code;
//  - sse_reduction = sumL^2/nL + sumR^2/nR - sumP^2/nP;
//  - ties: higher reduction wins, then earlier column in `columns`, then
//    smaller threshold, then lexicographically smaller subset.
std::optional<SplitCandidate> best_split(const Dataset& dataset,
                                         std::span<const std::uint32_t> rows,
                                         std::span<const std::string> columns,
                                         std::uint64_t min_leaf);

struct GrowConfig {
    int k_max = 0;
    // 0 means automatic: min_leaf_size(training row count).
    std::uint64_t min_leaf = 0;
    // Candidate split columns; empty means every column except the designated
    // response/outcome. The order here is the tie-break order.
    std::vector<std::string> columns;
};

// Incremental best-first growth: each step applies, among all current leaves,
// the feasible split with the globally largest SSE reduction (ties resolved
// by the best_split rule order, then by leaf creation order).
class TreeGrower {
  public:
    TreeGrower(const Dataset& dataset, std::vector<std::uint32_t> rows,
               const GrowConfig& config);

    // Applies one split; false when k_max is reached or no leaf has a
    // feasible split.
    bool step();
    void grow_to(int k) {
        while (k_ < k && step()) {}
    }

    int k() const { return k_; }
    std::uint64_t min_leaf() const { return min_leaf_; }
    TreeModel snapshot() const;

    // Prediction on the growing tree truncated to its first k splits,
    // evaluated against rows of the training dataset.
    double predict_at(std::size_t row, int k) const;

  private:
    struct GrowNode {
        TreeNode node;
        std::size_t column = SIZE_MAX;  // resolved split column
        std::vector<std::uint32_t> rows;
        std::optional<SplitCandidate> candidate;
        std::size_t candidate_col_pos = 0;
        bool candidate_ready = false;
    };

    void compute_candidate(int node_id);

    const Dataset& dataset_;
    std::vector<std::string> columns_;
    std::vector<std::size_t> column_idx_;
    std::vector<double> response_;  // indexed by dataset row
    std::uint64_t min_leaf_ = 0;
    int k_ = 0;
    int k_max_ = 0;
    std::vector<GrowNode> nodes_;
};

// Grows a tree on the full dataset per config.
TreeModel grow_tree(const Dataset& dataset, const GrowConfig& config);

// Routes records of a dataset through a tree. Binding validates that every
// column the tree splits on exists in the dataset with identical kind and
// levels.
class BoundTree {
  public:
    BoundTree(const TreeModel& tree, const Dataset& dataset);

    const TreeModel& tree() const { return *tree_; }

    int leaf_node(std::size_t row) const { return leaf_node_at(row, tree_->k()); }
    int leaf_node_at(std::size_t row, int k) const;

    double predict(std::size_t row) const {
        return tree_->nodes()[static_cast<std::size_t>(leaf_node(row))].mean;
    }
    double predict_at(std::size_t row, int k) const {
        return tree_->nodes()[static_cast<std::size_t>(leaf_node_at(row, k))].mean;
    }

  private:
    const TreeModel* tree_;
    const Dataset* dataset_;
    std::vector<std::size_t> node_column_;
};

// Convenience single-record form of BoundTree::predict.
double predict(const TreeModel& tree, const Dataset& dataset, std::size_t row);

// Human-readable predicate text for one branch of a rule, e.g. "EMPL > 20",
// "IND in {finance, information}", "MSA <= '5'".
std::string describe_branch(const SplitRule& rule, const std::vector<ColumnSchema>& schema,
                            bool left_branch);

}  // namespace proptree
