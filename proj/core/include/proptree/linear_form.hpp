#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "proptree/dataset.hpp"
#include "proptree/tree.hpp"

namespace proptree {

// One conjunct of a path predicate: a split rule together with which branch
// of it the predicate asserts.
struct BranchAtom {
    SplitRule rule;
    bool left = true;

    bool operator==(const BranchAtom&) const = default;
};

std::string predicate_text(std::span<const BranchAtom> atoms,
                           const std::vector<ColumnSchema>& schema);

// Linear representation of a tree as an intercept plus one coefficient per
// internal node. A term's predicate is the conjunction of the branches taken
// from the root to that node plus the node's designated branch, so each
// coefficient reads as the adjustment for having that characteristic given
// the previous ones. The designated branch is the child with the lower
// fitted mean (ties go right); the intercept is the mean of the cell that
// satisfies no term predicate.
struct SplitTerm {
    std::vector<BranchAtom> predicate;
    double beta = 0.0;
    double se = 0.0;
    bool defined = true;
    int order = 0;    // growth order of the split this term belongs to
    int node_id = 0;  // internal node the term is attached to
};

struct SplitForm {
    double intercept = 0.0;
    double intercept_se = 0.0;
    bool intercept_defined = true;
    std::vector<SplitTerm> terms;  // ascending growth order
    std::vector<ColumnSchema> schema;
    std::string target;
};

// Cell (leaf) representation: mutually exclusive, exhaustive predicates with
// one coefficient per cell. Cell ids are 1-based in depth-first (left-first)
// leaf order.
struct Cell {
    int id = 0;
    int leaf_node = -1;
    std::vector<BranchAtom> predicate;
    double mu = 0.0;
    double target_sum = 0.0;  // sum of the target over the cell's rows
    std::uint64_t count = 0;
    double se = 0.0;
    bool defined = true;
};

struct CellForm {
    std::vector<Cell> cells;
    std::vector<ColumnSchema> schema;
    std::string target;
};

SplitForm to_split_form(const TreeModel& tree);
CellForm to_cell_form(const TreeModel& tree);

// Re-estimates both linear forms on new data with the tree's structure
// (predicates and branch designation) frozen. The target may be the
// dataset's binary response or any numeric column. Cells with no records
// are flagged undefined, as are coefficients that depend on them.
struct RefitResult {
    SplitForm split_form;
    CellForm cell_form;
};

RefitResult refit(const TreeModel& tree, const Dataset& dataset, const std::string& target);

// Cell-only variant when no split structure is available.
CellForm refit_cells(const CellForm& form, const Dataset& dataset, const std::string& target);

// Evaluators resolve predicate columns against a dataset once and then apply
// the forms row by row. Evaluation walks the predicates directly; it shares
// no code with tree routing.
class SplitFormEvaluator {
  public:
    SplitFormEvaluator(const SplitForm& form, const Dataset& dataset);
    double value(std::size_t row) const;

  private:
    const SplitForm* form_;
    const Dataset* dataset_;
    std::vector<std::vector<std::size_t>> atom_columns_;
};

class CellFormEvaluator {
  public:
    CellFormEvaluator(const CellForm& form, const Dataset& dataset);

    // Id of the unique cell whose predicate the record satisfies.
    int assign(std::size_t row) const;
    double value(std::size_t row) const;

  private:
    const CellForm* form_;
    const Dataset* dataset_;
    std::vector<std::vector<std::size_t>> atom_columns_;
};

int cell_assign(const CellForm& form, const Dataset& dataset, std::size_t row);

// CSV exports; layout mirrors the model report tables (term text, coefficient,
// standard error).
std::string split_form_csv(const SplitForm& form);
std::string cell_form_csv(const CellForm& form);

}  // namespace proptree
