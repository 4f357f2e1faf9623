#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "proptree/dataset.hpp"
#include "proptree/tree.hpp"

namespace proptree {

// One row of the 10-fold cross-validation trace for a tree with k splits.
//   fold_errors[j] = e_j   = (10/n) * sum over held-out fold j of (R - p)^2
//   epsilon_sq     = mean of the e_j
//   r_sq           = epsilon_sq / alpha_sq0 (relative prediction error)
//   sigma          = sqrt( sum_j (e_j - epsilon_sq)^2 / (9 * alpha_sq0) )
struct CVEntry {
    int k = 0;
    std::array<double, 10> fold_errors{};
    double epsilon_sq = 0.0;
    double r_sq = 0.0;
    double sigma = 0.0;
};

struct CVTrace {
    std::vector<CVEntry> entries;  // ascending k starting at 0
    double alpha_sq0 = 0.0;        // baseline variance of the response
    double r_bar = 0.0;            // overall response rate
    std::uint64_t n = 0;
    std::uint64_t seed = 0;  // fold assignment seed
};

// Assigns rows to 10 folds by a seeded uniform shuffle; fold sizes differ by
// at most one (remainder rows go one per fold, lowest folds first).
std::vector<int> assign_folds(std::size_t n, std::uint64_t seed);

// Computes the trace for k = 0..k_max. A single tree per fold is grown
// incrementally (best-first growth is nested in k, so the k-split tree is the
// first k splits of the deeper one). min_leaf, when automatic, comes from the
// fold training size. With early_stop the trace ends one entry after the
// stopping rule first fires.
CVTrace cv_trace(const Dataset& dataset, const GrowConfig& config, int k_max,
                 std::uint64_t seed, bool early_stop = false);

// Test seam: explicit fold assignment (values 0..9 per row).
CVTrace cv_trace_with_folds(const Dataset& dataset, const GrowConfig& config, int k_max,
                            const std::vector<int>& fold_of_row, std::uint64_t seed_label,
                            bool early_stop = false);

struct TracePoint {
    double estimate = 0.0;  // relative error estimate for k splits
    double sigma = 0.0;     // its standard error
};

// One-standard-deviation stopping rule: scanning k = 0, 1, ..., return the
// first k for which |estimate(k+1) - estimate(k)| < sigma(k+1); ties
// (|difference| equal to sigma) keep going. Returns the last k of the trace
// when the rule never fires, and 0 for traces shorter than two entries.
int select_k(std::span<const TracePoint> trace);
int select_k(const CVTrace& trace);

struct SelectionResult {
    int k_selected = 0;
    CVTrace trace;
    TreeModel model;  // grown on the full dataset with k_selected splits
};

// Runs the trace, applies the stopping rule, and grows the final tree on the
// full dataset. With full_trace the trace is computed all the way to
// config.k_max (the table the `cv` command prints); otherwise it stops as
// soon as the rule fires.
SelectionResult fit_with_selection(const Dataset& dataset, const GrowConfig& config,
                                   std::uint64_t seed, bool full_trace = false);

// CSV table (k, estimate, std_error).
std::string trace_csv(const CVTrace& trace);

}  // namespace proptree
