#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proptree/dataset.hpp"
#include "proptree/tree.hpp"

namespace proptree {

// One generated record of the simulation design: x1..x4 are integers uniform
// on {0..100}, c1 ~ Binomial(4, 0.2) (five categories), c2 ~ Bernoulli(0.3).
struct SimRecord {
    std::array<double, 4> x{};
    int c1 = 0;
    int c2 = 0;
};

// Piecewise-constant tree used as response model 5. The default splits x1 at
// 36 and x2 at 29 / 47, with cell propensities 0.21, 0.51, 0.65, 0.90; its
// propensity distribution has six-number summary (0.21, 0.51, 0.65, 0.649,
// 0.90, 0.90) over the design. Overridable through SimConfig.
TreeModel default_model5_tree();

// True propensity under model id 1..5. Inputs must lie in the design domain.
double p_model(int id, const SimRecord& record, const TreeModel* model5 = nullptr);

struct SimData {
    Dataset dataset;  // columns x1..x4 (numeric), c1 (nominal), c2 (binary), RESP
    std::vector<double> true_p;
};

SimData gen_sim_data(int id, std::size_t n, std::uint64_t seed,
                     const TreeModel* model5 = nullptr);

struct SimConfig {
    int model_id = 1;
    int replicates = 100;
    std::size_t n = 500;
    std::uint64_t seed = 0;
    bool fresh_eval = false;  // evaluate on a fresh draw instead of the fit data
    int k_max = 10;           // tree trace cap per replicate
    std::optional<TreeModel> model5;
};

// Boxplot summary of prediction errors within one quartile bin of true p:
// quartiles of the pooled errors, whiskers at the most extreme points within
// 1.5 IQR of the box, and the count beyond them.
struct BoxStats {
    std::uint64_t count = 0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::uint64_t outliers = 0;
};

struct MethodReport {
    std::array<BoxStats, 4> quartiles;
    double mean_abs_error = 0.0;
    std::uint64_t records = 0;
    int failed_replicates = 0;
};

struct SimReport {
    int model_id = 1;
    int replicates = 0;
    std::size_t n = 0;
    MethodReport tree;
    MethodReport logistic;
    // min, Q1, median, mean, Q3, max of the pooled true propensities.
    std::array<double, 6> p_summary{};
};

// Per replicate: generate data, fit the tree (CV-selected k) and the stepwise
// logistic model (mains + pairwise interactions + quadratics), evaluate both
// against the true propensities, and pool the errors by quartile of true p
// (rank-based bins, sizes differing by at most one per replicate). Replicates
// whose fits fail are excluded and counted.
SimReport run_comparison(const SimConfig& config);

std::string sim_report_csv(const SimReport& report);
std::string sim_p_summary_csv(const SimReport& report);

// Type-7 (linear interpolation) quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q);

}  // namespace proptree
