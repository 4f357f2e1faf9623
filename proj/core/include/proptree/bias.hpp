#pragma once

#include <cstdint>
#include <utility>
#include <string>
#include <vector>

#include "proptree/dataset.hpp"
#include "proptree/linear_form.hpp"

namespace proptree {

// Unweighted group means of the outcome for respondents and nonrespondents.
// Errors when either group is empty, naming the group.
std::pair<double, double> overall_gap(const Dataset& dataset, const std::string& outcome,
                                      const std::string& response);

struct CellGapRow {
    int cell_id = 0;  // 0 = overall row
    std::string predicate;
    std::uint64_t count = 0;
    std::uint64_t respondents = 0;
    std::uint64_t nonrespondents = 0;
    double response_rate = 0.0;
    double respondent_mean = 0.0;
    bool respondent_defined = false;
    double nonrespondent_mean = 0.0;
    bool nonrespondent_defined = false;
    double gap = 0.0;  // respondent mean - nonrespondent mean
    bool gap_defined = false;
    double gap_se = 0.0;  // two-sample standard error
    bool flagged = false;
};

struct GapReport {
    CellGapRow overall;
    std::vector<CellGapRow> cells;
    double threshold = 0.0;  // absolute gap threshold; <0 = adaptive 4-SE rule
};

struct GapConfig {
    // Absolute gap magnitude that flags a cell; negative selects the default
    // adaptive rule, |gap| > 4 * gap_se.
    double threshold = -1.0;
};

// Per-cell respondent/nonrespondent outcome means, response rates, gaps, and
// risk flags. A cell is flagged when its response rate is below the overall
// rate and its |gap| exceeds the threshold. Empty subgroups make the affected
// means undefined, never fatal.
GapReport cell_gaps(const CellForm& structure, const Dataset& dataset,
                    const std::string& outcome, const std::string& response,
                    const GapConfig& config = {});

// CSV with the column order: cell id, predicate text, count, response rate,
// respondent mean, nonrespondent mean, gap, gap standard error, flag.
std::string gap_report_csv(const GapReport& report);

}  // namespace proptree
