#include "proptree/bias.hpp"

#include <cmath>
#include <sstream>

#include "text_util.hpp"

namespace proptree {

namespace {

struct GroupAcc {
    std::uint64_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double v) {
        ++count;
        sum += v;
        sum_sq += v * v;
    }
    double mean() const { return sum / static_cast<double>(count); }
    double variance() const {
        if (count < 2) return 0.0;
        return std::max(0.0, sum_sq - sum * sum / static_cast<double>(count)) /
               static_cast<double>(count - 1);
    }
};

CellGapRow make_row(int id, std::string predicate, const GroupAcc& resp,
                    const GroupAcc& nonresp) {
    CellGapRow row;
    row.cell_id = id;
    row.predicate = std::move(predicate);
    row.count = resp.count + nonresp.count;
    row.respondents = resp.count;
    row.nonrespondents = nonresp.count;
    row.response_rate =
        row.count ? static_cast<double>(resp.count) / static_cast<double>(row.count) : 0.0;
    row.respondent_defined = resp.count > 0;
    row.nonrespondent_defined = nonresp.count > 0;
    if (row.respondent_defined) row.respondent_mean = resp.mean();
    if (row.nonrespondent_defined) row.nonrespondent_mean = nonresp.mean();
    row.gap_defined = row.respondent_defined && row.nonrespondent_defined;
    if (row.gap_defined) {
        row.gap = row.respondent_mean - row.nonrespondent_mean;
        row.gap_se = std::sqrt(resp.variance() / static_cast<double>(resp.count) +
                               nonresp.variance() / static_cast<double>(nonresp.count));
    }
    return row;
}

}  // namespace

std::pair<double, double> overall_gap(const Dataset& dataset, const std::string& outcome,
                                      const std::string& response) {
    const std::size_t out_col = dataset.column_index(outcome);
    const std::size_t resp_col = dataset.column_index(response);
    if (dataset.column(out_col).kind != ColumnKind::numeric)
        throw SchemaError("outcome column '" + outcome + "' must be numeric");
    if (dataset.column(resp_col).kind != ColumnKind::binary)
        throw SchemaError("response column '" + response + "' must be binary");

    GroupAcc resp, nonresp;
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
        const double v = dataset.numeric_value(out_col, i);
        (dataset.code(resp_col, i) == 1 ? resp : nonresp).add(v);
    }
    if (resp.count == 0) throw DataError("respondent group is empty");
    if (nonresp.count == 0) throw DataError("nonrespondent group is empty");
    return {resp.mean(), nonresp.mean()};
}

GapReport cell_gaps(const CellForm& structure, const Dataset& dataset,
                    const std::string& outcome, const std::string& response,
                    const GapConfig& config) {
    const std::size_t out_col = dataset.column_index(outcome);
    const std::size_t resp_col = dataset.column_index(response);
    if (dataset.column(out_col).kind != ColumnKind::numeric)
        throw SchemaError("outcome column '" + outcome + "' must be numeric");
    if (dataset.column(resp_col).kind != ColumnKind::binary)
        throw SchemaError("response column '" + response + "' must be binary");

    CellFormEvaluator eval(structure, dataset);
    const std::size_t n_cells = structure.cells.size();
    std::vector<GroupAcc> resp(n_cells), nonresp(n_cells);
    GroupAcc resp_all, nonresp_all;
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
        const auto c = static_cast<std::size_t>(eval.assign(i) - 1);
        const double v = dataset.numeric_value(out_col, i);
        if (dataset.code(resp_col, i) == 1) {
            resp[c].add(v);
            resp_all.add(v);
        } else {
            nonresp[c].add(v);
            nonresp_all.add(v);
        }
    }

    GapReport report;
    report.threshold = config.threshold;
    report.overall = make_row(0, "all", resp_all, nonresp_all);
    for (std::size_t c = 0; c < n_cells; ++c) {
        CellGapRow row =
            make_row(structure.cells[c].id,
                     predicate_text(structure.cells[c].predicate, structure.schema),
                     resp[c], nonresp[c]);
        if (row.gap_defined && row.response_rate < report.overall.response_rate) {
            const double limit = config.threshold >= 0.0 ? config.threshold
                                                         : 4.0 * row.gap_se;
            row.flagged = std::abs(row.gap) > limit;
        }
        report.cells.push_back(std::move(row));
    }
    return report;
}

std::string gap_report_csv(const GapReport& report) {
    std::ostringstream out;
    out << "cell,predicate,count,response_rate,respondent_mean,nonrespondent_mean,gap,"
           "gap_std_error,flag\n";
    auto line = [&](const CellGapRow& row) {
        out << row.cell_id << ',' << detail::csv_quote(row.predicate) << ',' << row.count
            << ',' << detail::format_double(row.response_rate) << ','
            << (row.respondent_defined ? detail::format_double(row.respondent_mean) : "")
            << ','
            << (row.nonrespondent_defined ? detail::format_double(row.nonrespondent_mean)
                                          : "")
            << ',' << (row.gap_defined ? detail::format_double(row.gap) : "") << ','
            << (row.gap_defined ? detail::format_double(row.gap_se) : "") << ','
            << (row.flagged ? 1 : 0) << '\n';
    };
    line(report.overall);
    for (const auto& row : report.cells) line(row);
    return out.str();
}

}  // namespace proptree
