#include "proptree/model_selection.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "proptree/parallel.hpp"
#include "proptree/rng.hpp"
#include "text_util.hpp"

namespace proptree {

std::vector<int> assign_folds(std::size_t n, std::uint64_t seed) {
    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    Rng rng(derive_seed(seed, 0xF01D5u));
    rng.shuffle(order);

    std::vector<int> fold(n, 0);
    const std::size_t base = n / 10;
    const std::size_t remainder = n % 10;
    std::size_t pos = 0;
    for (int j = 0; j < 10; ++j) {
        const std::size_t size = base + (static_cast<std::size_t>(j) < remainder ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) fold[order[pos++]] = j;
    }
    return fold;
}

CVTrace cv_trace_with_folds(const Dataset& dataset, const GrowConfig& config, int k_max,
                            const std::vector<int>& fold_of_row, std::uint64_t seed_label,
                            bool early_stop) {
    const std::size_t n = dataset.n_rows();
    if (n < 20) throw DataError("cross-validation needs at least 20 rows");
    if (k_max < 0) throw ConfigError("k_max must be >= 0");
    if (fold_of_row.size() != n) throw ConfigError("fold assignment length mismatch");

    std::array<std::size_t, 10> fold_sizes{};
    for (const int j : fold_of_row) {
        if (j < 0 || j >= 10) throw ConfigError("fold labels must be 0..9");
        ++fold_sizes[static_cast<std::size_t>(j)];
    }
    std::size_t lo = n, hi = 0;
    for (const std::size_t s : fold_sizes) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (lo == 0 || hi - lo > 1) throw ConfigError("fold sizes must differ by at most 1");

    // Baseline variance alpha_sq0 = n^-1 sum (R_i - R_bar)^2, accumulated in
    // row order.
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = dataset.response(i);
        sum += y;
        sum_sq += y * y;
    }
    const double r_bar = sum / static_cast<double>(n);
    const double alpha_sq0 =
        (sum_sq - sum * sum / static_cast<double>(n)) / static_cast<double>(n);
    if (alpha_sq0 <= 0.0) throw FitError("zero baseline variance (constant response)");

    // One incrementally grown tree per fold.
    std::array<std::vector<std::uint32_t>, 10> held_out;
    std::vector<std::unique_ptr<TreeGrower>> growers;
    growers.reserve(10);
    GrowConfig fold_config = config;
    fold_config.k_max = k_max;
    for (int j = 0; j < 10; ++j) {
        std::vector<std::uint32_t> train;
        train.reserve(n - fold_sizes[static_cast<std::size_t>(j)]);
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of_row[i] == j)
                held_out[static_cast<std::size_t>(j)].push_back(static_cast<std::uint32_t>(i));
            else
                train.push_back(static_cast<std::uint32_t>(i));
        }
        growers.push_back(std::make_unique<TreeGrower>(dataset, std::move(train), fold_config));
    }

    CVTrace trace;
    trace.alpha_sq0 = alpha_sq0;
    trace.r_bar = r_bar;
    trace.n = n;
    trace.seed = seed_label;

    for (int k = 0; k <= k_max; ++k) {
        std::array<double, 10> e{};
        parallel_for(10, [&](std::size_t j) {
            growers[j]->grow_to(k);
            double acc = 0.0;
            for (const std::uint32_t row : held_out[j]) {
                const double d = dataset.response(row) - growers[j]->predict_at(row, k);
                acc += d * d;
            }
            e[j] = 10.0 * acc / static_cast<double>(n);
        });

        CVEntry entry;
        entry.k = k;
        entry.fold_errors = e;
        double esum = 0.0;
        for (const double ej : e) esum += ej;
        entry.epsilon_sq = esum / 10.0;
        entry.r_sq = entry.epsilon_sq / alpha_sq0;
        double dev = 0.0;
        for (const double ej : e) dev += (ej - entry.epsilon_sq) * (ej - entry.epsilon_sq);
        entry.sigma = std::sqrt(dev / (9.0 * alpha_sq0));
        trace.entries.push_back(entry);

        if (early_stop && k >= 1) {
            const double delta =
                std::abs(trace.entries[static_cast<std::size_t>(k)].r_sq -
                         trace.entries[static_cast<std::size_t>(k) - 1].r_sq);
            if (delta < entry.sigma) break;
        }
    }
    return trace;
}

CVTrace cv_trace(const Dataset& dataset, const GrowConfig& config, int k_max,
                 std::uint64_t seed, bool early_stop) {
    return cv_trace_with_folds(dataset, config, k_max, assign_folds(dataset.n_rows(), seed),
                               seed, early_stop);
}

int select_k(std::span<const TracePoint> trace) {
    if (trace.size() < 2) return 0;
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
        if (std::abs(trace[k + 1].estimate - trace[k].estimate) < trace[k + 1].sigma)
            return static_cast<int>(k);
    }
    return static_cast<int>(trace.size()) - 1;
}

int select_k(const CVTrace& trace) {
    std::vector<TracePoint> points;
    points.reserve(trace.entries.size());
    for (const auto& e : trace.entries) points.push_back({e.r_sq, e.sigma});
    return select_k(points);
}

SelectionResult fit_with_selection(const Dataset& dataset, const GrowConfig& config,
                                   std::uint64_t seed, bool full_trace) {
    CVTrace trace = cv_trace(dataset, config, config.k_max, seed, !full_trace);
    const int k = select_k(trace);
    GrowConfig final_config = config;
    final_config.k_max = k;
    TreeModel model = grow_tree(dataset, final_config);
    return SelectionResult{k, std::move(trace), std::move(model)};
}

std::string trace_csv(const CVTrace& trace) {
    std::ostringstream out;
    out << "k,estimate,std_error\n";
    for (const auto& e : trace.entries)
        out << e.k << ',' << detail::format_double(e.r_sq) << ','
            << detail::format_double(e.sigma) << '\n';
    return out.str();
}

}  // namespace proptree
