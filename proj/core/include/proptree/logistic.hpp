#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "proptree/dataset.hpp"

namespace proptree {

// One factor of a model term: a column, optionally log-transformed (numeric
// columns with strictly positive values only).
struct TermFactor {
    std::string column;
    bool log = false;

    bool operator==(const TermFactor&) const = default;
};

// Model term. Encoding per factor: numeric -> value (or log value); ordinal
// -> integer score (1-based rank); binary -> 0/1; nominal -> one-hot dummies
// dropping the first level. Interactions encode the tensor product of their
// factors' blocks; quadratics square a numeric column.
struct TermSpec {
    enum class Kind { intercept, main, interaction, quadratic };

    Kind kind = Kind::intercept;
    std::vector<TermFactor> factors;

    static TermSpec intercept() { return {Kind::intercept, {}}; }
    static TermSpec main(std::string column, bool log = false) {
        return {Kind::main, {{std::move(column), log}}};
    }
    static TermSpec quadratic(std::string column) {
        return {Kind::quadratic, {{std::move(column), false}}};
    }
    static TermSpec interaction(std::vector<TermFactor> factors) {
        return {Kind::interaction, std::move(factors)};
    }

    std::string name() const;
    bool operator==(const TermSpec&) const = default;
};

struct LogisticModel {
    std::vector<TermSpec> terms;
    std::vector<ColumnSchema> schema;  // snapshot for later binding

    std::vector<double> beta;                 // per encoded column
    std::vector<double> se;                   // large-sample standard errors
    std::vector<std::string> column_names;    // encoded column labels
    std::vector<std::size_t> column_term;     // encoded column -> term index

    double deviance = 0.0;
    std::vector<double> deviance_path;  // per-IRLS-iteration deviance
    double aic = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    bool ridge_used = false;
    std::vector<std::string> warnings;  // stepwise-skipped terms etc.
};

// Maximum-likelihood logistic regression by iteratively reweighted least
// squares: converged when the score max-norm drops below 1e-8, capped at 25
// iterations (nonconvergence is reported, not fatal). Step-halving guards
// against deviance increases; a 1e-10 ridge is retried only when the normal
// equations fail, and is reported. Errors: rank-deficient design (naming the
// collinear columns), suspected complete separation (|beta| > 30 on a
// standardized scale), nonpositive values under a log transform.
LogisticModel fit_logistic(const Dataset& dataset, const std::vector<TermSpec>& terms,
                           const std::string& target);

double predict_logistic(const LogisticModel& model, const Dataset& dataset, std::size_t row);

// Row-batch form that binds the encoding once.
class LogisticPredictor {
  public:
    LogisticPredictor(const LogisticModel& model, const Dataset& dataset);
    ~LogisticPredictor();
    LogisticPredictor(const LogisticPredictor&) = delete;
    LogisticPredictor& operator=(const LogisticPredictor&) = delete;

    double probability(std::size_t row) const;

  private:
    struct Impl;
    Impl* impl_;
};

// Bidirectional stepwise search minimizing AIC, starting from the intercept-
// only model. Candidate moves are scanned in scope order (additions first,
// then deletions), so equal-AIC ties resolve to the earlier term. Terms whose
// fit fails are skipped with a warning recorded on the result.
LogisticModel stepwise_select(const Dataset& dataset, const std::vector<TermSpec>& scope,
                              const std::string& target);

// Scope used by the simulation study and the `logit` command presets: main
// effects for every non-role column, all pairwise interactions, and
// quadratics of numeric columns.
std::vector<TermSpec> mains_scope(const Dataset& dataset);
std::vector<TermSpec> quadratic_scope(const Dataset& dataset);

// Log-likelihood of a coefficient vector for a given term encoding; exposed
// for gradient checks.
double logistic_loglik(const Dataset& dataset, const std::vector<TermSpec>& terms,
                       const std::string& target, const std::vector<double>& beta);
std::vector<double> logistic_gradient(const Dataset& dataset,
                                      const std::vector<TermSpec>& terms,
                                      const std::string& target,
                                      const std::vector<double>& beta);

// Model report (term list, coefficients, SEs, AIC, convergence block) as JSON.
std::string logistic_report_json(const LogisticModel& model);
std::string logistic_coefficients_csv(const LogisticModel& model);

}  // namespace proptree
