#include "proptree/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "text_util.hpp"

namespace proptree {

using nlohmann::json;

std::string TermSpec::name() const {
    if (kind == Kind::intercept) return "(intercept)";
    std::string out;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) out += "*";
        out += factors[i].log ? "log(" + factors[i].column + ")" : factors[i].column;
    }
    if (kind == Kind::quadratic) out += "^2";
    return out;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^z) without overflow.
double log1p_exp(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

// One multiplicative piece of an encoded column.
struct Primitive {
    enum class Mode { value, log_value, square, score, code, dummy };
    std::size_t column = 0;
    Mode mode = Mode::value;
    std::int32_t level = 0;  // dummy only
};

struct EncodedColumn {
    std::vector<Primitive> primitives;  // empty = constant 1 (intercept)
    std::size_t term = 0;
    std::string name;
};

class TermEncoder {
  public:
    TermEncoder(const Dataset& dataset, const std::vector<TermSpec>& terms)
        : dataset_(&dataset) {
        for (std::size_t t = 0; t < terms.size(); ++t) append_term(terms[t], t);
    }

    std::size_t n_columns() const { return columns_.size(); }
    const std::vector<EncodedColumn>& columns() const { return columns_; }

    double value(const EncodedColumn& col, std::size_t row) const {
        double v = 1.0;
        for (const Primitive& p : col.primitives) {
            switch (p.mode) {
                case Primitive::Mode::value:
                    v *= dataset_->numeric_value(p.column, row);
                    break;
                case Primitive::Mode::log_value: {
                    const double x = dataset_->numeric_value(p.column, row);
                    if (!(x > 0.0))
                        throw DataError("log transform of nonpositive value in column '" +
                                        dataset_->column(p.column).name + "'");
                    v *= std::log(x);
                    break;
                }
                case Primitive::Mode::square: {
                    const double x = dataset_->numeric_value(p.column, row);
                    v *= x * x;
                    break;
                }
                case Primitive::Mode::score:
                    v *= static_cast<double>(dataset_->code(p.column, row) + 1);
                    break;
                case Primitive::Mode::code:
                    v *= static_cast<double>(dataset_->code(p.column, row));
                    break;
                case Primitive::Mode::dummy:
                    v *= dataset_->code(p.column, row) == p.level ? 1.0 : 0.0;
                    break;
            }
            if (v == 0.0) break;
        }
        return v;
    }

  private:
    struct Block {
        std::vector<Primitive> alternatives;  // one primitive per encoded column
        std::vector<std::string> labels;
    };

    Block factor_block(const TermFactor& factor) const {
        const std::size_t c = dataset_->column_index(factor.column);
        const ColumnSchema& col = dataset_->column(c);
        Block block;
        switch (col.kind) {
            case ColumnKind::numeric:
                block.alternatives.push_back(
                    {c, factor.log ? Primitive::Mode::log_value : Primitive::Mode::value, 0});
                block.labels.push_back(factor.log ? "log(" + col.name + ")" : col.name);
                break;
            case ColumnKind::ordinal:
                if (factor.log)
                    throw ConfigError("log transform requires a numeric column: " + col.name);
                block.alternatives.push_back({c, Primitive::Mode::score, 0});
                block.labels.push_back(col.name);
                break;
            case ColumnKind::binary:
                if (factor.log)
                    throw ConfigError("log transform requires a numeric column: " + col.name);
                block.alternatives.push_back({c, Primitive::Mode::code, 0});
                block.labels.push_back(col.name);
                break;
            case ColumnKind::nominal: {
                if (factor.log)
                    throw ConfigError("log transform requires a numeric column: " + col.name);
                // Reference level = first level.
                for (std::size_t l = 1; l < col.levels.size(); ++l) {
                    block.alternatives.push_back(
                        {c, Primitive::Mode::dummy, static_cast<std::int32_t>(l)});
                    block.labels.push_back(col.name + "[" + col.levels[l] + "]");
                }
                break;
            }
        }
        return block;
    }

    void append_term(const TermSpec& term, std::size_t index) {
        switch (term.kind) {
            case TermSpec::Kind::intercept:
                columns_.push_back({{}, index, "(intercept)"});
                return;
            case TermSpec::Kind::main: {
                if (term.factors.size() != 1)
                    throw ConfigError("main term needs exactly one column");
                const Block b = factor_block(term.factors[0]);
                for (std::size_t i = 0; i < b.alternatives.size(); ++i)
                    columns_.push_back({{b.alternatives[i]}, index, b.labels[i]});
                return;
            }
            case TermSpec::Kind::quadratic: {
                if (term.factors.size() != 1)
                    throw ConfigError("quadratic term needs exactly one column");
                const std::size_t c = dataset_->column_index(term.factors[0].column);
                if (dataset_->column(c).kind != ColumnKind::numeric)
                    throw ConfigError("quadratic term requires a numeric column: " +
                                      term.factors[0].column);
                columns_.push_back(
                    {{{c, Primitive::Mode::square, 0}}, index, term.factors[0].column + "^2"});
                return;
            }
            case TermSpec::Kind::interaction: {
                if (term.factors.size() < 2 || term.factors.size() > 3)
                    throw ConfigError("interaction arity must be 2 or 3");
                std::vector<Block> blocks;
                for (const auto& f : term.factors) blocks.push_back(factor_block(f));
                // Tensor product of the factor blocks.
                std::vector<std::vector<Primitive>> prims{{}};
                std::vector<std::string> labels{""};
                for (const Block& b : blocks) {
                    std::vector<std::vector<Primitive>> next_prims;
                    std::vector<std::string> next_labels;
                    for (std::size_t i = 0; i < prims.size(); ++i) {
                        for (std::size_t a = 0; a < b.alternatives.size(); ++a) {
                            auto p = prims[i];
                            p.push_back(b.alternatives[a]);
                            next_prims.push_back(std::move(p));
                            next_labels.push_back(labels[i].empty()
                                                      ? b.labels[a]
                                                      : labels[i] + "*" + b.labels[a]);
                        }
                    }
                    prims = std::move(next_prims);
                    labels = std::move(next_labels);
                }
                for (std::size_t i = 0; i < prims.size(); ++i)
                    columns_.push_back({std::move(prims[i]), index, labels[i]});
                return;
            }
        }
    }

    const Dataset* dataset_;
    std::vector<EncodedColumn> columns_;
};

std::size_t resolve_target(const Dataset& dataset, const std::string& target) {
    const std::size_t c = dataset.column_index(target);
    if (dataset.column(c).kind != ColumnKind::binary)
        throw SchemaError("logistic target '" + target + "' must be binary");
    return c;
}

struct FitInputs {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> names;
    std::vector<std::size_t> column_term;
};

FitInputs build_inputs(const Dataset& dataset, const std::vector<TermSpec>& terms,
                       const std::string& target) {
    const std::size_t target_col = resolve_target(dataset, target);
    TermEncoder encoder(dataset, terms);
    const std::size_t n = dataset.n_rows();
    const std::size_t p = encoder.n_columns();
    if (p == 0) throw ConfigError("term list encodes no columns");

    FitInputs in;
    in.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    in.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < p; ++j) {
        const auto& col = encoder.columns()[j];
        in.names.push_back(col.name);
        in.column_term.push_back(col.term);
        for (std::size_t i = 0; i < n; ++i)
            in.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                encoder.value(col, i);
    }
    for (std::size_t i = 0; i < n; ++i)
        in.y(static_cast<Eigen::Index>(i)) =
            static_cast<double>(dataset.code(target_col, i));
    return in;
}

struct IrlsResult {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    double deviance = 0.0;
    std::vector<double> deviance_path;
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    bool ridge_used = false;
};

constexpr double kGradTol = 1e-8;
constexpr int kMaxIter = 25;
constexpr double kRidge = 1e-10;
constexpr double kSeparationLimit = 30.0;

double deviance_of(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        ll += y(i) * eta(i) - log1p_exp(eta(i));
    return -2.0 * ll;
}

// Names the redundant columns of a rank-deficient design.
[[noreturn]] void throw_rank_deficient(const Eigen::MatrixXd& X,
                                       const std::vector<std::string>& names) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    const auto perm = qr.colsPermutation().indices();
    std::string bad;
    for (Eigen::Index j = qr.rank(); j < X.cols(); ++j) {
        if (!bad.empty()) bad += ", ";
        bad += names[static_cast<std::size_t>(perm(j))];
    }
    throw FitError("rank-deficient design; collinear columns: " + bad);
}

IrlsResult irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const std::vector<std::string>& names,
                const Eigen::VectorXd* warm_start) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n <= p)
        throw FitError("need more rows than coefficients (" + std::to_string(n) + " rows, " +
                       std::to_string(p) + " coefficients)");

    // Column scales for separation detection.
    Eigen::VectorXd scale(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mean = X.col(j).mean();
        const double var = (X.col(j).array() - mean).square().sum() /
                           static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
        scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    }

    IrlsResult out;
    Eigen::VectorXd beta = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = X * beta;
    double dev = deviance_of(eta, y);
    out.deviance_path.push_back(dev);

    for (int iter = 1; iter <= kMaxIter; ++iter) {
        out.iterations = iter;
        Eigen::VectorXd prob(n), w(n), z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double pi = sigmoid(eta(i));
            prob(i) = pi;
            const double pc = std::clamp(pi, 1e-12, 1.0 - 1e-12);
            w(i) = pc * (1.0 - pc);
            z(i) = eta(i) + (y(i) - pc) / w(i);
        }

        const Eigen::VectorXd grad = X.transpose() * (y - prob);
        out.gradient_norm = grad.cwiseAbs().maxCoeff();
        if (out.gradient_norm < kGradTol) {
            out.converged = true;
            break;
        }

        Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
        const Eigen::VectorXd xtwz = X.transpose() * (w.asDiagonal() * z);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(xtwx);
        if (iter == 1) {
            // The weights are strictly positive, so X'WX is singular exactly
            // when the design is rank deficient.
            const auto d = ldlt.vectorD();
            const double d_max = d.cwiseAbs().maxCoeff();
            if (!(d.minCoeff() > d_max * 1e-12)) throw_rank_deficient(X, names);
        }
        Eigen::VectorXd next = ldlt.solve(xtwz);
        if (ldlt.info() != Eigen::Success || !next.allFinite()) {
            xtwx.diagonal().array() += kRidge;
            next = xtwx.ldlt().solve(xtwz);
            out.ridge_used = true;
            if (!next.allFinite()) throw FitError("normal equations unsolvable");
        }

        // Step-halving when the deviance would increase. The tolerance is
        // relative: near the optimum the deviance difference is pure
        // rounding noise on the order of n ulps.
        const double dev_tol = 1e-10 * std::max(1.0, std::abs(dev));
        Eigen::VectorXd next_eta = X * next;
        double next_dev = deviance_of(next_eta, y);
        int halvings = 0;
        while (next_dev > dev + dev_tol && halvings < 20) {
            next = (beta + next) / 2.0;
            next_eta = X * next;
            next_dev = deviance_of(next_eta, y);
            ++halvings;
        }
        beta = next;
        eta = next_eta;
        dev = next_dev;
        out.deviance_path.push_back(dev);

        for (Eigen::Index j = 0; j < p; ++j) {
            if (std::abs(beta(j)) * scale(j) > kSeparationLimit)
                throw FitError("complete separation suspected (coefficient for " +
                               names[static_cast<std::size_t>(j)] + " diverges)");
        }
    }

    // Final score and curvature at the solution.
    Eigen::VectorXd prob(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double pi = sigmoid(eta(i));
        prob(i) = pi;
        const double pc = std::clamp(pi, 1e-12, 1.0 - 1e-12);
        w(i) = pc * (1.0 - pc);
    }
    out.gradient_norm = (X.transpose() * (y - prob)).cwiseAbs().maxCoeff();
    out.converged = out.converged || out.gradient_norm < kGradTol;

    Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
    Eigen::MatrixXd cov = xtwx.ldlt().solve(
        Eigen::MatrixXd::Identity(p, p));
    out.se.resize(p);
    for (Eigen::Index j = 0; j < p; ++j)
        out.se(j) = cov(j, j) > 0.0 ? std::sqrt(cov(j, j)) : 0.0;
    out.beta = std::move(beta);
    out.deviance = dev;
    return out;
}

LogisticModel assemble_model(const Dataset& dataset, const std::vector<TermSpec>& terms,
                             const FitInputs& in, const IrlsResult& fit) {
    LogisticModel model;
    model.terms = terms;
    for (const auto& term : terms)
        for (const auto& factor : term.factors) {
            const auto c = dataset.column_index(factor.column);
            const auto& col = dataset.column(c);
            if (std::find(model.schema.begin(), model.schema.end(), col) ==
                model.schema.end())
                model.schema.push_back(col);
        }
    model.beta.assign(fit.beta.data(), fit.beta.data() + fit.beta.size());
    model.se.assign(fit.se.data(), fit.se.data() + fit.se.size());
    model.column_names = in.names;
    model.column_term = in.column_term;
    model.deviance = fit.deviance;
    model.deviance_path = fit.deviance_path;
    model.aic = fit.deviance + 2.0 * static_cast<double>(fit.beta.size());
    model.iterations = fit.iterations;
    model.gradient_norm = fit.gradient_norm;
    model.converged = fit.converged;
    model.ridge_used = fit.ridge_used;
    return model;
}

}  // namespace

LogisticModel fit_logistic(const Dataset& dataset, const std::vector<TermSpec>& terms,
                           const std::string& target) {
    const FitInputs in = build_inputs(dataset, terms, target);
    const IrlsResult fit = irls(in.X, in.y, in.names, nullptr);
    return assemble_model(dataset, terms, in, fit);
}

double logistic_loglik(const Dataset& dataset, const std::vector<TermSpec>& terms,
                       const std::string& target, const std::vector<double>& beta) {
    const FitInputs in = build_inputs(dataset, terms, target);
    if (static_cast<Eigen::Index>(beta.size()) != in.X.cols())
        throw ConfigError("beta length does not match the encoded design");
    const Eigen::Map<const Eigen::VectorXd> b(beta.data(),
                                              static_cast<Eigen::Index>(beta.size()));
    const Eigen::VectorXd eta = in.X * b;
    return -0.5 * deviance_of(eta, in.y);
}

std::vector<double> logistic_gradient(const Dataset& dataset,
                                      const std::vector<TermSpec>& terms,
                                      const std::string& target,
                                      const std::vector<double>& beta) {
    const FitInputs in = build_inputs(dataset, terms, target);
    if (static_cast<Eigen::Index>(beta.size()) != in.X.cols())
        throw ConfigError("beta length does not match the encoded design");
    const Eigen::Map<const Eigen::VectorXd> b(beta.data(),
                                              static_cast<Eigen::Index>(beta.size()));
    const Eigen::VectorXd eta = in.X * b;
    Eigen::VectorXd prob(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) prob(i) = sigmoid(eta(i));
    const Eigen::VectorXd g = in.X.transpose() * (in.y - prob);
    return std::vector<double>(g.data(), g.data() + g.size());
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

struct LogisticPredictor::Impl {
    TermEncoder encoder;
    const LogisticModel* model;
    Impl(const LogisticModel& m, const Dataset& d) : encoder(d, m.terms), model(&m) {}
};

LogisticPredictor::LogisticPredictor(const LogisticModel& model, const Dataset& dataset) {
    for (const auto& expected : model.schema) {
        const std::size_t c = dataset.column_index(expected.name);
        if (dataset.column(c) != expected)
            throw SchemaError("column '" + expected.name +
                              "' does not match the model's schema");
    }
    impl_ = new Impl(model, dataset);
    if (impl_->encoder.n_columns() != model.beta.size()) {
        delete impl_;
        throw ConfigError("model coefficients do not match the encoded design");
    }
}

LogisticPredictor::~LogisticPredictor() { delete impl_; }

double LogisticPredictor::probability(std::size_t row) const {
    double eta = 0.0;
    const auto& cols = impl_->encoder.columns();
    for (std::size_t j = 0; j < cols.size(); ++j)
        eta += impl_->model->beta[j] * impl_->encoder.value(cols[j], row);
    // Kept strictly inside (0,1); sigmoid itself rounds to 1 past eta ~ 37.
    return std::clamp(sigmoid(eta), 1e-12, 1.0 - 1e-12);
}

double predict_logistic(const LogisticModel& model, const Dataset& dataset, std::size_t row) {
    return LogisticPredictor(model, dataset).probability(row);
}

// ---------------------------------------------------------------------------
// Stepwise selection
// ---------------------------------------------------------------------------

LogisticModel stepwise_select(const Dataset& dataset, const std::vector<TermSpec>& scope,
                              const std::string& target) {
    if (scope.empty() || scope.front().kind != TermSpec::Kind::intercept)
        throw ConfigError("stepwise scope must start with the intercept");

    // Encode the full scope once; candidate fits gather column subsets.
    const FitInputs full = build_inputs(dataset, scope, target);

    auto columns_of = [&](const std::vector<std::size_t>& term_idx) {
        std::vector<std::size_t> cols;
        for (std::size_t j = 0; j < full.column_term.size(); ++j)
            if (std::find(term_idx.begin(), term_idx.end(), full.column_term[j]) !=
                term_idx.end())
                cols.push_back(j);
        return cols;
    };

    std::vector<std::string> warnings;
    auto fit_subset = [&](const std::vector<std::size_t>& term_idx,
                          const Eigen::VectorXd* warm,
                          const std::vector<std::size_t>& warm_cols) -> std::optional<IrlsResult> {
        const std::vector<std::size_t> cols = columns_of(term_idx);
        Eigen::MatrixXd X(full.X.rows(), static_cast<Eigen::Index>(cols.size()));
        std::vector<std::string> names;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            X.col(static_cast<Eigen::Index>(j)) =
                full.X.col(static_cast<Eigen::Index>(cols[j]));
            names.push_back(full.names[cols[j]]);
        }
        std::optional<Eigen::VectorXd> start;
        if (warm) {
            start = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols.size()));
            for (std::size_t j = 0; j < cols.size(); ++j) {
                const auto it = std::find(warm_cols.begin(), warm_cols.end(), cols[j]);
                if (it != warm_cols.end())
                    (*start)(static_cast<Eigen::Index>(j)) =
                        (*warm)(static_cast<Eigen::Index>(it - warm_cols.begin()));
            }
        }
        try {
            return irls(X, full.y, names, start ? &*start : nullptr);
        } catch (const FitError& e) {
            warnings.push_back(e.what());
            return std::nullopt;
        }
    };

    std::vector<std::size_t> current{0};  // term indices; intercept always in
    auto current_fit = fit_subset(current, nullptr, {});
    if (!current_fit) throw FitError("intercept-only model failed to fit");
    double current_aic =
        current_fit->deviance + 2.0 * static_cast<double>(current_fit->beta.size());
    std::vector<std::size_t> current_cols = columns_of(current);

    while (true) {
        std::optional<std::vector<std::size_t>> best_move;
        std::optional<IrlsResult> best_fit;
        double best_aic = current_aic;

        // Additions in scope order.
        for (std::size_t t = 1; t < scope.size(); ++t) {
            if (std::find(current.begin(), current.end(), t) != current.end()) continue;
            auto candidate = current;
            candidate.push_back(t);
            std::sort(candidate.begin(), candidate.end());
            auto fit = fit_subset(candidate, &current_fit->beta, current_cols);
            if (!fit) continue;
            const double aic = fit->deviance + 2.0 * static_cast<double>(fit->beta.size());
            if (aic < best_aic - 1e-9) {
                best_aic = aic;
                best_move = candidate;
                best_fit = std::move(fit);
            }
        }
        // Deletions, skipping the intercept.
        for (std::size_t i = 1; i < current.size(); ++i) {
            auto candidate = current;
            candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(i));
            auto fit = fit_subset(candidate, &current_fit->beta, current_cols);
            if (!fit) continue;
            const double aic = fit->deviance + 2.0 * static_cast<double>(fit->beta.size());
            if (aic < best_aic - 1e-9) {
                best_aic = aic;
                best_move = candidate;
                best_fit = std::move(fit);
            }
        }

        if (!best_move) break;
        current = std::move(*best_move);
        current_fit = std::move(best_fit);
        current_aic = best_aic;
        current_cols = columns_of(current);
    }

    std::vector<TermSpec> final_terms;
    for (const std::size_t t : current) final_terms.push_back(scope[t]);
    LogisticModel model = fit_logistic(dataset, final_terms, target);
    model.warnings = std::move(warnings);
    return model;
}

std::vector<TermSpec> mains_scope(const Dataset& dataset) {
    std::vector<TermSpec> scope{TermSpec::intercept()};
    for (const auto& col : dataset.schema()) {
        if (col.name == dataset.response_name() || col.name == dataset.outcome_name())
            continue;
        scope.push_back(TermSpec::main(col.name));
    }
    return scope;
}

std::vector<TermSpec> quadratic_scope(const Dataset& dataset) {
    std::vector<TermSpec> scope = mains_scope(dataset);
    std::vector<std::string> vars;
    for (const auto& col : dataset.schema()) {
        if (col.name == dataset.response_name() || col.name == dataset.outcome_name())
            continue;
        vars.push_back(col.name);
    }
    for (std::size_t a = 0; a < vars.size(); ++a)
        for (std::size_t b = a + 1; b < vars.size(); ++b)
            scope.push_back(TermSpec::interaction({{vars[a], false}, {vars[b], false}}));
    for (const auto& col : dataset.schema())
        if (col.kind == ColumnKind::numeric && col.name != dataset.outcome_name())
            scope.push_back(TermSpec::quadratic(col.name));
    return scope;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string logistic_report_json(const LogisticModel& model) {
    json doc;
    doc["format"] = "proptree.logit";
    doc["version"] = 1;
    doc["terms"] = json::array();
    for (const auto& term : model.terms) doc["terms"].push_back(term.name());
    doc["coefficients"] = json::array();
    for (std::size_t j = 0; j < model.beta.size(); ++j) {
        json jc;
        jc["column"] = model.column_names[j];
        jc["term"] = model.terms[model.column_term[j]].name();
        jc["estimate"] = model.beta[j];
        jc["std_error"] = model.se[j];
        doc["coefficients"].push_back(std::move(jc));
    }
    doc["deviance"] = model.deviance;
    doc["aic"] = model.aic;
    doc["convergence"] = {{"converged", model.converged},
                          {"iterations", model.iterations},
                          {"gradient_norm", model.gradient_norm},
                          {"ridge_used", model.ridge_used}};
    if (!model.warnings.empty()) doc["warnings"] = model.warnings;
    return doc.dump(2) + "\n";
}

std::string logistic_coefficients_csv(const LogisticModel& model) {
    std::ostringstream out;
    out << "column,term,estimate,std_error\n";
    for (std::size_t j = 0; j < model.beta.size(); ++j) {
        out << detail::csv_quote(model.column_names[j]) << ','
            << detail::csv_quote(model.terms[model.column_term[j]].name()) << ','
            << detail::format_double(model.beta[j]) << ','
            << detail::format_double(model.se[j]) << '\n';
    }
    return out.str();
}

}  // namespace proptree
