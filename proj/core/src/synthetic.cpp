#include "proptree/synthetic.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "proptree/linear_form.hpp"
#include "proptree/rng.hpp"

namespace proptree {

using nlohmann::json;

namespace {

void validate_feature(const FeatureGen& f) {
    const auto& col = f.column;
    const auto& dist = f.dist;
    switch (dist.type) {
        case FeatureDist::Type::uniform_int:
        case FeatureDist::Type::uniform_real:
            if (col.kind != ColumnKind::numeric)
                throw ConfigError("uniform distribution needs a numeric column: " + col.name);
            if (dist.a > dist.b)
                throw ConfigError("uniform bounds reversed on column " + col.name);
            break;
        case FeatureDist::Type::normal:
        case FeatureDist::Type::lognormal:
            if (col.kind != ColumnKind::numeric)
                throw ConfigError("normal distribution needs a numeric column: " + col.name);
            if (dist.b < 0.0) throw ConfigError("negative sd on column " + col.name);
            break;
        case FeatureDist::Type::categorical: {
            if (col.kind != ColumnKind::ordinal && col.kind != ColumnKind::nominal)
                throw ConfigError("categorical distribution needs levels: " + col.name);
            if (dist.weights.size() != col.levels.size())
                throw ConfigError("weights do not match levels on column " + col.name);
            double total = 0.0;
            for (const double w : dist.weights) {
                if (w < 0.0) throw ConfigError("negative weight on column " + col.name);
                total += w;
            }
            if (total <= 0.0) throw ConfigError("weights sum to zero on column " + col.name);
            break;
        }
        case FeatureDist::Type::bernoulli:
            if (col.kind != ColumnKind::binary)
                throw ConfigError("bernoulli distribution needs a binary column: " + col.name);
            if (dist.a < 0.0 || dist.a > 1.0)
                throw ConfigError("bernoulli p outside [0,1] on column " + col.name);
            break;
    }
}

std::int32_t draw_categorical(Rng& rng, const std::vector<double>& weights) {
    double total = 0.0;
    for (const double w : weights) total += w;
    const double u = rng.next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<std::int32_t>(i);
    }
    return static_cast<std::int32_t>(weights.size()) - 1;
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n < 1) throw ConfigError("synthetic spec needs n >= 1");
    if (spec.features.empty()) throw ConfigError("synthetic spec needs feature columns");
    for (const auto& f : spec.features) validate_feature(f);

    Rng rng(spec.seed);
    const std::size_t n = spec.n;

    // Feature columns, one column at a time, rows in order.
    std::vector<ColumnSchema> schema;
    std::vector<std::vector<double>> numeric(spec.features.size());
    std::vector<std::vector<std::int32_t>> codes(spec.features.size());
    for (std::size_t c = 0; c < spec.features.size(); ++c) {
        const auto& f = spec.features[c];
        schema.push_back(f.column);
        if (f.column.kind == ColumnKind::numeric) numeric[c].resize(n);
        else codes[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            switch (f.dist.type) {
                case FeatureDist::Type::uniform_int:
                    numeric[c][i] = static_cast<double>(rng.uniform_int(
                        static_cast<std::int64_t>(f.dist.a), static_cast<std::int64_t>(f.dist.b)));
                    break;
                case FeatureDist::Type::uniform_real:
                    numeric[c][i] = rng.uniform_real(f.dist.a, f.dist.b);
                    break;
                case FeatureDist::Type::normal:
                    numeric[c][i] = rng.normal(f.dist.a, f.dist.b);
                    break;
                case FeatureDist::Type::lognormal:
                    numeric[c][i] = std::exp(rng.normal(f.dist.a, f.dist.b));
                    break;
                case FeatureDist::Type::categorical:
                    codes[c][i] = draw_categorical(rng, f.dist.weights);
                    break;
                case FeatureDist::Type::bernoulli:
                    codes[c][i] = rng.bernoulli(f.dist.a) ? 1 : 0;
                    break;
            }
        }
    }

    Dataset features(schema, std::move(numeric), std::move(codes));

    // True propensities.
    std::vector<double> p(n);
    std::vector<std::size_t> cell_of_row(n, 0);
    std::size_t n_cells = 1;
    switch (spec.propensity.type) {
        case PropensityModel::Type::constant:
            std::fill(p.begin(), p.end(), spec.propensity.constant);
            break;
        case PropensityModel::Type::tree: {
            if (!spec.propensity.tree) throw ConfigError("propensity tree missing");
            const BoundTree bound(*spec.propensity.tree, features);
            const CellForm cells = to_cell_form(*spec.propensity.tree);
            n_cells = cells.cells.size();
            std::vector<std::size_t> cell_of_leaf(spec.propensity.tree->nodes().size(), 0);
            for (std::size_t c = 0; c < cells.cells.size(); ++c)
                cell_of_leaf[static_cast<std::size_t>(cells.cells[c].leaf_node)] = c;
            for (std::size_t i = 0; i < n; ++i) {
                const auto leaf = static_cast<std::size_t>(bound.leaf_node(i));
                p[i] = spec.propensity.tree->nodes()[leaf].mean;
                cell_of_row[i] = cell_of_leaf[leaf];
            }
            break;
        }
        case PropensityModel::Type::logistic: {
            std::vector<std::pair<std::size_t, double>> terms;
            for (const auto& [name, coef] : spec.propensity.coefficients)
                terms.emplace_back(features.column_index(name), coef);
            for (std::size_t i = 0; i < n; ++i) {
                double z = spec.propensity.intercept;
                for (const auto& [col, coef] : terms)
                    z += coef * features.scalar_value(col, i);
                p[i] = 1.0 / (1.0 + std::exp(-z));
            }
            break;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!(p[i] >= 0.0 && p[i] <= 1.0))
            throw ConfigError("propensity outside [0,1] at row " + std::to_string(i + 1));

    // Realized response, row by row.
    std::vector<std::int32_t> response(n);
    for (std::size_t i = 0; i < n; ++i) response[i] = rng.bernoulli(p[i]) ? 1 : 0;

    // Optional outcome, row by row.
    std::vector<double> outcome;
    if (spec.outcome) {
        const auto& om = *spec.outcome;
        if (om.cell_means.size() != n_cells)
            throw ConfigError("outcome cell_means must have one entry per propensity cell (" +
                              std::to_string(n_cells) + ")");
        if (!om.nonrespondent_shifts.empty() && om.nonrespondent_shifts.size() != n_cells)
            throw ConfigError("outcome nonrespondent_shifts length mismatch");
        if (om.noise_sd < 0.0) throw ConfigError("negative outcome noise_sd");
        outcome.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double v = om.cell_means[cell_of_row[i]];
            if (!om.nonrespondent_shifts.empty() && response[i] == 0)
                v += om.nonrespondent_shifts[cell_of_row[i]];
            if (om.noise_sd > 0.0) v += rng.normal(0.0, om.noise_sd);
            outcome[i] = v;
        }
    }

    // Assemble the final dataset.
    std::vector<ColumnSchema> full_schema = features.schema();
    std::vector<std::vector<double>> full_numeric;
    std::vector<std::vector<std::int32_t>> full_codes;
    for (std::size_t c = 0; c < features.n_columns(); ++c) {
        std::vector<double> num;
        std::vector<std::int32_t> code;
        if (features.is_numeric(c)) {
            num.resize(n);
            for (std::size_t i = 0; i < n; ++i) num[i] = features.numeric_value(c, i);
        } else {
            code.resize(n);
            for (std::size_t i = 0; i < n; ++i) code[i] = features.code(c, i);
        }
        full_numeric.push_back(std::move(num));
        full_codes.push_back(std::move(code));
    }
    full_schema.push_back({spec.response_name, ColumnKind::binary, {}});
    full_numeric.emplace_back();
    full_codes.push_back(std::move(response));
    std::string outcome_name;
    if (spec.outcome) {
        outcome_name = spec.outcome->name;
        full_schema.push_back({outcome_name, ColumnKind::numeric, {}});
        full_numeric.push_back(std::move(outcome));
        full_codes.emplace_back();
    }
    return Dataset(std::move(full_schema), std::move(full_numeric), std::move(full_codes),
                   spec.response_name, outcome_name);
}

// ---------------------------------------------------------------------------
// Spec file
// ---------------------------------------------------------------------------

namespace {

std::string dist_name(FeatureDist::Type t) {
    switch (t) {
        case FeatureDist::Type::uniform_int: return "uniform_int";
        case FeatureDist::Type::uniform_real: return "uniform_real";
        case FeatureDist::Type::normal: return "normal";
        case FeatureDist::Type::lognormal: return "lognormal";
        case FeatureDist::Type::categorical: return "categorical";
        case FeatureDist::Type::bernoulli: return "bernoulli";
    }
    return "uniform_int";
}

FeatureDist::Type dist_from_name(const std::string& s) {
    if (s == "uniform_int") return FeatureDist::Type::uniform_int;
    if (s == "uniform_real") return FeatureDist::Type::uniform_real;
    if (s == "normal") return FeatureDist::Type::normal;
    if (s == "lognormal") return FeatureDist::Type::lognormal;
    if (s == "categorical") return FeatureDist::Type::categorical;
    if (s == "bernoulli") return FeatureDist::Type::bernoulli;
    throw ConfigError("unknown distribution '" + s + "'");
}

}  // namespace

SyntheticSpec load_synthetic_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open synthetic spec '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("synthetic spec '" + path + "': " + e.what());
    }

    SyntheticSpec spec;
    if (!doc.contains("seed") || !doc["seed"].is_number_integer())
        throw ConfigError("synthetic spec needs an integer seed field");
    spec.seed = doc["seed"].get<std::uint64_t>();
    spec.n = doc.at("n").get<std::uint64_t>();
    spec.response_name = doc.value("response", "RESP");

    for (const auto& jf : doc.at("features")) {
        FeatureGen f;
        f.column.name = jf.at("name").get<std::string>();
        f.column.kind = column_kind_from_string(jf.at("kind").get<std::string>());
        if (jf.contains("levels"))
            f.column.levels = jf["levels"].get<std::vector<std::string>>();
        const auto& jd = jf.at("dist");
        f.dist.type = dist_from_name(jd.at("type").get<std::string>());
        switch (f.dist.type) {
            case FeatureDist::Type::uniform_int:
            case FeatureDist::Type::uniform_real:
                f.dist.a = jd.at("lo").get<double>();
                f.dist.b = jd.at("hi").get<double>();
                break;
            case FeatureDist::Type::normal:
            case FeatureDist::Type::lognormal:
                f.dist.a = jd.at("mean").get<double>();
                f.dist.b = jd.at("sd").get<double>();
                break;
            case FeatureDist::Type::categorical:
                f.dist.weights = jd.at("weights").get<std::vector<double>>();
                break;
            case FeatureDist::Type::bernoulli:
                f.dist.a = jd.at("p").get<double>();
                break;
        }
        spec.features.push_back(std::move(f));
    }

    const auto& jp = doc.at("propensity");
    const std::string ptype = jp.at("type").get<std::string>();
    if (ptype == "constant") {
        spec.propensity.type = PropensityModel::Type::constant;
        spec.propensity.constant = jp.at("value").get<double>();
    } else if (ptype == "tree") {
        spec.propensity.type = PropensityModel::Type::tree;
        spec.propensity.tree = TreeModel::from_json(jp.at("tree").dump());
    } else if (ptype == "logistic") {
        spec.propensity.type = PropensityModel::Type::logistic;
        spec.propensity.intercept = jp.value("intercept", 0.0);
        for (const auto& [name, coef] : jp.at("coefficients").items())
            spec.propensity.coefficients.emplace_back(name, coef.get<double>());
    } else {
        throw ConfigError("unknown propensity type '" + ptype + "'");
    }

    if (doc.contains("outcome")) {
        OutcomeModel om;
        const auto& jo = doc["outcome"];
        om.name = jo.value("name", "WAGE");
        om.cell_means = jo.at("cell_means").get<std::vector<double>>();
        if (jo.contains("nonrespondent_shifts"))
            om.nonrespondent_shifts = jo["nonrespondent_shifts"].get<std::vector<double>>();
        om.noise_sd = jo.value("noise_sd", 0.0);
        spec.outcome = std::move(om);
    }
    return spec;
}

void write_synthetic_spec(const SyntheticSpec& spec, const std::string& path) {
    json doc;
    doc["n"] = spec.n;
    doc["seed"] = spec.seed;
    doc["response"] = spec.response_name;
    doc["features"] = json::array();
    for (const auto& f : spec.features) {
        json jf;
        jf["name"] = f.column.name;
        jf["kind"] = to_string(f.column.kind);
        if (!f.column.levels.empty()) jf["levels"] = f.column.levels;
        json jd;
        jd["type"] = dist_name(f.dist.type);
        switch (f.dist.type) {
            case FeatureDist::Type::uniform_int:
            case FeatureDist::Type::uniform_real:
                jd["lo"] = f.dist.a;
                jd["hi"] = f.dist.b;
                break;
            case FeatureDist::Type::normal:
            case FeatureDist::Type::lognormal:
                jd["mean"] = f.dist.a;
                jd["sd"] = f.dist.b;
                break;
            case FeatureDist::Type::categorical:
                jd["weights"] = f.dist.weights;
                break;
            case FeatureDist::Type::bernoulli:
                jd["p"] = f.dist.a;
                break;
        }
        jf["dist"] = std::move(jd);
        doc["features"].push_back(std::move(jf));
    }
    json jp;
    switch (spec.propensity.type) {
        case PropensityModel::Type::constant:
            jp["type"] = "constant";
            jp["value"] = spec.propensity.constant;
            break;
        case PropensityModel::Type::tree:
            jp["type"] = "tree";
            jp["tree"] = json::parse(spec.propensity.tree->to_json());
            break;
        case PropensityModel::Type::logistic: {
            jp["type"] = "logistic";
            jp["intercept"] = spec.propensity.intercept;
            json jc;
            for (const auto& [name, coef] : spec.propensity.coefficients) jc[name] = coef;
            jp["coefficients"] = std::move(jc);
            break;
        }
    }
    doc["propensity"] = std::move(jp);
    if (spec.outcome) {
        json jo;
        jo["name"] = spec.outcome->name;
        jo["cell_means"] = spec.outcome->cell_means;
        if (!spec.outcome->nonrespondent_shifts.empty())
            jo["nonrespondent_shifts"] = spec.outcome->nonrespondent_shifts;
        jo["noise_sd"] = spec.outcome->noise_sd;
        doc["outcome"] = std::move(jo);
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write synthetic spec '" + path + "'");
    out << doc.dump(2) << '\n';
}

}  // namespace proptree
