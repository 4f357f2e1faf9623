#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "proptree/dataset.hpp"
#include "proptree/tree.hpp"

namespace proptree {

// Per-column generating distribution. uniform_int/uniform_real/normal/
// lognormal apply to numeric columns (a/b = lo/hi or mean/sd); categorical
// applies to ordinal/nominal columns (weights over the level list);
// bernoulli(a) applies to binary columns.
struct FeatureDist {
    enum class Type { uniform_int, uniform_real, normal, lognormal, categorical, bernoulli };

    Type type = Type::uniform_int;
    double a = 0.0;
    double b = 0.0;
    std::vector<double> weights;
};

struct FeatureGen {
    ColumnSchema column;
    FeatureDist dist;
};

// True response propensity: a constant, a tree over the generated features,
// or a logistic function of scalar columns.
struct PropensityModel {
    enum class Type { constant, tree, logistic };

    Type type = Type::constant;
    double constant = 0.5;
    std::optional<TreeModel> tree;
    double intercept = 0.0;
    std::vector<std::pair<std::string, double>> coefficients;
};

// Optional linked outcome: a per-cell mean (cells of the propensity tree; a
// single cell when the propensity is not a tree), an optional additive shift
// applied to nonrespondents of each cell, and Gaussian noise.
struct OutcomeModel {
    std::string name = "WAGE";
    std::vector<double> cell_means;
    std::vector<double> nonrespondent_shifts;  // empty = all zero
    double noise_sd = 0.0;
};

struct SyntheticSpec {
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::vector<FeatureGen> features;
    PropensityModel propensity;
    std::optional<OutcomeModel> outcome;
    std::string response_name = "RESP";
};

// Draws a dataset from the spec. The output is a pure function of the spec
// (single splitmix64 stream: feature columns in order, each column row by
// row; then the response row by row; then outcome noise row by row).
Dataset generate_synthetic(const SyntheticSpec& spec);

// Structured text (JSON) spec file with an explicit integer seed field.
SyntheticSpec load_synthetic_spec(const std::string& path);
void write_synthetic_spec(const SyntheticSpec& spec, const std::string& path);

}  // namespace proptree
