#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proptree/error.hpp"

namespace proptree {

enum class ColumnKind { numeric, ordinal, nominal, binary };

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& s);

// One column of the dataset schema. Ordinal and nominal columns carry an
// explicit, ordered list of level labels; ordinal order is the order given
// here, which is what threshold splits on the column rank against.
struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<std::string> levels;  // ordinal/nominal only

    bool operator==(const ColumnSchema&) const = default;
};

// Immutable columnar table of unit records. Numeric columns store doubles;
// ordinal/nominal columns store level codes (indices into the schema's level
// list); binary columns store 0/1 codes. Safe for concurrent reads.
class Dataset {
  public:
    Dataset(std::vector<ColumnSchema> schema,
            std::vector<std::vector<double>> numeric_columns,
            std::vector<std::vector<std::int32_t>> code_columns,
            std::string response = "", std::string outcome = "");

    std::size_t n_rows() const { return n_; }
    std::size_t n_columns() const { return schema_.size(); }
    const std::vector<ColumnSchema>& schema() const { return schema_; }
    const ColumnSchema& column(std::size_t c) const { return schema_[c]; }

    // Throws SchemaError when the name is unknown.
    std::size_t column_index(const std::string& name) const;
    std::optional<std::size_t> find_column(const std::string& name) const;

    bool is_numeric(std::size_t c) const { return schema_[c].kind == ColumnKind::numeric; }

    double numeric_value(std::size_t c, std::size_t row) const {
        return numeric_[c][row];
    }
    std::int32_t code(std::size_t c, std::size_t row) const { return codes_[c][row]; }

    // Scalar view used by threshold splits and linear terms: the double value
    // for numeric columns, the level rank for ordinal, the 0/1 code for
    // binary. Not defined for nominal columns.
    double scalar_value(std::size_t c, std::size_t row) const;

    // Value of any column as a double (nominal columns yield their code);
    // used only for round-trip checks and CSV writing.
    double raw_value(std::size_t c, std::size_t row) const;

    const std::string& response_name() const { return response_; }
    const std::string& outcome_name() const { return outcome_; }
    bool has_response() const { return !response_.empty(); }
    bool has_outcome() const { return !outcome_.empty(); }
    std::size_t response_index() const;
    std::size_t outcome_index() const;

    // 0/1 response of a row as a double.
    double response(std::size_t row) const { return codes_[response_index_][row]; }

    // Re-designates the response/outcome columns (returns a new view sharing
    // nothing; Dataset is cheap enough to copy for the sizes involved).
    Dataset with_roles(const std::string& response, const std::string& outcome) const;

  private:
    std::vector<ColumnSchema> schema_;
    std::vector<std::vector<double>> numeric_;
    std::vector<std::vector<std::int32_t>> codes_;
    std::string response_;
    std::string outcome_;
    std::size_t response_index_ = SIZE_MAX;
    std::size_t outcome_index_ = SIZE_MAX;
    std::size_t n_ = 0;

    void validate();
};

struct CsvOptions {
    // Drop rows containing empty cells instead of failing; the number of
    // dropped rows is reported through dropped_rows.
    bool listwise_deletion = false;
};

struct CsvLoadReport {
    std::size_t rows_loaded = 0;
    std::size_t rows_dropped = 0;
};

// Reads a CSV file against a schema. The header row must contain exactly the
// schema's column names (any order). Cells must parse per column kind; empty
// cells are an error unless listwise deletion is requested. Row numbers in
// error messages are 1-based data rows (header excluded).
Dataset load_csv(const std::string& path, const std::vector<ColumnSchema>& schema,
                 const CsvOptions& options = {}, CsvLoadReport* report = nullptr);

// Writes a dataset as CSV (header + rows). Categorical cells are written as
// their level labels, so write -> load round-trips exactly.
void write_csv(const Dataset& dataset, const std::string& path);

// Schema sidecar file (JSON): {"columns":[{name,kind,levels}...],
//  "response": "...", "outcome": "..."} with response/outcome optional.
struct SchemaFile {
    std::vector<ColumnSchema> columns;
    std::string response;
    std::string outcome;
};

SchemaFile load_schema_file(const std::string& path);
void write_schema_file(const SchemaFile& schema, const std::string& path);

}  // namespace proptree
