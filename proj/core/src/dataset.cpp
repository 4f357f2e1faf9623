#include "proptree/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "text_util.hpp"

namespace proptree {

using nlohmann::json;

std::string to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::numeric: return "numeric";
        case ColumnKind::ordinal: return "ordinal";
        case ColumnKind::nominal: return "nominal";
        case ColumnKind::binary: return "binary";
    }
    return "numeric";
}

ColumnKind column_kind_from_string(const std::string& s) {
    if (s == "numeric") return ColumnKind::numeric;
    if (s == "ordinal") return ColumnKind::ordinal;
    if (s == "nominal") return ColumnKind::nominal;
    if (s == "binary") return ColumnKind::binary;
    throw SchemaError("unknown column kind '" + s + "'");
}

Dataset::Dataset(std::vector<ColumnSchema> schema,
                 std::vector<std::vector<double>> numeric_columns,
                 std::vector<std::vector<std::int32_t>> code_columns,
                 std::string response, std::string outcome)
    : schema_(std::move(schema)),
      numeric_(std::move(numeric_columns)),
      codes_(std::move(code_columns)),
      response_(std::move(response)),
      outcome_(std::move(outcome)) {
    validate();
}

void Dataset::validate() {
    if (numeric_.size() != schema_.size() || codes_.size() != schema_.size())
        throw SchemaError("dataset storage does not match schema width");
    std::size_t n = SIZE_MAX;
    for (std::size_t c = 0; c < schema_.size(); ++c) {
        const auto& col = schema_[c];
        if (col.name.empty()) throw SchemaError("column with empty name");
        for (std::size_t d = c + 1; d < schema_.size(); ++d)
            if (schema_[d].name == col.name)
                throw SchemaError("duplicate column name '" + col.name + "'");
        const bool numeric = col.kind == ColumnKind::numeric;
        if ((col.kind == ColumnKind::ordinal || col.kind == ColumnKind::nominal) &&
            col.levels.size() < 2)
            throw SchemaError("column '" + col.name + "' needs at least 2 levels");
        const std::size_t len = numeric ? numeric_[c].size() : codes_[c].size();
        if (n == SIZE_MAX) n = len;
        if (len != n) throw SchemaError("column '" + col.name + "' has ragged length");
        if (!numeric) {
            const std::int32_t hi = col.kind == ColumnKind::binary
                                        ? 2
                                        : static_cast<std::int32_t>(col.levels.size());
            for (std::size_t r = 0; r < len; ++r) {
                const std::int32_t v = codes_[c][r];
                if (v < 0 || v >= hi)
                    throw DataError("column '" + col.name + "' row " +
                                    std::to_string(r + 1) + ": code out of range");
            }
        }
    }
    n_ = (n == SIZE_MAX) ? 0 : n;
    if (n_ < 1) throw DataError("dataset must have at least one row");

    auto resolve = [&](const std::string& name) -> std::size_t {
        for (std::size_t c = 0; c < schema_.size(); ++c)
            if (schema_[c].name == name) return c;
        throw SchemaError("designated column '" + name + "' not in schema");
    };
    if (!response_.empty()) {
        response_index_ = resolve(response_);
        if (schema_[response_index_].kind != ColumnKind::binary)
            throw SchemaError("response column '" + response_ + "' must be binary");
    }
    if (!outcome_.empty()) {
        outcome_index_ = resolve(outcome_);
        if (schema_[outcome_index_].kind != ColumnKind::numeric)
            throw SchemaError("outcome column '" + outcome_ + "' must be numeric");
    }
}

std::size_t Dataset::column_index(const std::string& name) const {
    for (std::size_t c = 0; c < schema_.size(); ++c)
        if (schema_[c].name == name) return c;
    throw SchemaError("unknown column '" + name + "'");
}

std::optional<std::size_t> Dataset::find_column(const std::string& name) const {
    for (std::size_t c = 0; c < schema_.size(); ++c)
        if (schema_[c].name == name) return c;
    return std::nullopt;
}

double Dataset::scalar_value(std::size_t c, std::size_t row) const {
    switch (schema_[c].kind) {
        case ColumnKind::numeric: return numeric_[c][row];
        case ColumnKind::ordinal:
        case ColumnKind::binary: return static_cast<double>(codes_[c][row]);
        case ColumnKind::nominal:
            throw SchemaError("column '" + schema_[c].name + "' is nominal; no scalar value");
    }
    return 0.0;
}

double Dataset::raw_value(std::size_t c, std::size_t row) const {
    return is_numeric(c) ? numeric_[c][row] : static_cast<double>(codes_[c][row]);
}

std::size_t Dataset::response_index() const {
    if (response_index_ == SIZE_MAX) throw SchemaError("no response column designated");
    return response_index_;
}

std::size_t Dataset::outcome_index() const {
    if (outcome_index_ == SIZE_MAX) throw SchemaError("no outcome column designated");
    return outcome_index_;
}

Dataset Dataset::with_roles(const std::string& response, const std::string& outcome) const {
    return Dataset(schema_, numeric_, codes_, response, outcome);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

// RFC-4180-ish: comma separated, double quotes for fields containing commas,
// quotes or newlines, "" as an escaped quote. Accepts \n and \r\n endings.
class CsvReader {
  public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Returns false at end of input.
    bool next_record(std::vector<std::string>& fields) {
        fields.clear();
        if (in_.peek() == EOF) return false;
        std::string field;
        bool quoted = false;
        bool any = false;
        int ch;
        while ((ch = in_.get()) != EOF) {
            any = true;
            const char c = static_cast<char>(ch);
            if (quoted) {
                if (c == '"') {
                    if (in_.peek() == '"') {
                        field.push_back('"');
                        in_.get();
                    } else {
                        quoted = false;
                    }
                } else {
                    field.push_back(c);
                }
            } else if (c == '"' && field.empty()) {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (c == '\n') {
                break;
            } else if (c == '\r') {
                if (in_.peek() == '\n') in_.get();
                break;
            } else {
                field.push_back(c);
            }
        }
        if (!any) return false;
        fields.push_back(std::move(field));
        return true;
    }

  private:
    std::istream& in_;
};

using detail::csv_quote;
using detail::format_double;

double parse_number(const std::string& text, const std::string& col, std::size_t row) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw DataError("numeric column " + col + " row " + std::to_string(row) +
                        ": cannot parse '" + text + "'");
    }
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size() || !std::isfinite(value))
        throw DataError("numeric column " + col + " row " + std::to_string(row) +
                        ": cannot parse '" + text + "'");
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::vector<ColumnSchema>& schema,
                 const CsvOptions& options, CsvLoadReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");

    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next_record(header)) throw DataError("'" + path + "' is empty");

    // Header must cover the schema exactly, order-insensitive.
    std::vector<std::size_t> col_of_field(header.size(), SIZE_MAX);
    std::vector<bool> seen(schema.size(), false);
    for (std::size_t f = 0; f < header.size(); ++f) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (schema[c].name == header[f]) {
                if (seen[c]) throw SchemaError("duplicate header column '" + header[f] + "'");
                seen[c] = true;
                col_of_field[f] = c;
                break;
            }
        }
        if (col_of_field[f] == SIZE_MAX)
            throw SchemaError("header column '" + header[f] + "' not in schema");
    }
    for (std::size_t c = 0; c < schema.size(); ++c)
        if (!seen[c]) throw SchemaError("missing column '" + schema[c].name + "'");

    // Level lookup tables.
    std::vector<std::unordered_map<std::string, std::int32_t>> level_of(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c)
        for (std::size_t l = 0; l < schema[c].levels.size(); ++l)
            level_of[c][schema[c].levels[l]] = static_cast<std::int32_t>(l);

    std::vector<std::vector<double>> numeric(schema.size());
    std::vector<std::vector<std::int32_t>> codes(schema.size());

    std::vector<std::string> fields;
    std::size_t row = 0;
    std::size_t dropped = 0;
    std::vector<double> num_buf(schema.size());
    std::vector<std::int32_t> code_buf(schema.size());
    while (reader.next_record(fields)) {
        ++row;
        if (fields.size() != header.size())
            throw DataError("row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        bool incomplete = false;
        for (std::size_t f = 0; f < fields.size() && !incomplete; ++f)
            incomplete = fields[f].empty();
        if (incomplete) {
            if (options.listwise_deletion) {
                ++dropped;
                continue;
            }
            throw DataError("row " + std::to_string(row) +
                            ": missing value (enable listwise deletion to drop)");
        }
        for (std::size_t f = 0; f < fields.size(); ++f) {
            const std::size_t c = col_of_field[f];
            const auto& col = schema[c];
            const std::string& text = fields[f];
            switch (col.kind) {
                case ColumnKind::numeric:
                    num_buf[c] = parse_number(text, col.name, row);
                    break;
                case ColumnKind::binary:
                    if (text == "0") code_buf[c] = 0;
                    else if (text == "1") code_buf[c] = 1;
                    else
                        throw DataError("binary column " + col.name + " row " +
                                        std::to_string(row) + ": value '" + text +
                                        "' is not 0/1");
                    break;
                case ColumnKind::ordinal:
                case ColumnKind::nominal: {
                    auto it = level_of[c].find(text);
                    if (it == level_of[c].end())
                        throw DataError(to_string(col.kind) + " column " + col.name +
                                        " row " + std::to_string(row) + ": level '" +
                                        text + "' not in schema");
                    code_buf[c] = it->second;
                    break;
                }
            }
        }
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (schema[c].kind == ColumnKind::numeric) numeric[c].push_back(num_buf[c]);
            else codes[c].push_back(code_buf[c]);
        }
    }
    if (report) {
        report->rows_loaded = row - dropped;
        report->rows_dropped = dropped;
    }
    return Dataset(schema, std::move(numeric), std::move(codes));
}

void write_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    const auto& schema = dataset.schema();
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (c) out << ',';
        out << csv_quote(schema[c].name);
    }
    out << '\n';
    for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (c) out << ',';
            switch (schema[c].kind) {
                case ColumnKind::numeric:
                    out << format_double(dataset.numeric_value(c, r));
                    break;
                case ColumnKind::binary:
                    out << dataset.code(c, r);
                    break;
                case ColumnKind::ordinal:
                case ColumnKind::nominal:
                    out << csv_quote(schema[c].levels[dataset.code(c, r)]);
                    break;
            }
        }
        out << '\n';
    }
    if (!out) throw DataError("failed writing '" + path + "'");
}

SchemaFile load_schema_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open schema file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("schema file '" + path + "': " + e.what());
    }
    SchemaFile out;
    if (!doc.contains("columns") || !doc["columns"].is_array())
        throw SchemaError("schema file '" + path + "' lacks a columns array");
    for (const auto& jc : doc["columns"]) {
        ColumnSchema col;
        col.name = jc.at("name").get<std::string>();
        col.kind = column_kind_from_string(jc.at("kind").get<std::string>());
        if (jc.contains("levels"))
            col.levels = jc["levels"].get<std::vector<std::string>>();
        out.columns.push_back(std::move(col));
    }
    out.response = doc.value("response", "");
    out.outcome = doc.value("outcome", "");
    return out;
}

void write_schema_file(const SchemaFile& schema, const std::string& path) {
    json doc;
    doc["columns"] = json::array();
    for (const auto& col : schema.columns) {
        json jc;
        jc["name"] = col.name;
        jc["kind"] = to_string(col.kind);
        if (!col.levels.empty()) jc["levels"] = col.levels;
        doc["columns"].push_back(std::move(jc));
    }
    if (!schema.response.empty()) doc["response"] = schema.response;
    if (!schema.outcome.empty()) doc["outcome"] = schema.outcome;
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write schema file '" + path + "'");
    out << doc.dump(2) << '\n';
}

}  // namespace proptree
