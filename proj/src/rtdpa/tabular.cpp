#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "hyquc/error.hpp"
#include "hyquc/rtdpa.hpp"

namespace hyquc::rtdpa {

namespace {

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

// Splits one CSV record. Handles quoted fields with embedded commas,
// doubled quotes and newlines; returns false at end of input.
bool read_record(std::istream &in, std::vector<std::string> &fields, std::vector<bool> &quoted) {
    fields.clear();
    quoted.clear();
    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            quoted.push_back(was_quoted);
            field.clear();
            was_quoted = false;
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!any)
        return false;
    if (in_quotes)
        throw FormatError("unterminated quoted field in CSV input");
    fields.push_back(std::move(field));
    quoted.push_back(was_quoted);
    return true;
}

void write_field(std::ostream &out, const std::string &text) {
    if (text.find_first_of(",\"\n\r") == std::string::npos) {
        out << text;
        return;
    }
    out << '"';
    for (char c : text) {
        if (c == '"')
            out << '"';
        out << c;
    }
    out << '"';
}

} // namespace

bool is_missing_token(std::string_view text) {
    static const std::set<std::string, std::less<>> tokens = {"",    "NA",  "N/A", "NaN", "nan",
                                                              "NULL", "null", "None", "?"};
    return tokens.count(text) != 0;
}

std::optional<std::size_t> TabularDataset::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < column_names.size(); ++i)
        if (column_names[i] == name)
            return i;
    return std::nullopt;
}

std::size_t TabularDataset::column_index(std::string_view name) const {
    if (auto idx = find_column(name))
        return *idx;
    throw SchemaError("column '" + std::string(name) + "' not found");
}

TabularDataset TabularDataset::select_rows(std::span<const std::size_t> indices) const {
    TabularDataset out;
    out.column_names = column_names;
    out.label_column = label_column;
    out.row_type_column = row_type_column;
    out.rows.reserve(indices.size());
    for (std::size_t i : indices)
        out.rows.push_back(rows.at(i));
    return out;
}

TabularDataset TabularDataset::drop_columns(std::span<const std::string> names) const {
    std::vector<std::string> keep;
    for (const auto &c : column_names)
        if (std::find(names.begin(), names.end(), c) == names.end())
            keep.push_back(c);
    return project_columns(keep);
}

TabularDataset TabularDataset::project_columns(std::span<const std::string> names) const {
    std::vector<std::size_t> idx;
    std::vector<std::string> absent;
    for (const auto &name : names) {
        if (auto i = find_column(name))
            idx.push_back(*i);
        else
            absent.push_back(name);
    }
    if (!absent.empty()) {
        std::string msg = "missing columns:";
        for (const auto &a : absent)
            msg += " " + a;
        throw SchemaError(msg);
    }
    TabularDataset out;
    out.column_names.assign(names.begin(), names.end());
    out.label_column = label_column;
    out.row_type_column = row_type_column;
    out.rows.reserve(rows.size());
    for (const auto &row : rows) {
        std::vector<Cell> r;
        r.reserve(idx.size());
        for (std::size_t i : idx)
            r.push_back(row[i]);
        out.rows.push_back(std::move(r));
    }
    return out;
}

TabularDataset parse_csv(std::istream &in, std::string label_column,
                         std::string row_type_column) {
    TabularDataset data;
    data.label_column = std::move(label_column);
    data.row_type_column = std::move(row_type_column);
    std::vector<std::string> fields;
    std::vector<bool> quoted;
    if (!read_record(in, fields, quoted))
        throw FormatError("CSV input is empty");
    for (auto &f : fields)
        data.column_names.push_back(trim(f));
    if (!data.column_names.empty() && data.column_names.front().rfind("\xEF\xBB\xBF", 0) == 0)
        data.column_names.front().erase(0, 3);
    std::size_t line = 1;
    while (read_record(in, fields, quoted)) {
        ++line;
        if (fields.size() == 1 && trim(fields[0]).empty() && !quoted[0])
            continue;
        if (fields.size() != data.column_names.size())
            throw FormatError("CSV record " + std::to_string(line) + " has " +
                              std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(data.column_names.size()));
        std::vector<Cell> row;
        row.reserve(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            std::string value = quoted[i] ? fields[i] : trim(fields[i]);
            if (!quoted[i] && is_missing_token(value))
                row.emplace_back(std::nullopt);
            else if (quoted[i] && value.empty())
                row.emplace_back(std::nullopt);
            else
                row.emplace_back(std::move(value));
        }
        data.rows.push_back(std::move(row));
    }
    return data;
}

TabularDataset read_csv(const std::filesystem::path &path, std::string label_column,
                        std::string row_type_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open " + path.string());
    return parse_csv(in, std::move(label_column), std::move(row_type_column));
}

void write_csv(std::ostream &out, const TabularDataset &data) {
    for (std::size_t i = 0; i < data.column_names.size(); ++i) {
        if (i)
            out << ',';
        write_field(out, data.column_names[i]);
    }
    out << '\n';
    for (const auto &row : data.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                out << ',';
            if (row[i])
                write_field(out, *row[i]);
        }
        out << '\n';
    }
}

RowTypeMap RowTypeMap::parse(std::istream &in) {
    RowTypeMap map;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (trim(line).empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("row-type map line " + std::to_string(number) +
                              ": expected 'code = row_type'");
        std::string code = trim(std::string_view(line).substr(0, eq));
        std::string type = trim(std::string_view(line).substr(eq + 1));
        if (code.empty() || type.empty())
            throw FormatError("row-type map line " + std::to_string(number) +
                              ": empty code or row type");
        map.add(std::move(code), std::move(type));
    }
    return map;
}

RowTypeMap RowTypeMap::read(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open " + path.string());
    return parse(in);
}

void RowTypeMap::add(std::string code, std::string row_type) {
    auto [it, inserted] = codes_.emplace(code, row_type);
    if (!inserted && it->second != row_type)
        throw FormatError("code '" + code + "' mapped to both '" + it->second + "' and '" +
                          row_type + "'");
}

const std::string &RowTypeMap::resolve(const std::string &code) const {
    auto it = codes_.find(code);
    if (it == codes_.end())
        throw SchemaError("unknown row-type code '" + code + "'");
    return it->second;
}

std::vector<std::string> RowTypeMap::codes_for(const std::string &row_type) const {
    std::vector<std::string> out;
    for (const auto &[code, type] : codes_)
        if (type == row_type)
            out.push_back(code);
    return out;
}

std::map<std::string, TabularDataset> partition_by_row_type(const TabularDataset &data,
                                                            const RowTypeMap *map) {
    if (data.row_type_column.empty())
        throw SchemaError("no row-type column configured");
    const std::size_t col = data.column_index(data.row_type_column);
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const Cell &cell = data.rows[i][col];
        if (!cell)
            throw SchemaError("row " + std::to_string(i + 1) + " has no value in row-type column '" +
                              data.row_type_column + "'");
        const std::string &type = (map && !map->empty()) ? map->resolve(*cell) : *cell;
        members[type].push_back(i);
    }
    std::map<std::string, TabularDataset> parts;
    for (const auto &[type, idx] : members)
        parts.emplace(type, data.select_rows(idx));
    return parts;
}

TabularDataset drop_inapplicable_columns(const TabularDataset &data,
                                         std::span<const std::string> excluded,
                                         PreprocessReport *report) {
    std::vector<std::string> present;
    for (const auto &name : excluded) {
        if (data.find_column(name)) {
            present.push_back(name);
            if (report)
                report->inapplicable_dropped.push_back(name);
        } else if (report) {
            report->notes.push_back("excluded column '" + name + "' not present; ignored");
        }
    }
    return data.drop_columns(present);
}

MissingDropResult drop_high_missing(const TabularDataset &data, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw ArgumentError("missing-value threshold must lie in (0, 1]");
    MissingDropResult result;
    std::vector<std::string> drop;
    const double n = static_cast<double>(data.n_rows());
    for (std::size_t c = 0; c < data.n_cols(); ++c) {
        const auto &name = data.column_names[c];
        if (name == data.label_column || name == data.row_type_column)
            continue;
        std::size_t missing = 0;
        for (const auto &row : data.rows)
            if (!row[c])
                ++missing;
        const double fraction = n > 0 ? static_cast<double>(missing) / n : 0.0;
        if (fraction > threshold) {
            drop.push_back(name);
            result.dropped.push_back({name, missing, fraction});
        }
    }
    result.data = data.drop_columns(drop);
    return result;
}

Json PreprocessReport::to_json() const {
    Json doc;
    doc["format"] = "hyquc-preprocess";
    doc["version"] = 1;
    doc["row_type"] = row_type;
    doc["input_rows"] = input_rows;
    doc["inapplicable_dropped"] = inapplicable_dropped;
    Json missing = Json::array();
    for (const auto &d : missing_dropped)
        missing.push_back({{"column", d.name}, {"missing", d.missing}, {"fraction", d.fraction}});
    doc["missing_dropped"] = missing;
    doc["empty_dropped"] = empty_dropped;
    Json merged = Json::array();
    for (const auto &[from, into] : merged_classes)
        merged.push_back({{"from", from}, {"into", into}});
    doc["merged_classes"] = merged;
    doc["pca"] = {{"requested_components", requested_components},
                  {"applied_components", applied_components},
                  {"available_components", available_components},
                  {"explained_variance", explained_variance}};
    doc["split_sizes"] = {{"train", split_sizes[0]},
                          {"validation", split_sizes[1]},
                          {"test", split_sizes[2]}};
    Json before = Json::object();
    for (const auto &[k, v] : counts_before_smote)
        before[k] = v;
    Json after = Json::object();
    for (const auto &[k, v] : counts_after_smote)
        after[k] = v;
    doc["class_counts_before_smote"] = before;
    doc["class_counts_after_smote"] = after;
    doc["notes"] = notes;
    return doc;
}

} // namespace hyquc::rtdpa
