#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <set>
#include <sstream>

#include "hyquc/error.hpp"
#include "hyquc/rtdpa.hpp"

namespace hyquc::rtdpa {

namespace {

std::optional<double> parse_number(std::string_view text) {
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    if (text.empty())
        return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
        return std::nullopt;
    return value;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Linear-interpolated percentile of sorted values, q in [0, 1].
double percentile_sorted(const std::vector<double> &sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

const char *kind_name(ColumnKind kind) {
    switch (kind) {
    case ColumnKind::Numeric:
        return "numeric";
    case ColumnKind::Date:
        return "date";
    case ColumnKind::Categorical:
        return "categorical";
    }
    return "numeric";
}

ColumnKind parse_kind(const std::string &name) {
    if (name == "numeric")
        return ColumnKind::Numeric;
    if (name == "date")
        return ColumnKind::Date;
    if (name == "categorical")
        return ColumnKind::Categorical;
    throw FormatError("unknown column kind '" + name + "'");
}

std::size_t encoded_width(const ColumnEncoding &col) {
    return col.kind == ColumnKind::Categorical ? col.categories.size() + 1 : 1;
}

} // namespace

// --- RowTypeDataset ----------------------------------------------------------

std::vector<std::size_t> RowTypeDataset::class_counts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (std::size_t label : y)
        ++counts.at(label);
    return counts;
}

RowTypeDataset RowTypeDataset::select_rows(std::span<const std::size_t> indices) const {
    RowTypeDataset out;
    out.row_type = row_type;
    out.class_names = class_names;
    out.feature_names = feature_names;
    out.X.resize(static_cast<Eigen::Index>(indices.size()), X.cols());
    out.y.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        out.X.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(indices[r]));
        out.y.push_back(y.at(indices[r]));
    }
    return out;
}

void RowTypeDataset::validate() const {
    if (static_cast<std::size_t>(X.rows()) != y.size())
        throw ShapeError("feature rows and labels differ in count");
    if (!X.allFinite())
        throw ArgumentError("feature matrix has non-finite entries");
    for (std::size_t label : y)
        if (label >= class_names.size())
            throw IndexError("label " + std::to_string(label) + " out of range");
}

// --- LabelMap ----------------------------------------------------------------

LabelMap LabelMap::fit(const TabularDataset &data,
                       const std::vector<std::pair<std::string, std::string>> &declared) {
    LabelMap map;
    if (!declared.empty()) {
        for (const auto &[raw, name] : declared) {
            auto idx = map.find_class(name);
            if (!idx) {
                map.class_names_.push_back(name);
                idx = map.class_names_.size() - 1;
            }
            map.raw_to_class_[raw] = *idx;
        }
        return map;
    }
    const std::size_t col = data.column_index(data.label_column);
    std::set<std::string> raw;
    for (const auto &row : data.rows)
        if (row[col])
            raw.insert(*row[col]);
    std::vector<std::string> ordered(raw.begin(), raw.end());
    const bool numeric = std::all_of(ordered.begin(), ordered.end(),
                                     [](const std::string &s) { return parse_number(s).has_value(); });
    if (numeric)
        std::stable_sort(ordered.begin(), ordered.end(), [](const auto &a, const auto &b) {
            return *parse_number(a) < *parse_number(b);
        });
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        map.class_names_.push_back(ordered[i]);
        map.raw_to_class_[ordered[i]] = i;
    }
    return map;
}

std::size_t LabelMap::encode(const std::string &raw) const {
    auto it = raw_to_class_.find(raw);
    if (it == raw_to_class_.end())
        throw SchemaError("label value '" + raw + "' does not map to a known class");
    return it->second;
}

std::optional<std::size_t> LabelMap::find_class(const std::string &name) const {
    for (std::size_t i = 0; i < class_names_.size(); ++i)
        if (class_names_[i] == name)
            return i;
    return std::nullopt;
}

void LabelMap::merge(const std::string &from, const std::string &into) {
    const auto f = find_class(from);
    const auto t = find_class(into);
    if (!f || !t)
        throw ArgumentError("cannot merge '" + from + "' into '" + into + "': unknown class");
    if (*f == *t)
        return;
    for (auto &[raw, idx] : raw_to_class_) {
        if (idx == *f)
            idx = *t;
        if (idx > *f)
            --idx;
    }
    class_names_.erase(class_names_.begin() + static_cast<std::ptrdiff_t>(*f));
}

Json LabelMap::to_json() const {
    Json raw = Json::object();
    for (const auto &[k, v] : raw_to_class_)
        raw[k] = v;
    return {{"classes", class_names_}, {"raw_labels", raw}};
}

LabelMap LabelMap::from_json(const Json &doc) {
    LabelMap map;
    map.class_names_ = doc.at("classes").get<std::vector<std::string>>();
    for (const auto &[k, v] : doc.at("raw_labels").items())
        map.raw_to_class_[k] = v.get<std::size_t>();
    return map;
}

// --- dates -------------------------------------------------------------------

std::optional<double> parse_date(const std::string &text, const std::string &format) {
    std::tm tm{};
    std::istringstream in(text);
    in >> std::get_time(&tm, format.c_str());
    if (in.fail())
        return std::nullopt;
    in >> std::ws;
    if (!in.eof())
        return std::nullopt;
    using namespace std::chrono;
    const year_month_day ymd{year{tm.tm_year + 1900}, month{static_cast<unsigned>(tm.tm_mon + 1)},
                             day{static_cast<unsigned>(tm.tm_mday)}};
    if (!ymd.ok())
        return std::nullopt;
    return static_cast<double>(sys_days(ymd).time_since_epoch().count());
}

// --- TabularEncoder ----------------------------------------------------------

TabularEncoder TabularEncoder::fit(const TabularDataset &data, const EncodeOptions &options,
                                   PreprocessReport *report) {
    TabularEncoder enc;
    enc.date_format_ = options.date_format;
    const auto ignored = [&](const std::string &name) {
        return name == data.label_column || name == data.row_type_column ||
               std::find(options.ignored_columns.begin(), options.ignored_columns.end(), name) !=
                   options.ignored_columns.end();
    };
    for (std::size_t c = 0; c < data.n_cols(); ++c) {
        const std::string &name = data.column_names[c];
        if (ignored(name))
            continue;
        std::vector<std::string> present;
        for (const auto &row : data.rows)
            if (row[c])
                present.push_back(*row[c]);
        if (present.empty()) {
            if (report) {
                report->empty_dropped.push_back(name);
                report->notes.push_back("column '" + name + "' has no values; dropped");
            }
            continue;
        }
        ColumnEncoding col;
        col.name = name;
        std::vector<double> values;
        values.reserve(present.size());
        bool numeric = true;
        for (const auto &s : present) {
            auto v = parse_number(s);
            if (!v) {
                numeric = false;
                break;
            }
            values.push_back(*v);
        }
        if (!numeric) {
            values.clear();
            bool dates = true;
            for (const auto &s : present) {
                auto v = parse_date(s, options.date_format);
                if (!v) {
                    dates = false;
                    break;
                }
                values.push_back(*v);
            }
            if (dates) {
                col.kind = ColumnKind::Date;
            } else {
                col.kind = ColumnKind::Categorical;
                std::set<std::string> cats(present.begin(), present.end());
                col.categories.assign(cats.begin(), cats.end());
            }
        }
        if (col.kind != ColumnKind::Categorical) {
            if (options.winsorize) {
                std::vector<double> sorted = values;
                std::sort(sorted.begin(), sorted.end());
                col.clip_low = percentile_sorted(sorted, 0.01);
                col.clip_high = percentile_sorted(sorted, 0.99);
                for (double &v : values)
                    v = std::clamp(v, col.clip_low, col.clip_high);
            }
            col.median = median_of(std::move(values));
            enc.feature_names_.push_back(name);
        } else {
            for (const auto &cat : col.categories)
                enc.feature_names_.push_back(name + "=" + cat);
            enc.feature_names_.push_back(name + "=" + kMissingCategory);
        }
        enc.columns_.push_back(std::move(col));
    }
    if (enc.columns_.empty())
        throw SchemaError("no usable feature columns remain after preprocessing");
    return enc;
}

std::vector<std::string> TabularEncoder::required_columns() const {
    std::vector<std::string> out;
    for (const auto &c : columns_)
        out.push_back(c.name);
    return out;
}

Eigen::MatrixXd TabularEncoder::transform_features(const TabularDataset &data) const {
    const auto required = required_columns();
    const TabularDataset view = data.project_columns(required);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(view.n_rows()),
                                              static_cast<Eigen::Index>(feature_names_.size()));
    for (std::size_t r = 0; r < view.n_rows(); ++r) {
        Eigen::Index out = 0;
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            const ColumnEncoding &col = columns_[c];
            const Cell &cell = view.rows[r][c];
            const auto row = static_cast<Eigen::Index>(r);
            if (col.kind == ColumnKind::Categorical) {
                std::size_t slot = col.categories.size();
                if (cell) {
                    auto it = std::lower_bound(col.categories.begin(), col.categories.end(), *cell);
                    if (it != col.categories.end() && *it == *cell)
                        slot = static_cast<std::size_t>(it - col.categories.begin());
                }
                X(row, out + static_cast<Eigen::Index>(slot)) = 1.0;
                out += static_cast<Eigen::Index>(encoded_width(col));
                continue;
            }
            std::optional<double> v;
            if (cell)
                v = col.kind == ColumnKind::Numeric ? parse_number(*cell)
                                                    : parse_date(*cell, date_format_);
            X(row, out) = std::clamp(v.value_or(col.median), col.clip_low, col.clip_high);
            ++out;
        }
    }
    return X;
}

RowTypeDataset TabularEncoder::transform(const TabularDataset &data, const LabelMap &labels,
                                         const std::string &row_type) const {
    const std::size_t label_col = data.column_index(data.label_column);
    RowTypeDataset ds;
    ds.row_type = row_type;
    ds.class_names = labels.class_names();
    ds.feature_names = feature_names_;
    ds.X = transform_features(data);
    ds.y.reserve(data.n_rows());
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
        const Cell &cell = data.rows[r][label_col];
        if (!cell)
            throw SchemaError("row " + std::to_string(r + 1) + " has no value in label column '" +
                              data.label_column + "'");
        ds.y.push_back(labels.encode(*cell));
    }
    return ds;
}

Json TabularEncoder::to_json() const {
    Json cols = Json::array();
    for (const auto &c : columns_) {
        Json j;
        j["name"] = c.name;
        j["kind"] = kind_name(c.kind);
        if (c.kind == ColumnKind::Categorical) {
            j["categories"] = c.categories;
        } else {
            j["median"] = c.median;
            if (std::isfinite(c.clip_low))
                j["clip"] = {c.clip_low, c.clip_high};
        }
        cols.push_back(j);
    }
    return {{"date_format", date_format_}, {"columns", cols}};
}

TabularEncoder TabularEncoder::from_json(const Json &doc) {
    TabularEncoder enc;
    enc.date_format_ = doc.at("date_format").get<std::string>();
    for (const auto &j : doc.at("columns")) {
        ColumnEncoding c;
        c.name = j.at("name").get<std::string>();
        c.kind = parse_kind(j.at("kind").get<std::string>());
        if (c.kind == ColumnKind::Categorical) {
            c.categories = j.at("categories").get<std::vector<std::string>>();
            for (const auto &cat : c.categories)
                enc.feature_names_.push_back(c.name + "=" + cat);
            enc.feature_names_.push_back(c.name + "=" + kMissingCategory);
        } else {
            c.median = j.at("median").get<double>();
            if (j.contains("clip")) {
                c.clip_low = j.at("clip").at(0).get<double>();
                c.clip_high = j.at("clip").at(1).get<double>();
            }
            enc.feature_names_.push_back(c.name);
        }
        enc.columns_.push_back(std::move(c));
    }
    return enc;
}

RowTypeDataset impute_and_encode(const TabularDataset &data, const LabelMap &labels,
                                 const EncodeOptions &options, PreprocessReport *report) {
    return TabularEncoder::fit(data, options, report).transform(data, labels);
}

RowTypeDataset merge_minority_class(const RowTypeDataset &ds, const std::string &from,
                                    const std::string &into) {
    const auto find = [&](const std::string &name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < ds.class_names.size(); ++i)
            if (ds.class_names[i] == name)
                return i;
        return std::nullopt;
    };
    const auto f = find(from);
    const auto t = find(into);
    if (!f || !t)
        throw ArgumentError("cannot merge '" + from + "' into '" + into + "': unknown class");
    if (*f == *t)
        return ds;
    RowTypeDataset out = ds;
    for (auto &label : out.y) {
        if (label == *f)
            label = *t;
        if (label > *f)
            --label;
    }
    out.class_names.erase(out.class_names.begin() + static_cast<std::ptrdiff_t>(*f));
    return out;
}

} // namespace hyquc::rtdpa
