#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "hyquc/app.hpp"
#include "hyquc/error.hpp"

namespace hyquc::app {

namespace {

const std::set<std::string> &known_keys() {
    static const std::set<std::string> keys = {
        "data",           "row_type_map",     "out",
        "label_column",   "row_type_column",  "id_column",
        "seed",           "threads",          "missing_threshold",
        "exclude",        "classes",          "merge",
        "date_format",    "winsorize",        "ignore_columns",
        "pca_components", "n_qubits",         "pca_cap",
        "split",          "smote_k",          "n_layers",
        "embedding_axis", "entangler_range",  "head",
        "hidden_sizes",   "hidden_activation", "epochs",
        "learning_rate",  "batch_size",       "cv_folds",
        "grid.n_layers",  "grid.n_qubits",    "grid.learning_rate",
        "grid.batch_size", "grid.epochs",
    };
    return keys;
}

// Keys that only make sense once per run.
const std::set<std::string> &global_only_keys() {
    static const std::set<std::string> keys = {"data",      "row_type_map",    "out",
                                               "label_column", "row_type_column", "id_column",
                                               "seed",      "threads"};
    return keys;
}

std::string trim(const std::string &s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string &value, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream in(value);
    std::string item;
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

std::size_t to_size(const std::string &key, const std::string &text) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ArgumentError("config key '" + key + "': expected a non-negative integer, got '" +
                            text + "'");
    return v;
}

double to_double(const std::string &key, const std::string &text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ArgumentError("config key '" + key + "': expected a number, got '" + text + "'");
    return v;
}

bool to_bool(const std::string &key, const std::string &text) {
    if (text == "true" || text == "yes" || text == "1" || text == "on")
        return true;
    if (text == "false" || text == "no" || text == "0" || text == "off")
        return false;
    throw ArgumentError("config key '" + key + "': expected true/false, got '" + text + "'");
}

template <typename T, typename F>
std::vector<T> to_list(const std::string &key, const std::string &text, F convert) {
    std::vector<T> out;
    for (const auto &item : split_list(text))
        out.push_back(convert(key, item));
    if (out.empty())
        throw ArgumentError("config key '" + key + "' needs at least one value");
    return out;
}

} // namespace

RunConfig RunConfig::parse(std::istream &in, const fs::path &base_dir) {
    RunConfig config;
    config.base_dir_ = base_dir;
    std::string line;
    std::string section;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw FormatError("config line " + std::to_string(number) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            config.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(number) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_keys().count(key))
            throw FormatError("config line " + std::to_string(number) + ": unknown key '" + key +
                              "'");
        if (section.empty()) {
            config.set(key, value);
        } else {
            if (global_only_keys().count(key))
                throw FormatError("config line " + std::to_string(number) + ": key '" + key +
                                  "' is only allowed before the first section");
            config.sections_[section][key] = value;
        }
    }
    return config;
}

RunConfig RunConfig::read(const fs::path &path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open config file " + path.string());
    return parse(in, path.parent_path());
}

void RunConfig::set(const std::string &key, const std::string &value) {
    const auto resolve = [&](const std::string &p) {
        fs::path path(p);
        return path.is_relative() && !base_dir_.empty() ? base_dir_ / path : path;
    };
    if (key == "data")
        data = resolve(value);
    else if (key == "row_type_map")
        row_type_map = resolve(value);
    else if (key == "out")
        out_dir = resolve(value);
    else if (key == "label_column")
        label_column = value;
    else if (key == "row_type_column")
        row_type_column = value;
    else if (key == "id_column")
        id_column = value;
    else if (key == "seed")
        seed = to_size(key, value);
    else if (key == "threads")
        threads = std::max<std::size_t>(1, to_size(key, value));
    else
        global_[key] = value;
}

bool RunConfig::has_grid() const {
    const auto has = [](const std::map<std::string, std::string> &m) {
        for (const auto &[k, v] : m)
            if (k.rfind("grid.", 0) == 0)
                return true;
        return false;
    };
    if (has(global_))
        return true;
    for (const auto &[name, keys] : sections_)
        if (has(keys))
            return true;
    return false;
}

RowTypeSettings RunConfig::settings_for(const std::string &row_type) const {
    std::map<std::string, std::string> kv = global_;
    if (auto it = sections_.find(row_type); it != sections_.end())
        for (const auto &[k, v] : it->second)
            kv[k] = v;

    RowTypeSettings s;
    auto &pre = s.preprocess;
    for (const auto &[key, value] : kv) {
        if (key == "missing_threshold") {
            pre.missing_threshold = to_double(key, value);
        } else if (key == "exclude") {
            pre.excluded_columns = split_list(value);
        } else if (key == "classes") {
            for (const auto &item : split_list(value)) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    pre.classes.emplace_back(item, item);
                else
                    pre.classes.emplace_back(trim(item.substr(0, colon)),
                                             trim(item.substr(colon + 1)));
            }
        } else if (key == "merge") {
            for (const auto &item : split_list(value)) {
                const auto arrow = item.find("->");
                if (arrow == std::string::npos)
                    throw ArgumentError("config key 'merge': expected 'From -> Into', got '" +
                                        item + "'");
                pre.merges.emplace_back(trim(item.substr(0, arrow)), trim(item.substr(arrow + 2)));
            }
        } else if (key == "date_format") {
            pre.encode.date_format = value;
        } else if (key == "winsorize") {
            pre.encode.winsorize = to_bool(key, value);
        } else if (key == "ignore_columns") {
            pre.encode.ignored_columns = split_list(value);
        } else if (key == "pca_components" || key == "n_qubits") {
            pre.pca_components = value == "auto" ? 0 : to_size(key, value);
        } else if (key == "pca_cap") {
            pre.pca_cap = to_size(key, value);
        } else if (key == "split") {
            const auto parts = to_list<double>(key, value, to_double);
            if (parts.size() != 3)
                throw ArgumentError("config key 'split' needs train,validation,test fractions");
            pre.split = {parts[0], parts[1], parts[2]};
        } else if (key == "smote_k") {
            pre.smote_k = to_size(key, value);
        } else if (key == "n_layers") {
            s.circuit.n_layers = to_size(key, value);
        } else if (key == "embedding_axis") {
            s.circuit.embedding_axis = qsim::parse_axis(value);
        } else if (key == "entangler_range") {
            s.circuit.entangler_range = to_size(key, value);
        } else if (key == "head") {
            if (value == "single")
                s.head.hidden.clear();
            else if (value != "default")
                throw ArgumentError("config key 'head': expected 'default' or 'single'");
        } else if (key == "hidden_sizes") {
            s.head.hidden = value == "none" ? std::vector<std::size_t>{}
                                            : to_list<std::size_t>(key, value, to_size);
        } else if (key == "hidden_activation") {
            s.head.hidden_activation = nn::parse_activation(value);
        } else if (key == "epochs") {
            s.train.epochs = to_size(key, value);
        } else if (key == "learning_rate") {
            s.train.learning_rate = to_double(key, value);
        } else if (key == "batch_size") {
            s.train.batch_size = to_size(key, value);
        } else if (key == "cv_folds") {
            s.cv_folds = to_size(key, value);
        } else if (key == "grid.n_layers") {
            s.grid.n_layers = to_list<std::size_t>(key, value, to_size);
        } else if (key == "grid.n_qubits") {
            s.grid.n_qubits = to_list<std::size_t>(key, value, to_size);
        } else if (key == "grid.learning_rate") {
            s.grid.learning_rates = to_list<double>(key, value, to_double);
        } else if (key == "grid.batch_size") {
            s.grid.batch_sizes = to_list<std::size_t>(key, value, to_size);
        } else if (key == "grid.epochs") {
            s.grid.epochs = to_list<std::size_t>(key, value, to_size);
        }
    }
    // An explicit hidden_sizes beats 'head = single'.
    if (kv.count("head") && kv.at("head") == "single" && !kv.count("hidden_sizes"))
        s.head.hidden.clear();
    if (!id_column.empty())
        pre.encode.ignored_columns.push_back(id_column);
    s.train.rng_seed = seed;
    return s;
}

} // namespace hyquc::app
