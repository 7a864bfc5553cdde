#include <cstdio>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "hyquc/app.hpp"
#include "hyquc/error.hpp"
#include "hyquc/random.hpp"

namespace hyquc::app {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Rounded form for log lines.
std::string brief(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string to_text(const rtdpa::TabularDataset &data) {
    std::ostringstream out;
    rtdpa::write_csv(out, data);
    return out.str();
}

rtdpa::TabularDataset load_table(const RunConfig &config) {
    if (config.data.empty())
        throw ArgumentError("config does not name a data file ('data = ...')");
    if (config.row_type_column.empty())
        throw ArgumentError("config does not name the row-type column ('row_type_column = ...')");
    return rtdpa::read_csv(config.data, config.label_column, config.row_type_column);
}

rtdpa::RowTypeMap load_map(const RunConfig &config) {
    return config.row_type_map.empty() ? rtdpa::RowTypeMap{}
                                       : rtdpa::RowTypeMap::read(config.row_type_map);
}

std::vector<std::string> codes_of(const rtdpa::RowTypeMap &map, const std::string &row_type) {
    return map.empty() ? std::vector<std::string>{row_type} : map.codes_for(row_type);
}

/// Runs `job(i)` for every index, up to `threads` at a time, in order of
/// completion batches. Exceptions surface from the first failing index.
template <typename Result, typename Job>
std::vector<Result> run_all(std::size_t count, std::size_t threads, Job job) {
    std::vector<Result> results;
    results.reserve(count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            results.push_back(job(i));
        return results;
    }
    for (std::size_t start = 0; start < count; start += threads) {
        std::vector<std::future<Result>> pending;
        for (std::size_t i = start; i < std::min(count, start + threads); ++i)
            pending.push_back(std::async(std::launch::async, job, i));
        for (auto &f : pending)
            results.push_back(f.get());
    }
    return results;
}

metrics::MetricsReport score(const hybrid::HybridModel &model, const rtdpa::RowTypeDataset &ds) {
    const std::size_t n = ds.n_rows();
    std::vector<std::size_t> pred(n);
    std::vector<double> scores;
    scores.reserve(n * model.n_classes);
    std::vector<double> row(ds.X.cols());
    for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < ds.X.cols(); ++j)
            row[j] = ds.X(static_cast<Eigen::Index>(i), j);
        const auto p = hybrid::predict(model, row);
        pred[i] = p.label;
        scores.insert(scores.end(), p.probabilities.begin(), p.probabilities.end());
    }
    const auto cm = metrics::confusion_matrix(ds.y, pred, model.n_classes, ds.class_names);
    return metrics::build_report(cm, scores, ds.y);
}

struct Logged {
    std::string text;
};

} // namespace

void write_file_atomic(const fs::path &path, const std::string &contents) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw FormatError("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out)
            throw FormatError("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string loss_history_csv(const hybrid::TrainHistory &history) {
    std::string out = "epoch,train_loss,train_acc,val_loss,val_acc\n";
    for (std::size_t e = 0; e < history.size(); ++e) {
        const auto &r = history[e];
        out += std::to_string(e + 1) + ',' + fmt(r.train_loss) + ',' + fmt(r.train_accuracy) + ',' +
               fmt(r.val_loss) + ',' + fmt(r.val_accuracy) + '\n';
    }
    return out;
}

std::string leaderboard_csv(const hybrid::GridSearchResult &result) {
    std::string out = "rank,declaration_index,n_layers,n_qubits,learning_rate,batch_size,epochs,"
                      "mean_macro_f1,mean_accuracy\n";
    for (std::size_t i = 0; i < result.leaderboard.size(); ++i) {
        const auto &e = result.leaderboard[i];
        out += std::to_string(i + 1) + ',' + std::to_string(e.declaration_index) + ',' +
               std::to_string(e.point.n_layers) + ',' + std::to_string(e.point.n_qubits) + ',' +
               fmt(e.point.learning_rate) + ',' + std::to_string(e.point.batch_size) + ',' +
               std::to_string(e.point.epochs) + ',' + fmt(e.mean_macro_f1) + ',' +
               fmt(e.mean_accuracy) + '\n';
    }
    return out;
}

TrainSummary cmd_train(const RunConfig &config, std::ostream &log) {
    const auto table = load_table(config);
    const auto map = load_map(config);
    const auto parts = rtdpa::partition_by_row_type(table, map.empty() ? nullptr : &map);
    std::vector<std::string> names;
    for (const auto &[name, rows] : parts)
        names.push_back(name);

    using Out = std::pair<RowTypeOutcome, Logged>;
    auto job = [&](std::size_t i) -> Out {
        const std::string &rt = names[i];
        const auto settings = config.settings_for(rt);
        std::ostringstream msg;
        Rng rng(derive_seed(config.seed, rt));

        auto prepared = pipeline::prepare_row_type(parts.at(rt), rt, codes_of(map, rt),
                                                   settings.preprocess, rng);
        auto spec = settings.circuit;
        spec.n_qubits = prepared.report.applied_components;
        auto model = hybrid::HybridModel::create(spec, prepared.pipeline.labels.n_classes(),
                                                 settings.head, rng, rt);
        auto train_cfg = settings.train;
        train_cfg.rng_seed = derive_seed(config.seed, rt + "/train");
        auto fitted = hybrid::fit(std::move(model), prepared.train, prepared.validation, train_cfg,
                                  rng);

        RowTypeOutcome outcome;
        outcome.row_type = rt;
        outcome.history = std::move(fitted.history);
        outcome.test_report = score(fitted.model, prepared.test);
        const double train_acc = score(fitted.model, prepared.train).accuracy;
        outcome.validation_accuracy = score(fitted.model, prepared.validation).accuracy;
        outcome.test_report.additional["train_accuracy"] = train_acc;
        outcome.test_report.additional["validation_accuracy"] = outcome.validation_accuracy;
        outcome.test_report.additional["test_accuracy"] = outcome.test_report.accuracy;

        const fs::path dir = config.out_dir;
        outcome.model_path = dir / (rt + ".model.json");
        outcome.loss_path = dir / (rt + ".loss.csv");
        const pipeline::ModelBundle bundle{fitted.model, prepared.pipeline};
        write_file_atomic(outcome.model_path, bundle.to_json().dump(2) + "\n");
        write_file_atomic(outcome.loss_path, loss_history_csv(outcome.history));
        write_file_atomic(dir / (rt + ".metrics.json"), outcome.test_report.to_json().dump(2) + "\n");
        write_file_atomic(dir / (rt + ".preprocess.json"), prepared.report.to_json().dump(2) + "\n");
        write_file_atomic(dir / (rt + ".test.csv"), to_text(prepared.test_rows));

        msg << rt << ": " << prepared.train.n_rows() << " train rows, " << spec.n_qubits
            << " qubits, " << spec.n_layers << " layers; validation accuracy "
            << brief(outcome.validation_accuracy) << ", test accuracy "
            << brief(outcome.test_report.accuracy) << '\n';
        return {std::move(outcome), {msg.str()}};
    };

    TrainSummary summary;
    for (auto &[outcome, logged] : run_all<Out>(names.size(), config.threads, job)) {
        log << logged.text;
        summary.row_types.push_back(std::move(outcome));
    }
    return summary;
}

GridSearchSummary cmd_gridsearch(const RunConfig &config, std::ostream &log) {
    const auto table = load_table(config);
    const auto map = load_map(config);
    const auto parts = rtdpa::partition_by_row_type(table, map.empty() ? nullptr : &map);
    std::vector<std::string> names;
    for (const auto &[name, rows] : parts)
        names.push_back(name);

    using Out = std::pair<hybrid::GridSearchResult, Logged>;
    auto job = [&](std::size_t i) -> Out {
        const std::string &rt = names[i];
        const auto settings = config.settings_for(rt);
        Rng rng(derive_seed(config.seed, rt));
        // SMOTE runs inside each fold, so the held-out split stays untouched.
        auto pre = settings.preprocess;
        pre.smote_k = 0;
        const auto prepared = pipeline::prepare_row_type(parts.at(rt), rt, codes_of(map, rt), pre, rng);

        hybrid::GridSearchOptions options;
        options.folds = settings.cv_folds;
        options.seed = derive_seed(config.seed, rt + "/grid");
        options.head = settings.head;
        options.embedding_axis = settings.circuit.embedding_axis;
        options.entangler_range = settings.circuit.entangler_range;
        options.smote_k = settings.preprocess.smote_k;
        auto result = hybrid::grid_search(settings.grid, prepared.encoded_train, options);

        const fs::path dir = config.out_dir;
        write_file_atomic(dir / (rt + ".leaderboard.csv"), leaderboard_csv(result));
        const auto &b = result.best;
        std::ostringstream cfg;
        cfg << "[" << rt << "]\n"
            << "n_layers = " << b.n_layers << "\n"
            << "n_qubits = " << b.n_qubits << "\n"
            << "learning_rate = " << fmt(b.learning_rate) << "\n"
            << "batch_size = " << b.batch_size << "\n"
            << "epochs = " << b.epochs << "\n";
        write_file_atomic(dir / (rt + ".best.cfg"), cfg.str());

        std::ostringstream msg;
        msg << rt << ": " << result.leaderboard.size() << " configurations, best n_layers="
            << b.n_layers << " n_qubits=" << b.n_qubits << " lr=" << b.learning_rate
            << " batch=" << b.batch_size << " epochs=" << b.epochs << " macro-F1 "
            << brief(result.leaderboard.front().mean_macro_f1) << '\n';
        return {std::move(result), {msg.str()}};
    };

    GridSearchSummary summary;
    auto results = run_all<Out>(names.size(), config.threads, job);
    for (std::size_t i = 0; i < names.size(); ++i) {
        log << results[i].second.text;
        summary.row_types.emplace(names[i], std::move(results[i].first));
    }
    return summary;
}

metrics::MetricsReport cmd_evaluate(const fs::path &model_path, const fs::path &data_path,
                                    const std::optional<fs::path> &report_path, std::ostream &log) {
    const auto bundle = pipeline::ModelBundle::read(model_path);
    const auto &p = bundle.pipeline;
    auto table = rtdpa::read_csv(data_path, p.label_column, p.row_type_column);
    if (!table.find_column(p.label_column))
        throw SchemaError("evaluation data has no label column '" + p.label_column + "'");

    if (!p.row_type_column.empty()) {
        if (auto col = table.find_column(p.row_type_column)) {
            const std::set<std::string> codes(p.row_type_codes.begin(), p.row_type_codes.end());
            std::vector<std::size_t> keep;
            for (std::size_t r = 0; r < table.n_rows(); ++r)
                if (const auto &cell = table.rows[r][*col]; cell && codes.count(*cell))
                    keep.push_back(r);
            if (keep.size() != table.n_rows())
                log << "skipping " << table.n_rows() - keep.size() << " rows of other row types\n";
            table = table.select_rows(keep);
        }
    }
    if (table.n_rows() == 0)
        throw ArgumentError("no rows of row type '" + p.row_type + "' to evaluate");

    const auto report = score(bundle.model, p.apply(table));
    if (report_path)
        write_file_atomic(*report_path, report.to_json().dump(2) + "\n");
    log << p.row_type << ": " << table.n_rows() << " rows, accuracy " << brief(report.accuracy)
        << '\n';
    return report;
}

PredictSummary cmd_predict(const std::vector<fs::path> &models, const fs::path &input_path,
                           const fs::path &output_path, const RunConfig *config, std::ostream &log) {
    std::vector<fs::path> files;
    for (const auto &m : models) {
        if (fs::is_directory(m)) {
            std::vector<fs::path> found;
            for (const auto &entry : fs::directory_iterator(m)) {
                const auto name = entry.path().filename().string();
                if (name.size() > 11 && name.ends_with(".model.json"))
                    found.push_back(entry.path());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(m);
        }
    }
    if (files.empty())
        throw ArgumentError("no model files found");

    std::vector<pipeline::ModelBundle> bundles;
    std::map<std::string, std::size_t> by_code;
    for (const auto &f : files) {
        bundles.push_back(pipeline::ModelBundle::read(f));
        for (const auto &code : bundles.back().pipeline.row_type_codes) {
            const auto [it, fresh] = by_code.emplace(code, bundles.size() - 1);
            if (!fresh)
                throw ArgumentError("row-type code '" + code + "' is claimed by two models");
        }
    }

    std::string rt_column = bundles.front().pipeline.row_type_column;
    std::string label_column = bundles.front().pipeline.label_column;
    std::string id_column;
    if (config) {
        if (!config->row_type_column.empty())
            rt_column = config->row_type_column;
        id_column = config->id_column;
    }
    const auto table = rtdpa::read_csv(input_path, label_column, rt_column);
    const std::size_t rt_col = table.column_index(rt_column);
    std::optional<std::size_t> id_col;
    if (!id_column.empty())
        id_col = table.column_index(id_column);

    // Route rows, then score each model's rows as one block.
    std::vector<std::optional<std::size_t>> route(table.n_rows());
    std::vector<std::vector<std::size_t>> members(bundles.size());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        const auto &cell = table.rows[r][rt_col];
        if (!cell)
            continue;
        if (auto it = by_code.find(*cell); it != by_code.end()) {
            route[r] = it->second;
            members[it->second].push_back(r);
        }
    }
    std::vector<hybrid::Prediction> predictions(table.n_rows());
    for (std::size_t b = 0; b < bundles.size(); ++b) {
        if (members[b].empty())
            continue;
        const auto X = bundles[b].pipeline.features(table.select_rows(members[b]));
        std::vector<double> row(X.cols());
        for (std::size_t i = 0; i < members[b].size(); ++i) {
            for (Eigen::Index j = 0; j < X.cols(); ++j)
                row[j] = X(static_cast<Eigen::Index>(i), j);
            predictions[members[b][i]] = hybrid::predict(bundles[b].model, row);
        }
    }

    PredictSummary summary;
    std::string out = "row_id,row_type,status,predicted_class,probabilities\n";
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        ++summary.rows;
        const std::string id = id_col && table.rows[r][*id_col] ? *table.rows[r][*id_col]
                                                                  : std::to_string(r + 1);
        const auto &cell = table.rows[r][rt_col];
        if (!route[r]) {
            ++summary.flagged;
            out += id + ',' + cell.value_or("") + ",unknown_row_type,,\n";
            continue;
        }
        const auto &bundle = bundles[*route[r]];
        const auto &names = bundle.pipeline.labels.class_names();
        const auto &pred = predictions[r];
        std::string probs;
        for (std::size_t c = 0; c < pred.probabilities.size(); ++c) {
            if (c)
                probs += ';';
            probs += names[c] + '=' + fmt(pred.probabilities[c]);
        }
        out += id + ',' + bundle.pipeline.row_type + ",ok," + names[pred.label] + ',' + probs + '\n';
    }
    write_file_atomic(output_path, out);
    log << summary.rows << " rows scored";
    if (summary.flagged)
        log << ", " << summary.flagged << " flagged with no matching row-type model";
    log << '\n';
    return summary;
}

} // namespace hyquc::app
