#include "hyquc/pipeline.hpp"

#include <cstdio>
#include <fstream>

#include "hyquc/error.hpp"
#include "hyquc/random.hpp"

namespace hyquc::pipeline {

Eigen::MatrixXd FittedPipeline::features(const rtdpa::TabularDataset &rows) const {
    return scaler.transform(rtdpa::pca_transform(pca, encoder.transform_features(rows)));
}

rtdpa::RowTypeDataset FittedPipeline::apply(const rtdpa::TabularDataset &rows) const {
    rtdpa::RowTypeDataset ds = encoder.transform(rows, labels, row_type);
    ds.X = scaler.transform(rtdpa::pca_transform(pca, ds.X));
    ds.feature_names.clear();
    return ds;
}

Json FittedPipeline::to_json() const {
    return {{"row_type", row_type},
            {"row_type_column", row_type_column},
            {"label_column", label_column},
            {"row_type_codes", row_type_codes},
            {"labels", labels.to_json()},
            {"encoder", encoder.to_json()},
            {"pca", pca.to_json()},
            {"scaler", scaler.to_json()}};
}

FittedPipeline FittedPipeline::from_json(const Json &doc) {
    FittedPipeline p;
    p.row_type = doc.at("row_type").get<std::string>();
    p.row_type_column = doc.at("row_type_column").get<std::string>();
    p.label_column = doc.at("label_column").get<std::string>();
    p.row_type_codes = doc.at("row_type_codes").get<std::vector<std::string>>();
    p.labels = rtdpa::LabelMap::from_json(doc.at("labels"));
    p.encoder = rtdpa::TabularEncoder::from_json(doc.at("encoder"));
    p.pca = rtdpa::PCAModel::from_json(doc.at("pca"));
    p.scaler = rtdpa::AngleScaler::from_json(doc.at("scaler"));
    if (p.pca.n_features() != p.encoder.feature_names().size())
        throw FormatError("PCA width does not match the encoded feature count");
    if (static_cast<std::size_t>(p.scaler.min.size()) != p.pca.n_components())
        throw FormatError("scaler width does not match the PCA component count");
    return p;
}

PreparedRowType prepare_row_type(const rtdpa::TabularDataset &rows, const std::string &row_type,
                                 std::vector<std::string> row_type_codes,
                                 const PreprocessConfig &config, Rng &rng) {
    PreparedRowType out;
    auto &report = out.report;
    report.row_type = row_type;
    report.input_rows = rows.n_rows();

    auto data = rtdpa::drop_inapplicable_columns(rows, config.excluded_columns, &report);
    auto dropped = rtdpa::drop_high_missing(data, config.missing_threshold);
    data = std::move(dropped.data);
    report.missing_dropped = std::move(dropped.dropped);

    auto labels = rtdpa::LabelMap::fit(data, config.classes);
    for (const auto &[from, into] : config.merges) {
        labels.merge(from, into);
        report.merged_classes.emplace_back(from, into);
    }

    const std::size_t label_col = data.column_index(data.label_column);
    std::vector<std::size_t> y;
    y.reserve(data.n_rows());
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
        const auto &cell = data.rows[r][label_col];
        if (!cell)
            throw SchemaError("row type '" + row_type + "': row " + std::to_string(r + 1) +
                              " has no value in label column '" + data.label_column + "'");
        y.push_back(labels.encode(*cell));
    }
    const auto split = rtdpa::stratified_split(y, labels.class_names(), config.split, rng);
    report.split_sizes = {split.train.size(), split.validation.size(), split.test.size()};
    {
        char buf[96];
        std::snprintf(buf, sizeof buf, "stratified split %.4g/%.4g/%.4g (train/validation/test)",
                      config.split[0], config.split[1], config.split[2]);
        report.notes.emplace_back(buf);
    }
    const auto train_rows = data.select_rows(split.train);
    const auto val_rows = data.select_rows(split.validation);
    out.test_rows = data.select_rows(split.test);

    FittedPipeline &p = out.pipeline;
    p.row_type = row_type;
    p.row_type_column = rows.row_type_column;
    p.label_column = rows.label_column;
    p.row_type_codes = std::move(row_type_codes);
    p.labels = labels;
    p.encoder = rtdpa::TabularEncoder::fit(train_rows, config.encode, &report);
    out.encoded_train = p.encoder.transform(train_rows, labels, row_type);

    const std::size_t n = out.encoded_train.n_rows();
    const std::size_t d = out.encoded_train.n_features();
    if (n < 2)
        throw SplitError("row type '" + row_type + "' has fewer than 2 training rows");
    const auto full = rtdpa::pca_fit(out.encoded_train.X, std::min(n - 1, d));
    report.available_components = full.n_components();
    report.explained_variance.assign(full.explained_variance.data(),
                                     full.explained_variance.data() +
                                         full.explained_variance.size());
    std::size_t requested = config.pca_components;
    if (requested == 0) {
        requested = rtdpa::scree_elbow(report.explained_variance);
        report.notes.push_back("scree elbow at " + std::to_string(requested) + " components");
    }
    report.requested_components = requested;
    report.applied_components = rtdpa::select_components(full, requested, config.pca_cap);
    p.pca = full.truncated(report.applied_components);
    p.scaler = rtdpa::AngleScaler::fit(rtdpa::pca_transform(p.pca, out.encoded_train.X));

    out.train = p.apply(train_rows);
    out.validation = p.apply(val_rows);
    out.test = p.apply(out.test_rows);

    const auto before = out.train.class_counts();
    for (std::size_t c = 0; c < before.size(); ++c)
        report.counts_before_smote[labels.class_names()[c]] = before[c];
    if (config.smote_k > 0) {
        try {
            out.train = rtdpa::smote_oversample(out.train, config.smote_k, rng);
        } catch (const AugmentationError &e) {
            throw AugmentationError("row type '" + row_type + "': " + e.what());
        }
        report.notes.push_back("SMOTE (k=" + std::to_string(config.smote_k) +
                               ") applied to training rows after projection and scaling");
    }
    const auto after = out.train.class_counts();
    for (std::size_t c = 0; c < after.size(); ++c)
        report.counts_after_smote[labels.class_names()[c]] = after[c];
    return out;
}

Json ModelBundle::to_json() const {
    Json doc;
    doc["format"] = "hyquc-model";
    doc["version"] = kModelFormatVersion;
    doc["class_names"] = pipeline.labels.class_names();
    doc["model"] = model.to_json();
    doc["pipeline"] = pipeline.to_json();
    return doc;
}

ModelBundle ModelBundle::from_json(const Json &doc) {
    try {
        if (doc.at("format").get<std::string>() != "hyquc-model")
            throw FormatError("not a model document");
        const int version = doc.at("version").get<int>();
        if (version != kModelFormatVersion)
            throw FormatError("unsupported model format version " + std::to_string(version));
        ModelBundle b{hybrid::HybridModel::from_json(doc.at("model")),
                      FittedPipeline::from_json(doc.at("pipeline"))};
        if (b.model.n_classes != b.pipeline.labels.n_classes())
            throw FormatError("model class count does not match its label map");
        if (b.model.spec.n_qubits != b.pipeline.pca.n_components())
            throw FormatError("model width does not match the PCA component count");
        return b;
    } catch (const nlohmann::json::exception &e) {
        throw FormatError(std::string("malformed model document: ") + e.what());
    }
}

ModelBundle ModelBundle::read(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open model file " + path.string());
    try {
        return from_json(Json::parse(in));
    } catch (const nlohmann::json::parse_error &e) {
        throw FormatError("model file " + path.string() + " is not valid JSON: " + e.what());
    }
}

} // namespace hyquc::pipeline
