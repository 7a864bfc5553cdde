// hyquc: train, grid-search, evaluate and predict with per-row-type
// hybrid quantum-classical classifiers.
#include <iostream>

#include <CLI11.hpp>

#include "hyquc/app.hpp"
#include "hyquc/error.hpp"

namespace {

using hyquc::app::RunConfig;
namespace fs = std::filesystem;

struct Common {
    fs::path config_path;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out;
    std::optional<std::size_t> threads;
};

void add_common(CLI::App *cmd, Common &c, bool config_required) {
    auto *opt = cmd->add_option("--config", c.config_path, "run configuration file");
    if (config_required)
        opt->required();
    cmd->add_option("--seed", c.seed, "override the configured seed");
    cmd->add_option("--out", c.out, "override the output directory");
    cmd->add_option("--threads", c.threads, "row types trained in parallel");
}

RunConfig load(const Common &c) {
    RunConfig config = c.config_path.empty() ? RunConfig{} : RunConfig::read(c.config_path);
    if (c.seed)
        config.seed = *c.seed;
    if (c.out)
        config.out_dir = *c.out;
    if (c.threads)
        config.threads = std::max<std::size_t>(1, *c.threads);
    return config;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App cli{"Per-row-type hybrid quantum-classical classifiers"};
    cli.require_subcommand(1);

    Common train_opts;
    auto *train = cli.add_subcommand("train", "fit one model per row type");
    add_common(train, train_opts, true);

    Common grid_opts;
    auto *grid = cli.add_subcommand("gridsearch", "cross-validated hyperparameter search");
    add_common(grid, grid_opts, true);

    fs::path eval_model, eval_data;
    std::optional<fs::path> eval_report;
    auto *evaluate = cli.add_subcommand("evaluate", "score a saved model on labelled rows");
    evaluate->add_option("--model", eval_model, "model file")->required();
    evaluate->add_option("--data", eval_data, "labelled CSV")->required();
    evaluate->add_option("--report", eval_report, "write the metrics report here");

    Common pred_opts;
    std::vector<fs::path> pred_models;
    fs::path pred_input, pred_output;
    auto *predict = cli.add_subcommand("predict", "route rows to their row-type model");
    add_common(predict, pred_opts, false);
    predict->add_option("--model", pred_models, "model files or directories")->required();
    predict->add_option("--input", pred_input, "CSV to score")->required();
    predict->add_option("--output", pred_output, "predictions CSV")->required();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*train) {
            hyquc::app::cmd_train(load(train_opts), std::cout);
        } else if (*grid) {
            hyquc::app::cmd_gridsearch(load(grid_opts), std::cout);
        } else if (*evaluate) {
            hyquc::app::cmd_evaluate(eval_model, eval_data, eval_report, std::cout);
        } else if (*predict) {
            std::optional<RunConfig> config;
            if (!pred_opts.config_path.empty())
                config = load(pred_opts);
            const auto summary = hyquc::app::cmd_predict(pred_models, pred_input, pred_output,
                                                         config ? &*config : nullptr, std::cout);
            if (summary.flagged > 0)
                return hyquc::app::kExitPartial;
        }
    } catch (const hyquc::Error &e) {
        std::cerr << "hyquc: " << hyquc::to_string(e.kind()) << " error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "hyquc: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
