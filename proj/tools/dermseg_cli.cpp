// dermseg: batch lesion segmentation front-end.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 some images failed.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dermseg/dermseg.hpp"

namespace fs = std::filesystem;
using namespace dermseg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

struct ConfigArgs {
    std::string file;
    std::vector<std::string> overrides;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--config", file, "JSON config file (a run manifest is accepted too)")->check(CLI::ExistingFile);
        cmd->add_option("--set", overrides, "Override a config value, e.g. --set kmeans.k=5")->take_all();
    }

    [[nodiscard]] PipelineConfig load() const
    {
        PipelineConfig cfg;
        if (!file.empty()) {
            const auto bytes = io::read_file(file);
            cfg = parse_config(std::string(bytes.begin(), bytes.end()));
        }
        for (const auto& o : overrides) cfg = apply_override(cfg, o);
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Skin lesion segmentation: color-model training, segmentation and scoring"};
    app.require_subcommand(1);

    ConfigArgs train_cfg, segment_cfg, pipeline_cfg;
    std::string data_dir, model_path, out_path, pred_dir, gt_dir, train_dir, eval_dir;

    auto* train = app.add_subcommand("train", "Learn lesion color ranges from images with ground-truth masks");
    train->add_option("--data", data_dir, "Dataset directory")->required();
    train->add_option("--out", out_path, "Model JSON to write")->required();
    train_cfg.attach(train);

    auto* segment = app.add_subcommand("segment", "Segment every image of a dataset directory");
    segment->add_option("--data", data_dir, "Dataset directory")->required();
    segment->add_option("--model", model_path, "Model JSON from `train`")->required()->check(CLI::ExistingFile);
    segment->add_option("--out", out_path, "Output directory")->required();
    segment_cfg.attach(segment);

    auto* evaluate = app.add_subcommand("evaluate", "Score <id>_pred.png masks against <id>_segmentation.png");
    evaluate->add_option("--pred", pred_dir, "Directory of predicted masks")->required();
    evaluate->add_option("--gt", gt_dir, "Directory of ground-truth masks")->required();
    evaluate->add_option("--out", out_path, "Directory for metrics.csv and metrics.json")->required();

    auto* pipeline = app.add_subcommand("pipeline", "train + segment + evaluate");
    pipeline->add_option("--train", train_dir, "Training dataset directory")->required();
    pipeline->add_option("--eval", eval_dir, "Evaluation dataset directory")->required();
    pipeline->add_option("--out", out_path, "Output directory")->required();
    pipeline_cfg.attach(pipeline);

    bool print_defaults = false;
    auto* config = app.add_subcommand("config", "Configuration utilities");
    config->add_flag("--print-defaults", print_defaults, "Print the default configuration as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*config) {
            if (!print_defaults) {
                std::cerr << "config: nothing to do (try --print-defaults)\n";
                return kExitUsage;
            }
            std::cout << to_json(PipelineConfig{}).dump(2) << "\n";
            return kExitOk;
        }
        if (*evaluate) {
            cmd_evaluate(pred_dir, gt_dir, out_path, std::cout);
            return kExitOk;
        }

        PipelineConfig cfg;
        try {
            cfg = (*train ? train_cfg : *segment ? segment_cfg : pipeline_cfg).load();
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitUsage;
        }

        if (*train) {
            const auto report = cmd_train(cfg, index_dataset(data_dir), out_path, std::cout);
            return report.failures.empty() ? kExitOk : kExitPartial;
        }
        if (*segment) {
            const auto bytes = io::read_file(model_path);
            const LesionColorModel model = load_model(std::string(bytes.begin(), bytes.end()));
            const auto report = cmd_segment(cfg, index_dataset(data_dir), model, out_path, std::cout);
            return report.failures == 0 ? kExitOk : kExitPartial;
        }
        const auto report = cmd_pipeline(cfg, train_dir, eval_dir, out_path, std::cout);
        return report.failures() == 0 ? kExitOk : kExitPartial;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
