#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

#include "timeqa/core/errors.hpp"
#include "timeqa/pipeline/config.hpp"
#include "timeqa/pipeline/stages.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kStageFailure = 2, kDependency = 3 };

struct Args {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string stage_dir;
    std::string predictions;
    bool resume = false;
    bool verbose = false;
};

void add_common(CLI::App* cmd, Args& a, bool needs_config = true) {
    auto* c = cmd->add_option("--config", a.config, "Pipeline config (JSON, comments allowed)");
    if (needs_config) c->required();
    cmd->add_option("--seed", a.seed, "Override the config seed");
    cmd->add_option("--stage-dir", a.stage_dir, "Stage directory (default: the config's output_dir)");
    cmd->add_flag("--resume", a.resume, "Reuse judge response caches from an interrupted run");
    cmd->add_flag("-v,--verbose", a.verbose, "Debug logging");
}

int run(const std::vector<timeqa::pipeline::Stage>& stages, const Args& a) {
    using namespace timeqa::pipeline;
    auto cfg = load_config(a.config);
    if (a.seed) set_seed(cfg, *a.seed);
    RunOptions opts;
    opts.stage_dir = a.stage_dir.empty() ? cfg.output_dir : std::filesystem::path(a.stage_dir);
    opts.resume = a.resume;
    opts.predictions = a.predictions;
    for (auto s : stages) {
        try {
            run_stage(s, cfg, opts);
        } catch (const std::exception& e) {
            spdlog::error("stage {} failed: {}", to_string(s), e.what());
            throw;
        }
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    using timeqa::pipeline::Stage;
    CLI::App app{"timeqa: temporal video QA dataset and benchmark pipeline"};
    app.require_subcommand(1);
    Args a;

    struct Sub {
        const char* name;
        const char* help;
        std::vector<Stage> stages;
    };
    const std::vector<Sub> subs = {
        {"ingest", "Parse annotation corpora into normalized clips", {Stage::ingest}},
        {"generate", "Mine temporal candidates and render QA items", {Stage::generate}},
        {"debias", "Reversal augmentation, answer balancing, long-tail caps", {Stage::debias}},
        {"mtp", "Augment an instruction dataset with frame-index and assigned-QA tasks", {Stage::mtp}},
        {"audit", "Judge-vote shortcut filter, option rebalancing, diagnostics", {Stage::audit}},
        {"evaluate", "Score a predictions file against the benchmark", {Stage::evaluate}},
    };
    std::vector<std::pair<CLI::App*, std::vector<Stage>>> commands;
    for (const auto& s : subs) {
        auto* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, a);
        if (s.stages.front() == Stage::evaluate)
            cmd->add_option("--predictions", a.predictions, "Predictions JSONL (item_id, raw_output)");
        commands.emplace_back(cmd, s.stages);
    }
    auto* all = app.add_subcommand("run", "Run ingest, generate, debias, then mtp/audit/evaluate when configured");
    add_common(all, a);
    all->add_option("--predictions", a.predictions, "Predictions JSONL for the evaluate stage");
    auto* report = app.add_subcommand("report", "Summarize a stage directory");
    add_common(report, a, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    auto logger = spdlog::stderr_color_mt("timeqa");
    spdlog::set_default_logger(logger);
    spdlog::set_level(a.verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        if (report->parsed()) {
            std::filesystem::path dir = a.stage_dir;
            if (dir.empty()) {
                if (a.config.empty()) throw timeqa::ConfigInvalid("report needs --stage-dir or --config");
                dir = timeqa::pipeline::load_config(a.config).output_dir;
            }
            std::cout << timeqa::pipeline::run_report(dir);
            return kOk;
        }
        if (all->parsed()) {
            auto cfg = timeqa::pipeline::load_config(a.config);
            std::vector<Stage> stages = {Stage::ingest, Stage::generate, Stage::debias};
            if (!cfg.mtp.input.empty()) stages.push_back(Stage::mtp);
            if (!cfg.audit.judges.empty()) stages.push_back(Stage::audit);
            if (!cfg.audit.judges.empty() && (!a.predictions.empty() || !cfg.predictions.empty()))
                stages.push_back(Stage::evaluate);
            return run(stages, a);
        }
        for (const auto& [cmd, stages] : commands)
            if (cmd->parsed()) return run(stages, a);
    } catch (const timeqa::ConfigInvalid& e) {
        spdlog::error("config error: {}", e.what());
        return kConfigError;
    } catch (const timeqa::MissingDependency& e) {
        spdlog::error("dependency error: {}", e.what());
        return kDependency;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kStageFailure;
    }
    return kStageFailure;
}
