// Command-line driver. Settings come from an optional key-value config file
// (--config) and are overridden by --<key> <value> flags.

#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#if __has_include("CLI11.hpp")
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif
#include "zgcnet/pipeline.hpp"

namespace {

struct Command {
    const char* name;
    const char* help;
    std::function<int(const zgcnet::RunConfig&, std::ostream&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const Command commands[] = {
        {"filtrate", "build complexes per snapshot and write Betti numbers", zgcnet::cmd_filtrate},
        {"zigzag", "zigzag persistence diagram per sliding window", zgcnet::cmd_zigzag},
        {"zpi", "persistence images and grayscale renders from window diagrams", zgcnet::cmd_zpi},
        {"distance", "Wasserstein-1 distance between two diagram files", zgcnet::cmd_distance},
        {"train", "train the forecaster and write history, metrics and a checkpoint", zgcnet::cmd_train},
        {"forecast", "predict the steps after the series from a checkpoint", zgcnet::cmd_forecast},
        {"ablate", "train the full model and each ablation, report metric deltas", zgcnet::cmd_ablate},
        {"synth", "generate a dynamic network with a planted periodic cycle", zgcnet::cmd_synth},
        {"gradcheck", "compare analytic and numerical gradients on a tiny model", zgcnet::cmd_gradcheck},
    };

    CLI::App app{"Zigzag persistence features and graph forecasting"};
    app.require_subcommand(1);
    std::string config_path;
    std::map<std::string, std::optional<std::string>> overrides;
    bool check_flag = false;
    for (const auto& key : zgcnet::RunConfig::keys()) overrides[key];

    const zgcnet::RunConfig defaults;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config,-c", config_path, "key-value config file")->check(CLI::ExistingFile);
        for (auto& [key, value] : overrides) {
            if (key == "check") continue;
            sub->add_option("--" + key, value, "default: " + defaults.get(key));
        }
        sub->add_flag("--check", check_flag, "run the Betti-consistency check (zigzag)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        zgcnet::RunConfig cfg = config_path.empty() ? zgcnet::RunConfig{} : zgcnet::RunConfig::load(config_path);
        for (const auto& [key, value] : overrides)
            if (value) cfg.set(key, *value);
        if (check_flag) cfg.check = true;
        for (const auto& c : commands)
            if (app.got_subcommand(c.name)) return c.run(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
