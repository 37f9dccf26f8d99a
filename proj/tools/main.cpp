// Command-line front end: run presets, check configs, run the quantile oracle.
#include "cmf/config.hpp"
#include "cmf/experiment.hpp"
#include "cmf/parallel.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

cmf::ConfigMap gather_settings(const std::string& preset, const std::string& config_file,
                               const std::vector<std::string>& sets) {
    cmf::ConfigMap map;
    if (!config_file.empty()) map = cmf::read_config_file(config_file);
    if (!preset.empty()) map["preset"] = preset;
    for (const auto& s : sets) cmf::apply_override(map, s);
    return map;
}

int run_oracle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cmf::ConfigError("cannot read samples file '" + path + "'");
    std::string line;
    int checked = 0, violations = 0, lineno = 0;
    double worst = 0.0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream s(line);
        double t = 0.0;
        if (!(s >> t)) throw cmf::ConfigError("line " + std::to_string(lineno) + ": expected T first");
        std::vector<double> values, weights;
        double v = 0.0, w = 0.0;
        while (s >> v >> w) {
            values.push_back(v);
            weights.push_back(w);
        }
        double total = 0.0;
        for (double x : weights) total += x;
        if (values.empty() || !(total > 0.0)) throw cmf::ConfigError("line " + std::to_string(lineno) + ": no neighbors");
        for (double& x : weights) x /= total;
        const double gap = cmf::quantile_optimality_gap(values, weights, t);
        worst = std::max(worst, gap);
        violations += gap > 1e-12;
        ++checked;
    }
    std::cout << "checked " << checked << " samples, violations " << violations << ", worst gap " << worst << '\n';
    return violations == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous median filter experiments"};
    app.require_subcommand(1);

    std::string preset, config_file, out_dir;
    std::vector<std::string> sets;
    int threads = 0;
    long long seed = -1;
    auto* run = app.add_subcommand("run", "Run an experiment preset");
    run->add_option("--preset", preset, "Preset name")->required()->check(CLI::IsMember(cmf::preset_names()));
    run->add_option("--config", config_file, "Settings file (key = value)")->check(CLI::ExistingFile);
    run->add_option("--set", sets, "Override a setting, key=value");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--threads", threads, "Worker threads (1 for bit-reproducible runs)")->check(CLI::NonNegativeNumber);
    run->add_option("--seed", seed, "Seed for randomized inputs")->check(CLI::NonNegativeNumber);

    std::string validate_file;
    auto* validate = app.add_subcommand("validate", "Resolve and check a settings file without running");
    validate->add_option("--config", validate_file, "Settings file")->required()->check(CLI::ExistingFile);

    std::string samples;
    auto* oracle = app.add_subcommand("oracle", "Brute-force checks");
    auto* quantile = oracle->add_subcommand("quantile", "Check quantile selections against a potential scan");
    quantile->add_option("--samples", samples, "Lines of: T v1 w1 v2 w2 ...")->required()->check(CLI::ExistingFile);
    oracle->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            cmf::ConfigMap map = gather_settings(preset, config_file, sets);
            if (!out_dir.empty()) map["output.dir"] = out_dir;
            if (threads > 0) map["threads"] = std::to_string(threads);
            if (seed >= 0) map["seed"] = std::to_string(seed);
            const cmf::ExperimentConfig cfg = cmf::resolve_config(map);
            if (cfg.threads > 0) cmf::set_threads(cfg.threads);
            const cmf::ExperimentResult result = cmf::run_experiment(cfg);
            for (const auto& arm : result.arms) {
                std::cout << arm.name;
                for (const auto& [k, v] : arm.metrics) std::cout << ' ' << k << '=' << v;
                std::cout << '\n';
            }
            std::cout << "wrote " << cfg.output_dir << " in " << result.seconds << " s\n";
        } else if (*validate) {
            const cmf::ExperimentConfig cfg = cmf::resolve_config(cmf::read_config_file(validate_file));
            for (const auto& [k, v] : cfg.resolved) std::cout << k << " = " << v << '\n';
            std::cout << "config ok\n";
        } else if (*quantile) {
            return run_oracle(samples);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
