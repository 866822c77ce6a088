#include <chrono>
#include <ctime>
#include <iostream>

#include <CLI11.hpp>
#include <hamflow/errors.hpp>

#include "experiments.hpp"

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int run(const std::string& path, const std::string& seed, const std::string& out) {
    using namespace hamflow::cli;
    try {
        ExperimentConfig cfg = parse_config_file(path);
        if (!seed.empty()) override_seed(cfg, seed);
        if (!out.empty()) cfg.output = out;
        const std::string started = utc_now();
        const ExperimentResult result = run_experiment(cfg);
        for (const auto& f : write_outputs(cfg, result, path, started, utc_now())) std::cout << f << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const hamflow::Error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Type II variational numerics for Hamiltonian systems"};
    app.require_subcommand(1);

    std::string config, seed, out;
    auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
    run_cmd->add_option("config", config, "INI config file")->required();
    run_cmd->add_option("--seed", seed, "Override the random seed (unsigned 64-bit)");
    run_cmd->add_option("--out", out, "Override the output path prefix");

    auto* list_cmd = app.add_subcommand("list", "List registered experiments");

    CLI11_PARSE(app, argc, argv);

    if (list_cmd->parsed()) {
        for (const auto& e : hamflow::cli::registry()) std::cout << e.name << "\t" << e.description << "\n";
        return 0;
    }
    return run(config, seed, out);
}
