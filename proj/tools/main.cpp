#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "polyboltz/cli.hpp"
#include "polyboltz/errors.hpp"

int main(int argc, char** argv) {
    using namespace polyboltz;
    CLI::App app{"Polyatomic Boltzmann collision operator: verification campaigns"};
    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
    std::uint64_t seed = 0;
    app.add_option("command", command, "verify | qtest | kernel-table | hs-norm | nu | coercivity | monotony | spectrum")
        ->required()
        ->check(CLI::IsMember(kCommands));
    app.add_option("--config", config_path, "TOML or JSON config file")->required();
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads (results do not depend on it)")->check(CLI::NonNegativeNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Overrides the config seed");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    RunConfig config;
    try {
        config = parse_config(read_config_file(config_path));
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "config: " << e.what() << '\n';
        return kExitConfig;
    }
    if (*seed_opt) {
        config.seed = seed;
        config.quad.seed = seed;
    }
    if (threads > 0) set_num_threads(threads);

    const RunOutcome outcome = run(command, config, out_dir);
    std::cout << command << ": " << (outcome.exit_code == kExitOk ? "PASS" : "FAIL") << '\n';
    for (const auto& f : outcome.failures) std::cout << "  " << f << '\n';
    return outcome.exit_code;
}
