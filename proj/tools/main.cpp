// chdbc: run, verify and convergence front end for the Cahn-Hilliard solver
// with dynamic boundary conditions.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <chdbc/errors.hpp>

#include "app/commands.hpp"
#include "app/config.hpp"

namespace {

struct CommandArgs {
    std::string config;
    std::vector<std::string> overrides;
};

CLI::App* add_command(CLI::App& app, const char* name, const char* help, CommandArgs& args) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config, "key = value configuration file")->required();
    sub->add_option("--override", args.overrides, "extra key=value settings applied last")
        ->take_all();
    return sub;
}

} // namespace

int main(int argc, char** argv) {
    using namespace chdbc::app;

    CLI::App app{"Cahn-Hilliard solver with dynamic boundary conditions"};
    app.require_subcommand(1);
    CommandArgs args;
    CLI::App* run = add_command(app, "run", "simulate and write energy.csv and snapshots", args);
    CLI::App* verify = add_command(app, "verify", "identity and structure suites", args);
    CLI::App* convergence = add_command(app, "convergence", "observed order of accuracy", args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kConfigError;
    }

    RunConfig cfg;
    try {
        cfg = load_config(args.config, args.overrides);
    } catch (const chdbc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    if (run->parsed()) return cmd_run(cfg, std::cout, std::cerr);
    if (verify->parsed()) return cmd_verify(cfg, std::cout, std::cerr);
    if (convergence->parsed()) return cmd_convergence(cfg, std::cout, std::cerr);
    return kConfigError;
}
