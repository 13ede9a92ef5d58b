#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "warpgeo/errors.hpp"
#include "warpgeo/scenario.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_dir, int grid,
                double tol, bool serial) {
    warpgeo::ScenarioConfig cfg = warpgeo::parse_scenario_file(config_path);

    if (!out_dir.empty()) {
        cfg.out_directory = out_dir;
    } else if (!cfg.out_directory_set) {
        if (const char* env = std::getenv("WARPGEO_OUT"); env != nullptr && *env != '\0')
            cfg.out_directory = env;
    }
    if (grid != 0) {
        if (grid < 64) throw warpgeo::ConfigError("--grid must be at least 64");
        cfg.grid_size = grid;
    }
    if (tol > 0.0) cfg.tol.identity = tol;
    if (serial) cfg.serial = true;

    const warpgeo::ReportBundle bundle = warpgeo::run_scenario(cfg);
    for (const warpgeo::CheckRecord& rec : bundle.records) {
        std::cout << '[' << warpgeo::to_string(rec.status) << "] " << rec.name
                  << "  value=" << rec.value << "  bound=" << rec.bound
                  << "  margin=" << rec.margin << '\n';
    }
    for (const std::string& artifact : bundle.artifacts)
        std::cout << "wrote " << artifact << '\n';
    std::cout << bundle.records.size() << " checks, " << bundle.failures()
              << " failures\n";
    return bundle.all_passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical checks for graphs of prescribed mean curvature in warped products"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int grid = 0;
    double tol = 0.0;
    bool serial = false;

    CLI::App* run = app.add_subcommand("run", "run a scenario config and write reports");
    run->add_option("config", config_path, "path to the scenario JSON file")->required();
    run->add_option("--out", out_dir,
                    "output directory (overrides the config and WARPGEO_OUT)");
    run->add_option("--grid", grid, "override the eigensolver grid size");
    run->add_option("--tol", tol, "override the identity residual tolerance");
    run->add_flag("--serial", serial, "disable the parallel probe map");

    app.add_subcommand("list-builtins", "print the builtin profile and weight catalog");

    std::string suite;
    CLI::App* verify = app.add_subcommand("verify", "run a named verification suite");
    verify->add_option("--suite", suite, "one of: identities, spectral, radial")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(config_path, out_dir, grid, tol, serial);
        if (app.got_subcommand("list-builtins")) {
            std::cout << warpgeo::list_builtins_text();
            return 0;
        }
        if (verify->parsed()) {
            const int failures = warpgeo::verify_suite(suite, std::cout);
            std::cout << (failures == 0 ? "suite passed" : "suite failed") << '\n';
            return failures == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
