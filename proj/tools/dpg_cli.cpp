#include <CLI11.hpp>
#include <iostream>

#include "dpg/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"DPG study driver"};
    std::string config, mode, out, seed;
    app.add_option("config", config, "key=value config file")->required();
    app.add_option("--mode", mode, "study, adaptive, verify or describe");
    app.add_option("--out", out, "report path (- for stdout)");
    app.add_option("--seed", seed, "random seed");
    CLI11_PARSE(app, argc, argv);

    std::map<std::string, std::string> overrides;
    if (!mode.empty()) overrides["mode"] = mode;
    if (!out.empty()) overrides["out"] = out;
    if (!seed.empty()) overrides["seed"] = seed;
    try {
        const dpg::StudyConfig cfg = dpg::read_config_file(config, overrides);
        return dpg::run_config(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
