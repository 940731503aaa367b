// cartan: run diagnostic batteries on a system-definition file and emit a JSON report.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "cartan/config.hpp"
#include "cartan/errors.hpp"
#include "cartan/report.hpp"
#include "cartan/systems.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cartan: exterior-calculus diagnostics for action 1-forms"};
    app.require_subcommand(0, 1);
    bool list_presets = false;
    app.add_flag("--list-presets", list_presets, "Print the bundled preset names and exit");

    auto* run_cmd = app.add_subcommand("run", "Run diagnostic batteries on a config file");
    std::string config_path, battery, preset, out_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
    bool summary = true;
    run_cmd->add_option("config", config_path, "System-definition file");
    run_cmd->add_option("--battery", battery, "Comma-separated batteries (pfaff, torsion, thermo, theorems, periods, systems, topology, all)");
    run_cmd->add_option("--seed", seed, "Random seed for sampling");
    run_cmd->add_option("--tolerance", tolerance, "Zero-test tolerance")->check(CLI::PositiveNumber);
    run_cmd->add_option("--preset", preset, "Use a bundled preset as the system");
    run_cmd->add_option("--out", out_path, "Write the JSON report here instead of stdout");
    run_cmd->add_flag("--summary,!--no-summary", summary, "Print the text summary (default on)");

    CLI11_PARSE(app, argc, argv);

    if (list_presets) {
        for (const auto& name : cartan::preset_names()) std::cout << name << "  " << cartan::make_preset(name).description << "\n";
        return cartan::kExitPass;
    }
    if (!run_cmd->parsed()) {
        std::cerr << app.help();
        return cartan::kExitConfig;
    }

    cartan::RunConfig config;
    const std::string where = config_path.empty() ? "<preset>" : config_path;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << config_path << ": cannot open\n";
                return cartan::kExitConfig;
            }
            std::stringstream text;
            text << in.rdbuf();
            config = cartan::parse_config(text.str());
        } else if (preset.empty()) {
            std::cerr << "run: give a config file or --preset\n";
            return cartan::kExitConfig;
        }
        if (!preset.empty()) {
            config.preset = cartan::Text{preset, {}};
            config.action.reset();
            config.fluid.reset();
            config.em.reset();
        }
        if (seed) config.seed = *seed;
        if (tolerance) config.tolerance = *tolerance;
        if (!battery.empty()) {
            config.batteries.clear();
            for (const auto& b : split_list(battery)) {
                if (b == "all") continue;
                const auto& names = cartan::battery_names();
                if (std::find(names.begin(), names.end(), b) == names.end())
                    throw cartan::UsageError("unknown battery '" + b + "'");
                config.batteries.push_back(b);
            }
        }
        if (!out_path.empty()) config.out = out_path;
        cartan::validate_config(config);
    } catch (const cartan::ParseError& e) {
        std::cerr << where << ":" << e.what() << "\n";
        return cartan::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << where << ": " << e.what() << "\n";
        return cartan::kExitConfig;
    }

    try {
        auto outcome = cartan::run(config);
        const std::string text = cartan::render_report(outcome.report);
        std::ostream* summary_stream = &std::cout;
        if (config.out.empty()) {
            std::cout << text;
            summary_stream = &std::cerr;
        } else {
            std::ofstream out(config.out, std::ios::binary);
            if (!out) {
                std::cerr << config.out << ": cannot write\n";
                return cartan::kExitInternal;
            }
            out << text;
        }
        if (summary) *summary_stream << cartan::render_summary(outcome.report);
        return outcome.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return cartan::kExitInternal;
    }
}
