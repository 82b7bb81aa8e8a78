// superhodge: run scenario files.
//
//   superhodge run <file> [--format text|json|csv] [--window-override N] [--probe] [--timing]
//   superhodge validate <file>
//
// Exit status: 0 all checks pass, 1 some check fails, 2 malformed input.

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "superhodge/scenario.hpp"

using namespace superhodge;

int main(int argc, char** argv)
{
    CLI::App app{"Hodge-to-de Rham spectral sequences of supervarieties"};
    app.require_subcommand(1);

    std::string run_file, format = "text";
    int window_override = 0;
    bool probe = false, timing = false;
    CLI::App* run = app.add_subcommand("run", "compute pages and evaluate the checks of a scenario");
    run->add_option("file", run_file, "scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
    CLI::Option* wo = run->add_option("--window-override", window_override, "replace the scenario window")->check(CLI::PositiveNumber);
    run->add_flag("--probe", probe, "also compare against window + 1");
    run->add_flag("--timing", timing, "report seconds per stage");

    std::string validate_file;
    CLI::App* validate = app.add_subcommand("validate", "parse a scenario and validate its atlas");
    validate->add_option("file", validate_file, "scenario file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*validate) {
            Scenario s = load_scenario(validate_file);
            if (!s.needs_atlas()) {
                std::cout << validate_file << ": parsed, no atlas\n";
                return 0;
            }
            ValidationReport v = validate_atlas(build_atlas(s));
            std::cout << validate_file << ": " << (v.ok() ? "valid, " + std::to_string(v.checks) + " checks" : v.summary()) << "\n";
            return v.ok() ? 0 : 1;
        }
        Scenario s = load_scenario(run_file);
        RunOptions opt;
        if (*wo) opt.window_override = window_override;
        opt.force_probe = probe;
        Report r = run_scenario(s, opt);
        std::cout << emit_report(r, parse_format(format), timing);
        return r.ok() ? 0 : 1;
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
