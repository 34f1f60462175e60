// usdqkd command-line front end.
//
//   usdqkd <overlaps|usd|eve|simulate|maxloss> [--config FILE] [--seed N]
//          [--csv FILE] [--set key=value]...
//
// Prints one JSON report on stdout. Exit codes: 0 success, 2 invalid input,
// 3 infeasible or degenerate analytic outcome (the report is still printed).

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "usdqkd/config.hpp"
#include "usdqkd/report.hpp"

namespace {

int run(const std::string& command, const std::string& config_path, std::optional<std::uint64_t> seed,
        const std::string& csv_path, const std::vector<std::string>& overrides) {
    using namespace usdqkd;
    using namespace usdqkd::cli;
    try {
        json root = config_path.empty() ? json::object() : load_config_file(config_path);
        for (const auto& o : overrides) apply_override(root, o);
        if (seed) root["simulation"]["seed"] = *seed;
        const RunConfig cfg = parse_config(root);

        CommandResult res = run_command(command, cfg);
        std::cout << res.report.dump(2) << '\n';
        if (res.csv) {
            if (csv_path.empty()) {
                std::cerr << "note: sweep series produced; pass --csv to write it\n";
            } else {
                std::ofstream out(csv_path);
                if (!out) {
                    std::cerr << "error: cannot write " << csv_path << '\n';
                    return InvalidInput;
                }
                out << res.csv->str();
            }
        }
        return res.exit_code;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return InvalidInput;
    } catch (const TruncationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return InvalidInput;
    } catch (const ConsistencyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Infeasible;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unambiguous-state-discrimination attacks and decoy-state defences for two-state QKD"};
    app.require_subcommand(1);

    std::string config_path, csv_path;
    std::uint64_t seed_value = 0;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON configuration file");
    auto* seed_opt = app.add_option("--seed", seed_value, "simulation seed (overrides simulation.seed)");
    app.add_option("--csv", csv_path, "write sweep series to this CSV file");
    app.add_option("--set", overrides, "override a config entry, key=value (repeatable)")->take_all();

    std::string command;
    for (const char* name : {"overlaps", "usd", "eve", "simulate", "maxloss"}) {
        auto* sub = app.add_subcommand(name);
        sub->fallthrough();
        sub->callback([&command, name] { command = name; });
    }
    app.get_subcommand("overlaps")->description("Gram overlaps, Fock-numeric and closed form");
    app.get_subcommand("usd")->description("Optimal USD probabilities for the configured decoy");
    app.get_subcommand("eve")->description("Eve's statistics-preserving resend parameters");
    app.get_subcommand("simulate")->description("Monte Carlo session and decoy threshold test");
    app.get_subcommand("maxloss")->description("Maximum tolerable loss in dB");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : usdqkd::cli::InvalidInput;
    }
    std::optional<std::uint64_t> seed;
    if (*seed_opt) seed = seed_value;
    return run(command, config_path, seed, csv_path, overrides);
}
