#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "dht/experiment.hpp"

namespace {

constexpr int kConfigErrorExit = 2;
constexpr int kRecoveryExit = 3;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dhtlab: seeded covert-channel experiments"};
    app.require_subcommand(1);

    std::string config;
    std::filesystem::path out_dir;
    std::string format = "csv";
    std::size_t seeds = 0;
    bool require_recovery = false;

    auto* run = app.add_subcommand("run", "run a scenario and write a report");
    run->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--seeds", seeds, "number of seeds (default: scenario repetitions)");
    run->add_flag("--require-recovery", require_recovery, "exit 3 if any seed fails to recover");

    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        const dht::Scenario scenario = dht::load_scenario(config);
        if (*validate) {
            std::cout << "ok\n";
            return 0;
        }
        const dht::ExperimentReport report = dht::run(scenario, seeds);
        std::filesystem::create_directories(out_dir);
        const bool csv = format == "csv";
        const auto path = out_dir / (csv ? "report.csv" : "report.json");
        dht::emit(report, csv ? dht::ReportFormat::Csv : dht::ReportFormat::Json, path);

        std::size_t recovered = 0;
        for (const auto& s : report.seeds) recovered += s.recovered ? 1 : 0;
        std::cout << path.string() << ": " << recovered << "/" << report.seeds.size() << " seeds recovered\n";
        if (require_recovery && recovered != report.seeds.size()) return kRecoveryExit;
        return 0;
    } catch (const dht::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigErrorExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
