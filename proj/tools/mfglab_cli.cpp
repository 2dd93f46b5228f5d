// Command-line front end: one subcommand per experiment kind.
// Exit status: 0 all verdicts pass, 1 a verdict fails, 2 configuration or runtime error.

#include "mfglab/errors.hpp"
#include "mfglab/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Options {
    std::string config;
    std::string out_dir = "mfglab-out";
    std::optional<std::uint64_t> seed;
    std::vector<std::string> formats{"csv", "json", "svg"};
};

int run(mfglab::ExperimentKind kind, const Options& opt)
{
    mfglab::ExperimentConfig config = opt.config.empty() ? mfglab::ExperimentConfig{} : mfglab::load_config(opt.config);
    if (config.kind_declared && config.kind != kind) {
        throw mfglab::ConfigError("config declares kind '" + mfglab::to_string(config.kind) + "' but the subcommand is '"
            + mfglab::to_string(kind) + "'");
    }
    config.kind = kind;
    if (opt.seed) {
        config.seed = *opt.seed;
    }
    const mfglab::RunRecord record = mfglab::run_experiment(config);
    for (const auto& path : mfglab::emit_report(record, opt.formats, opt.out_dir)) {
        std::cout << "wrote " << path.string() << "\n";
    }
    for (const auto& v : record.verdicts) {
        std::cout << mfglab::to_string(v.outcome) << "  " << v.name << "  " << v.detail << "\n";
    }
    std::cout << "config " << record.config_hash << "\n";
    return record.exit_status();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Regularized monotone mean-field game laboratory"};
    app.require_subcommand(1);
    Options opt;
    std::optional<mfglab::ExperimentKind> chosen;
    for (const char* name : {"solve", "sweep", "uniqueness", "mollify-audit", "monotonicity-audit", "exponent-check"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment");
        sub->add_option("--config", opt.config, "YAML experiment configuration")->check(CLI::ExistingFile);
        sub->add_option("--out-dir", opt.out_dir, "directory for reports")->capture_default_str();
        sub->add_option("--seed", opt.seed, "override the configured seed");
        sub->add_option("--format", opt.formats, "report formats: csv, json, svg")
            ->delimiter(',')
            ->check(CLI::IsMember({"csv", "json", "svg"}))
            ->capture_default_str();
        sub->callback([&chosen, name] { chosen = mfglab::kind_from_string(name); });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return run(*chosen, opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
