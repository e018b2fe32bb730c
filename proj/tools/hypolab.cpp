// hypolab: configuration-driven runner for the energy-estimate experiments.

#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "hypolab/commands.hpp"

int main(int argc, char** argv) {
    using namespace hypolab;

    CLI::App app{"hypolab: loss-of-regularity experiments for hyperbolic operators with rough coefficients"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int jobs = 0;
    std::uint64_t seed = 0;
    double force_m0 = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--jobs", jobs, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", seed, "seed for randomized initial data (overrides integrator.seed)");
    };

    auto* tables = app.add_subcommand("tables", "rebuild the catalog tables with fitted exponents");
    auto* classify = app.add_subcommand("classify", "fit symbol orders and report the minimal Zygmund index");
    auto* energy = app.add_subcommand("energy", "write energy traces for every frequency");
    auto* loss = app.add_subcommand("loss", "fit the loss exponent for each oscillation exponent");
    auto* verify = app.add_subcommand("verify", "run every bound check; exit 3 on any failure");
    for (auto* sub : {tables, classify, energy, loss, verify}) add_common(sub);
    classify->add_option("--force-m0", force_m0, "skip the fits and use this order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    cli::RunOptions opt;
    if (!out_dir.empty()) opt.out_dir = out_dir;
    opt.jobs = jobs > 0 ? jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    for (auto* sub : {tables, classify, energy, loss, verify})
        if (sub->count("--seed")) opt.seed = seed;
    if (classify->count("--force-m0")) opt.force_m0 = force_m0;

    ExperimentConfig cfg;
    try {
        cfg = cli::effective_config(load_config(config_path), opt);
    } catch (const ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return cli::kConfigFailure;
    }

    try {
        if (*tables) return cli::cmd_tables(cfg, opt);
        if (*classify) return cli::cmd_classify(cfg, opt);
        if (*energy) return cli::cmd_energy(cfg, opt);
        if (*loss) return cli::cmd_loss(cfg, opt);
        return cli::cmd_verify(cfg, opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kRuntimeFailure;
    }
}
