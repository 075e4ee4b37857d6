#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mfvol/mfvol.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mfvol: MAXFLAT volatility and factor portfolio toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool strict = false;
    app.add_option("--config", config_path, "TOML config file, or a run_manifest.json to replay")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "seed for synthetic runs");
    app.add_flag("--strict-weights", strict, "fail on negative or over-unity filter weights");

    const std::pair<const char*, const char*> commands[] = {
        {"design", "filter coefficients, lag-weight decay table and frequency response"},
        {"vol", "volatility panel for the configured estimator"},
        {"compare", "six-method volatility comparison backtest"},
        {"quantile", "score-bucket portfolios"},
        {"benchmark", "portfolio against the benchmark index"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        mfvol::RunConfig config = config_path.empty() ? mfvol::RunConfig{} : mfvol::load_config(config_path);
        if (!out_dir.empty()) config.report.out_dir = out_dir;
        if (seed_opt->count()) config.synthetic.seed = seed;
        if (strict) config.filter.weight_mode = "strict";

        const std::string cmd = app.get_subcommands().front()->get_name();
        std::vector<std::string> written;
        if (cmd == "design") written = mfvol::cmd_design(config);
        else if (cmd == "vol") written = mfvol::cmd_vol(config);
        else if (cmd == "compare") written = mfvol::cmd_compare(config);
        else if (cmd == "quantile") written = mfvol::cmd_quantile(config);
        else written = mfvol::cmd_benchmark(config);

        for (const auto& f : written) std::cout << config.report.out_dir << "/" << f << "\n";
        std::cout << config.report.out_dir << "/run_manifest.json\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
