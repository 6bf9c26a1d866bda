#include <iostream>

#include <CLI11.hpp>

#include "cavity/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Exact reduced dynamics of a damped cavity mode"};
    app.require_subcommand(1);

    cavity::RunOptions opts;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Execute the tasks of a JSON run configuration");
    run->add_option("--config", opts.config_path, "Run configuration (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory (overrides the config)");
    run->add_flag("--verbose", opts.verbose, "Progress on stderr");
    run->add_option("--threads", opts.threads, "Worker cap for parallel scans (0 = all cores)");

    std::string summary_dir;
    auto* summarize = app.add_subcommand("summarize", "Print a digest of an artifact directory");
    summarize->add_option("dir", summary_dir, "Artifact directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (*run) {
        if (!out_dir.empty()) opts.output = out_dir;
        return cavity::run(opts, std::cout, std::cerr);
    }
    return cavity::summarize(summary_dir, std::cout, std::cerr);
}
