#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "catcollapse/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Category collapsing and hierarchical log-linear models for contingency tables"};
    app.require_subcommand(1);

    catcollapse::RunConfig config;
    std::string data, cfg, out = ".";
    double stop_quotient = 0.0;
    std::string generators, dim;
    std::size_t pcc_step = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--data", data, "CSV of counts: variable columns then count")->required();
        sub->add_option("--config", cfg, "JSON variable configuration");
        sub->add_option("--out", out, "Output directory")->capture_default_str();
        sub->add_option("--precision", config.precision, "Decimals for deviance columns")->capture_default_str();
    };

    auto* pcc = app.add_subcommand("pcc", "Run paired category collapsing");
    common(pcc);
    auto* stop_opt = pcc->add_option("--stop-quotient", stop_quotient, "Stop when the best G2/df exceeds this");
    pcc->add_flag("--loss-matrices", config.loss_matrices, "Also write per-step loss matrices");

    auto* lm = app.add_subcommand("lossmatrix", "Write pairwise information-loss matrices");
    common(lm);
    auto* dim_opt = lm->add_option("--dim", dim, "Variable name or index");

    auto* hllm = app.add_subcommand("hllm", "Fit or select hierarchical log-linear models");
    common(hllm);
    auto* gen_opt = hllm->add_option("--generators", generators, "Generating class, e.g. [ab][c]");
    auto* step_opt = hllm->add_option("--pcc-step", pcc_step, "Model the table collapsed at this PCC row");

    auto* ratios = app.add_subcommand("ratios", "Write observed/expected ratio tables");
    common(ratios);

    auto* curve = app.add_subcommand("curve", "Write deviance versus parameter count");
    common(curve);

    auto* oracle = app.add_subcommand("oracle", "Exhaustive partition search for small tables");
    common(oracle);
    oracle->add_option("--cap", config.oracle_cap, "Maximum number of partitions to enumerate")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : catcollapse::kExitInput;
    }

    config.command = app.get_subcommands().front()->get_name();
    config.data = data;
    if (!cfg.empty()) config.config = cfg;
    config.out = out;
    if (stop_opt->count()) config.stop_quotient = stop_quotient;
    if (gen_opt->count()) config.generators = generators;
    if (step_opt->count()) config.pcc_step = pcc_step;
    if (dim_opt->count()) config.dim = dim;
    return catcollapse::run_command(config, std::cerr);
}
