#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsweep/commands.hpp"
#include "rsweep/run_config.hpp"
#include "rsweep/types.hpp"

namespace {

void add_common_options(CLI::App* cmd, rsweep::RunConfig& cfg,
                        std::vector<std::string>& kv_params) {
    cmd->add_option("--scenario", cfg.scenario, "Scenario id");
    cmd->add_option("--formulation", cfg.formulation,
                    "Error formulation: unperturbed|perturbed|both");
    cmd->add_option("--param", kv_params, "Model parameter or channel switch as key=value")
        ->take_all();
    cmd->add_option("--grid", cfg.grid, "Frequency grid lo:hi:n[:log|lin]");
    cmd->add_option("--out", cfg.out, "Output file path");
    cmd->add_option("--format", cfg.format, "Output format: csv|json");
    cmd->add_option("--tol", cfg.tol, "Solver tolerance");
    cmd->add_option("--seed", cfg.seed, "Random seed for restart draws");
    cmd->add_option("--epsilon-damp", [&cfg](const std::vector<std::string>& vals) {
        cfg.epsilon_damp = vals.empty() || vals.front().empty() ? 1e-6 : std::stod(vals.front());
        return true;
    }, "Replace A by A - eps*I to regularize singular state matrices (default eps 1e-6)")
        ->expected(0, 1);
}

void apply_kv_params(rsweep::RunConfig& cfg, const std::vector<std::string>& kv_params) {
    for (const std::string& kv : kv_params) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw rsweep::ConfigError("expected key=value for --param, got '" + kv + "'");
        std::string key = kv.substr(0, eq);
        try {
            cfg.params[key] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw rsweep::ConfigError("parameter '" + key + "' needs a numeric value");
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust performance margins for uncertain LTI systems"};
    app.require_subcommand(1);

    rsweep::RunConfig cfg_sweep, cfg_fp, cfg_rep, cfg_fid;
    std::vector<std::string> kv_sweep, kv_fp, kv_rep, kv_fid;
    std::string target;

    CLI::App* sweep = app.add_subcommand(
        "mu-sweep", "Frequency sweep of structured-singular-value bounds");
    add_common_options(sweep, cfg_sweep, kv_sweep);

    CLI::App* fp = app.add_subcommand(
        "fixed-point", "Uncertainty margins delta_min/delta_max via fixed-point search");
    add_common_options(fp, cfg_fp, kv_fp);

    CLI::App* rep = app.add_subcommand("reproduce", "Reproduce a bundled benchmark target");
    rep->add_option("target", target, "table1|table2|fig2|fig5|fig6|fig7|fig8")->required();
    add_common_options(rep, cfg_rep, kv_rep);

    CLI::App* fid = app.add_subcommand("fidelity", "Excitation-transfer fidelity traces");
    add_common_options(fid, cfg_fid, kv_fid);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : rsweep::kExitUsage;
    }

    try {
        if (sweep->parsed()) {
            apply_kv_params(cfg_sweep, kv_sweep);
            return rsweep::cmd_mu_sweep(cfg_sweep);
        }
        if (fp->parsed()) {
            apply_kv_params(cfg_fp, kv_fp);
            return rsweep::cmd_fixed_point(cfg_fp);
        }
        if (rep->parsed()) {
            apply_kv_params(cfg_rep, kv_rep);
            return rsweep::cmd_reproduce(cfg_rep, target);
        }
        if (fid->parsed()) {
            apply_kv_params(cfg_fid, kv_fid);
            return rsweep::cmd_fidelity(cfg_fid);
        }
    } catch (const rsweep::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return rsweep::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rsweep::kExitNumericFail;
    }
    return rsweep::kExitUsage;
}
