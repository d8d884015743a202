#pragma once

#include <string>

#include "rsweep/run_config.hpp"

namespace rsweep {

/// Exit codes shared by the commands and the CLI: 0 success, 1 numeric
/// verdict failure, 2 usage or config error (raised as ConfigError).
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumericFail = 1;
inline constexpr int kExitUsage = 2;

/// Frequency sweep of the structured-singular-value bounds for both error
/// formulations; writes one row per frequency and a peak footer.
int cmd_mu_sweep(const RunConfig& config);

/// Margin scan and fixed-point solve for a scalar uncertainty family; writes
/// per-delta rows and a (delta_min, delta_max, mu_inf) summary block.
int cmd_fixed_point(const RunConfig& config);

/// Reproduces a bundled benchmark target. Table targets carry pass/fail
/// verdicts against embedded reference values; figure targets emit curve data
/// only. Valid targets: table1, table2, fig2, fig5, fig6, fig7, fig8.
int cmd_reproduce(const RunConfig& config, const std::string& target);

/// Excitation-transfer fidelity traces, analytic against simulated, plus a
/// detuning-sweep mode for the peak value and transfer time.
int cmd_fidelity(const RunConfig& config);

}  // namespace rsweep
