#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rsweep/interconnection.hpp"
#include "rsweep/state_space.hpp"
#include "rsweep/types.hpp"

namespace rsweep {

enum class MuMode { ComplexRelaxation, Mixed };

struct MuUpperResult {
    double upper = 0.0;
    Vector d_left;   // diagonal scaling certificate, row side of M
    Vector d_right;  // diagonal scaling certificate, column side of M
    MuMode mode_used = MuMode::ComplexRelaxation;
    bool mixed_converged = true;

    /// sigma_max(diag(d_left) M diag(d_right)^-1); equals `upper` in
    /// complex-relaxation mode.
    double certificate_value(const ComplexMatrix& M) const;
};

/// Upper bound on mu over the given block structure. Complex relaxation uses
/// balanced diagonal scalings refined by coordinate descent; mixed mode keeps
/// the repeated scalar blocks real and tightens the bound by searching the
/// real parameter slice, never exceeding the complex value.
MuUpperResult mu_upper(const ComplexMatrix& M, const BlockStructure& structure,
                       MuMode mode = MuMode::Mixed);

struct MuLowerResult {
    double lower = 0.0;
    ComplexMatrix destabilizing;  // block-diagonal, det(I - M Delta) ~ 0
    bool converged = true;
};

/// Best-effort lower bound with a destabilizing certificate, deterministic
/// for a fixed seed.
MuLowerResult mu_lower(const ComplexMatrix& M, const BlockStructure& structure,
                       int restarts = 8, std::uint64_t seed = 0);

struct MuBounds {
    double omega = 0.0;
    double upper = 0.0;
    double lower = 0.0;
    Vector d_scaling;  // complex-bound certificate (left side)
    std::optional<ComplexMatrix> destabilizing;
    bool lower_converged = true;
    bool skipped = false;  // resolvent singular at this grid point
};

struct MuSweepResult {
    std::vector<MuBounds> points;  // grid order
    double peak_omega = 0.0;       // smallest omega among equal peaks
    double peak_upper = 0.0;
};

/// Per-frequency bounds over the grid. Points where the resolvent is singular
/// are recorded as skipped, not fatal. Restart seeds derive from (seed, grid
/// index, restart index) so threaded and serial runs agree bit-for-bit.
MuSweepResult mu_sweep(const Interconnection& G, const FrequencyGrid& grid,
                       MuMode mode = MuMode::Mixed, std::uint64_t seed = 0);

}  // namespace rsweep
