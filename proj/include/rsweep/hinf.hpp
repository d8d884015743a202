#pragma once

#include "rsweep/state_space.hpp"
#include "rsweep/types.hpp"

namespace rsweep {

enum class HinfMethod { Bisection, Grid };

struct HinfResult {
    double norm = 0.0;
    double peak_frequency = 0.0;
    HinfMethod method = HinfMethod::Bisection;
    int iterations = 0;
    /// Set when imaginary-axis poles forced the grid fallback with exclusion
    /// windows instead of the Hamiltonian test.
    bool marginal_fallback = false;
};

/// H-infinity norm. Strictly Hurwitz systems use Hamiltonian bisection to the
/// given relative tolerance. Marginally stable systems are deflated when every
/// axis pole is blocked from the input-output path (PBH test at 1e-9),
/// otherwise evaluated on a grid with 1e-4 exclusion radii around the axis
/// poles and flagged. Throws UnstableSystem for open-RHP eigenvalues.
HinfResult hinf_norm(const StateSpaceModel& ss, double tol = 1e-6);

/// Plain supremum of sigma_max(T(iw)) over the supplied grid. Points with a
/// singular resolvent are skipped; at least one point must survive.
HinfResult hinf_norm_grid(const StateSpaceModel& ss, const FrequencyGrid& grid);

}  // namespace rsweep
