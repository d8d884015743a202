#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "rsweep/state_space.hpp"
#include "rsweep/types.hpp"

namespace rsweep {

/// Map from a scalar uncertainty magnitude to the error system it induces.
/// realize(0) must have identically zero transfer. admissible_* bound the open
/// interval on which the error system is defined and stable enough to carry
/// an L2 gain; valid() may exclude isolated degenerate points.
struct PerturbationFamily {
    std::function<StateSpaceModel(double)> realize;
    double admissible_min = -std::numeric_limits<double>::infinity();
    double admissible_max = std::numeric_limits<double>::infinity();
    std::function<bool(double)> valid;  // optional point exclusions
    std::string label;

    bool admits(double delta) const;
};

/// Evaluates |delta| * ||T(delta)||_inf; the margin condition of the
/// fixed-point method is f < 1.
double margin_gap(const PerturbationFamily& family, double delta, double* norm_out = nullptr,
                  double* peak_freq_out = nullptr);

struct Bracket {
    double lo = 0.0, hi = 0.0;  // f(lo) < 1 <= f(hi), same sign deltas
    double f_lo = 0.0, f_hi = 0.0;
};

struct ScanResult {
    std::vector<Bracket> positive;
    std::vector<Bracket> negative;
    /// No sign change on a branch: the margin condition held on the whole
    /// scanned range and the branch endpoint is only a range bound.
    bool no_intersection_positive = false;
    bool no_intersection_negative = false;
    double positive_end = 0.0;  // last admissible scanned delta per branch
    double negative_end = 0.0;
};

/// Locates all sign-change brackets of f(delta) = |delta|*||T(delta)||_inf - 1
/// on the positive and negative branches of the sorted, zero-free grid.
ScanResult delta_scan(const PerturbationFamily& family, const std::vector<double>& grid);

struct IterateStep {
    double delta = 0.0;
    double norm = 0.0;
    double contraction_ratio = 0.0;  // |d_{k+2}-d_{k+1}| / |d_{k+1}-d_k|
};

struct FixedPointEndpoint {
    double delta = 0.0;
    double norm = 0.0;               // ||T(delta)||_inf at the endpoint
    double residual = 0.0;           // |delta - 1/||T(delta)||_inf|
    double peak_frequency = 0.0;
    std::vector<IterateStep> trace;
    bool converged = false;
    bool used_bisection = false;     // recursion failed to contract
    bool range_limited = false;      // endpoint is an admissibility bound
};

/// Runs the recursion delta <- sign(delta0)/||T(delta)||_inf from delta0.
/// When the iteration fails to contract, falls back to bisection on the
/// margin gap inside [bracket_lo, bracket_hi].
FixedPointEndpoint fixed_point_iterate(const PerturbationFamily& family, double delta0,
                                       double bracket_lo, double bracket_hi,
                                       double tol = 1e-6, int max_iter = 80);

struct FixedPointConfig {
    int scan_points_per_branch = 200;
    double scan_min_abs = 1e-3;
    double scan_max_abs = 10.0;
    double tol = 1e-6;
    int max_iter = 80;
};

struct FixedPointResult {
    FixedPointEndpoint upper;  // delta_max branch
    FixedPointEndpoint lower;  // delta_min branch
    ScanResult scan;
    double mu_inf = 0.0;  // 1/delta_max
    bool converged = false;

    double delta_max() const { return upper.delta; }
    double delta_min() const { return lower.delta; }
};

/// Scan plus iterate on both branches; with several fixed points on a branch
/// the one of smallest magnitude wins. Branches with no intersection report
/// the admissible-range endpoint, flagged range_limited.
FixedPointResult delta_bounds(const PerturbationFamily& family,
                              const FixedPointConfig& config = {});

}  // namespace rsweep
