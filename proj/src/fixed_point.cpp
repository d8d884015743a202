#include "rsweep/fixed_point.hpp"

#include <algorithm>
#include <cmath>

#include "rsweep/hinf.hpp"

namespace rsweep {

bool PerturbationFamily::admits(double delta) const {
    if (!(delta > admissible_min && delta < admissible_max)) return false;
    if (valid && !valid(delta)) return false;
    return true;
}

double margin_gap(const PerturbationFamily& family, double delta, double* norm_out,
                  double* peak_freq_out) {
    if (delta == 0.0) {
        if (norm_out) *norm_out = 0.0;
        if (peak_freq_out) *peak_freq_out = 0.0;
        return 0.0;
    }
    StateSpaceModel ss = family.realize(delta);
    HinfResult r = hinf_norm(ss);
    if (norm_out) *norm_out = r.norm;
    if (peak_freq_out) *peak_freq_out = r.peak_frequency;
    return std::abs(delta) * r.norm;
}

ScanResult delta_scan(const PerturbationFamily& family, const std::vector<double>& grid) {
    for (double d : grid)
        if (d == 0.0) throw std::invalid_argument("scan grid must exclude zero");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("scan grid must be sorted");

    ScanResult out;
    auto walk = [&](const std::vector<double>& branch, std::vector<Bracket>& brackets,
                    double& end) {
        bool have_prev = false;
        double prev = 0.0, prev_f = 0.0;
        end = 0.0;
        for (double d : branch) {
            if (!family.admits(d)) {
                have_prev = false;
                continue;
            }
            double f;
            try {
                f = margin_gap(family, d);
            } catch (const UnstableSystem&) {
                have_prev = false;
                continue;
            } catch (const InvalidDelta&) {
                have_prev = false;
                continue;
            } catch (const SingularResolvent&) {
                have_prev = false;
                continue;
            }
            end = d;
            if (have_prev && prev_f < 1.0 && f >= 1.0)
                brackets.push_back(Bracket{prev, d, prev_f, f});
            have_prev = true;
            prev = d;
            prev_f = f;
        }
    };

    // Branches ordered from zero outward.
    std::vector<double> pos, neg;
    for (double d : grid) (d > 0 ? pos : neg).push_back(d);
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end(), std::greater<>());  // -1e-3, -1e-2, ...

    walk(pos, out.positive, out.positive_end);
    walk(neg, out.negative, out.negative_end);
    out.no_intersection_positive = out.positive.empty();
    out.no_intersection_negative = out.negative.empty();
    return out;
}

namespace {

FixedPointEndpoint bisect_endpoint(const PerturbationFamily& family, double lo, double hi,
                                   double tol, FixedPointEndpoint out) {
    // margin_gap(lo) < 1 <= margin_gap(hi); lo and hi share a sign.
    for (int it = 0; it < 200 && std::abs(hi - lo) > tol * std::max(1.0, std::abs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        double f = margin_gap(family, mid);
        if (f < 1.0) lo = mid;
        else hi = mid;
    }
    double d = 0.5 * (lo + hi);
    double norm = 0, peak = 0;
    margin_gap(family, d, &norm, &peak);
    out.delta = d;
    out.norm = norm;
    out.peak_frequency = peak;
    double s = d >= 0 ? 1.0 : -1.0;
    out.residual = norm > 0 ? std::abs(d - s / norm) : std::numeric_limits<double>::infinity();
    out.converged = true;
    out.used_bisection = true;
    return out;
}

}  // namespace

FixedPointEndpoint fixed_point_iterate(const PerturbationFamily& family, double delta0,
                                       double bracket_lo, double bracket_hi, double tol,
                                       int max_iter) {
    FixedPointEndpoint out;
    double s = delta0 >= 0 ? 1.0 : -1.0;
    double lo = std::min(std::abs(bracket_lo), std::abs(bracket_hi));
    double hi = std::max(std::abs(bracket_lo), std::abs(bracket_hi));

    double d = delta0;
    double prev_diff = 0.0;
    int stalls = 0;
    for (int k = 0; k < max_iter; ++k) {
        double norm = 0, peak = 0;
        margin_gap(family, d, &norm, &peak);
        if (!(norm > 0)) {
            return bisect_endpoint(family, s * lo, s * hi, tol, out);
        }
        double next = s / norm;
        double diff = std::abs(next - d);
        double ratio = prev_diff > 0 ? diff / prev_diff : 0.0;
        out.trace.push_back(IterateStep{d, norm, ratio});
        if (diff <= tol * std::max(1.0, std::abs(d))) {
            // Keep the bracketed root: a contracting recursion may still have
            // drifted to a different fixed point.
            if (std::abs(next) < lo * (1 - 1e-3) || std::abs(next) > hi * (1 + 1e-3))
                return bisect_endpoint(family, s * lo, s * hi, tol, out);
            out.delta = next;
            double n2 = 0, p2 = 0;
            margin_gap(family, next, &n2, &p2);
            out.norm = n2;
            out.peak_frequency = p2;
            out.residual = n2 > 0 ? std::abs(next - s / n2) : 0.0;
            out.converged = true;
            return out;
        }
        // The bracket only localizes the crossing; give the recursion a longer
        // leash before declaring divergence.
        bool escaped = std::abs(next) < 0.25 * lo || std::abs(next) > 4.0 * hi;
        if (prev_diff > 0 && ratio >= 0.999) ++stalls;
        if (stalls >= 2 || escaped || !family.admits(next)) {
            return bisect_endpoint(family, s * lo, s * hi, tol, out);
        }
        prev_diff = diff;
        d = next;
    }
    // MaxIterExceeded: fall back to bisection, keeping the trace.
    return bisect_endpoint(family, s * lo, s * hi, tol, out);
}

FixedPointResult delta_bounds(const PerturbationFamily& family, const FixedPointConfig& config) {
    std::vector<double> grid;
    const int n = std::max(2, config.scan_points_per_branch);
    const double llo = std::log10(config.scan_min_abs);
    const double lhi = std::log10(config.scan_max_abs);
    for (int i = 0; i < n; ++i) {
        double mag = std::pow(10.0, llo + (lhi - llo) * i / (n - 1));
        grid.push_back(mag);
        grid.push_back(-mag);
    }
    std::sort(grid.begin(), grid.end());

    FixedPointResult out;
    out.scan = delta_scan(family, grid);

    auto settle = [&](const std::vector<Bracket>& brackets, bool no_hit, double end,
                      double sign) -> FixedPointEndpoint {
        if (no_hit) {
            FixedPointEndpoint ep;
            ep.range_limited = true;
            ep.converged = false;
            ep.delta = end != 0.0 ? end : sign * config.scan_max_abs;
            double norm = 0, peak = 0;
            try {
                margin_gap(family, ep.delta, &norm, &peak);
            } catch (...) {
            }
            ep.norm = norm;
            ep.peak_frequency = peak;
            ep.residual = norm > 0 ? std::abs(ep.delta - sign / norm)
                                   : std::numeric_limits<double>::infinity();
            return ep;
        }
        // Smallest-magnitude bracket wins when several fixed points exist.
        const Bracket& b = brackets.front();
        double d0 = 0.5 * (b.lo + b.hi);
        return fixed_point_iterate(family, d0, b.lo, b.hi, config.tol, config.max_iter);
    };

    out.upper = settle(out.scan.positive, out.scan.no_intersection_positive,
                       out.scan.positive_end, 1.0);
    out.lower = settle(out.scan.negative, out.scan.no_intersection_negative,
                       out.scan.negative_end, -1.0);
    out.mu_inf = out.upper.delta > 0 ? 1.0 / out.upper.delta
                                     : std::numeric_limits<double>::infinity();
    out.converged = out.upper.converged && out.lower.converged;
    return out;
}

}  // namespace rsweep
