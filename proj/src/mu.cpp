#include "rsweep/mu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rsweep/parallel.hpp"

namespace rsweep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sigma_max(const ComplexMatrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    return M.jacobiSvd().singularValues()(0);
}

double sigma_min(const ComplexMatrix& M) {
    auto sv = M.jacobiSvd().singularValues();
    return sv(sv.size() - 1);
}

// M partitioned with the real uncertainty channels leading and the
// disturbance-to-error performance channel trailing.
struct MuProblem {
    ComplexMatrix M;
    int nr = 0;                      // total real channel width
    std::vector<int> channel_label;  // label index per real channel position
    int num_labels = 0;
    bool has_full = false;
    int pf_rows = 0, pf_cols = 0;  // Delta_f dims (disturbance x error)
    ComplexMatrix Mrr, Mrf, Mfr, Mff;
};

MuProblem build_problem(const ComplexMatrix& M, const BlockStructure& st) {
    st.validate_against(M);
    MuProblem P;
    P.M = M;
    auto labels = st.real_labels();
    P.num_labels = static_cast<int>(labels.size());
    for (const auto& b : st.blocks) {
        if (b.is_real()) {
            int li = static_cast<int>(std::find(labels.begin(), labels.end(), b.label) -
                                      labels.begin());
            for (int j = 0; j < b.rows; ++j) P.channel_label.push_back(li);
            P.nr += b.rows;
        } else {
            P.has_full = true;
            P.pf_rows = b.rows;
            P.pf_cols = b.cols;
        }
    }
    P.Mrr = M.topLeftCorner(P.nr, P.nr);
    P.Mrf = M.topRightCorner(P.nr, M.cols() - P.nr);
    P.Mfr = M.bottomLeftCorner(M.rows() - P.nr, P.nr);
    P.Mff = M.bottomRightCorner(M.rows() - P.nr, M.cols() - P.nr);
    return P;
}

ComplexVector real_diag(const MuProblem& P, const std::vector<double>& p) {
    ComplexVector d(P.nr);
    for (int i = 0; i < P.nr; ++i) d(i) = p[P.channel_label[i]];
    return d;
}

// sigma_max of the performance transfer after closing the real channels;
// +inf when the real loop is singular (destabilizing real slice).
double closed_sigma(const MuProblem& P, const std::vector<double>& p) {
    if (P.nr == 0) return sigma_max(P.Mff);
    ComplexVector d = real_diag(P, p);
    ComplexMatrix loop = ComplexMatrix::Identity(P.nr, P.nr) - P.Mrr * d.asDiagonal();
    Eigen::PartialPivLU<ComplexMatrix> lu(loop);
    if (!(lu.rcond() > 1e-14)) return kInf;
    ComplexMatrix T = P.Mff + P.Mfr * d.asDiagonal() * lu.solve(P.Mrf);
    return sigma_max(T);
}

double h_value(const MuProblem& P, const std::vector<double>& p) {
    double pmax = 0;
    for (double v : p) pmax = std::max(pmax, std::abs(v));
    double s = closed_sigma(P, p);
    double inv = s > 0 ? 1.0 / s : kInf;  // s == +inf means the real loop destabilizes
    return std::max(pmax, inv);
}

struct MixedSearchResult {
    double h_min = kInf;             // best ||Delta|| found
    std::vector<double> p;           // real parameters at the best point
    double sigma = 0.0;              // closed_sigma at the best point
    bool from_singularity = false;   // real loop alone destabilizes at p
    bool converged = true;
    double mu() const { return h_min > 0 && h_min < kInf ? 1.0 / h_min : 0.0; }
};

// Near-real eigenvalue candidates of the per-label sub-loop: values p_l with
// det(I - Mrr diag) = 0 along a single label axis.
std::vector<std::vector<double>> singularity_candidates(const MuProblem& P) {
    std::vector<std::vector<double>> out;
    if (P.nr == 0) return out;
    for (int l = 0; l < P.num_labels; ++l) {
        std::vector<int> idx;
        for (int i = 0; i < P.nr; ++i)
            if (P.channel_label[i] == l) idx.push_back(i);
        ComplexMatrix B(idx.size(), idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < idx.size(); ++c) B(r, c) = P.Mrr(idx[r], idx[c]);
        Eigen::ComplexEigenSolver<ComplexMatrix> es(B, false);
        double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            Complex lam = es.eigenvalues()(k);
            if (std::abs(lam.imag()) > 1e-7 * scale) continue;
            if (std::abs(lam.real()) < 1e-14) continue;
            std::vector<double> p(P.num_labels, 0.0);
            p[l] = 1.0 / lam.real();
            // Accept only when the full real loop is genuinely singular there.
            ComplexVector d = real_diag(P, p);
            ComplexMatrix loop = ComplexMatrix::Identity(P.nr, P.nr) - P.Mrr * d.asDiagonal();
            double smax = sigma_max(loop);
            if (sigma_min(loop) <= 1e-8 * std::max(1.0, smax)) out.push_back(std::move(p));
        }
    }
    return out;
}

// Greedy compass polish of h around p0; directions include diagonals for two
// labels. Deterministic.
void compass_polish(const MuProblem& P, std::vector<double>& p, double& h, double step0,
                    double rel_floor = 1e-12, int eval_cap = 6000) {
    const int L = P.num_labels;
    std::vector<std::vector<double>> dirs;
    for (int l = 0; l < L; ++l) {
        std::vector<double> d(L, 0.0);
        d[l] = 1.0;
        dirs.push_back(d);
        d[l] = -1.0;
        dirs.push_back(d);
    }
    if (L == 2) {
        dirs.push_back({M_SQRT1_2, M_SQRT1_2});
        dirs.push_back({-M_SQRT1_2, -M_SQRT1_2});
        dirs.push_back({M_SQRT1_2, -M_SQRT1_2});
        dirs.push_back({-M_SQRT1_2, M_SQRT1_2});
    }
    double step = step0;
    const double floor_step = rel_floor * std::max(1.0, step0);
    int evals = 0;
    while (step > floor_step && evals < eval_cap) {
        bool improved = false;
        for (const auto& d : dirs) {
            std::vector<double> q = p;
            for (int l = 0; l < L; ++l) q[l] += step * d[l];
            double hq = h_value(P, q);
            ++evals;
            if (hq < h) {
                p = std::move(q);
                h = hq;
                improved = true;
                break;
            }
        }
        if (!improved) step *= 0.5;
    }
}

MixedSearchResult mixed_search(const MuProblem& P, int axis_points, int plane_points,
                               const std::vector<std::vector<double>>& extra_starts) {
    MixedSearchResult best;
    const int L = P.num_labels;
    if (L == 0) {
        best.h_min = [&] {
            double s = sigma_max(P.Mff);
            return s > 0 ? 1.0 / s : kInf;
        }();
        best.p = {};
        best.sigma = sigma_max(P.Mff);
        return best;
    }

    auto consider = [&](const std::vector<double>& p) {
        double h = h_value(P, p);
        if (h < best.h_min) {
            best.h_min = h;
            best.p = p;
        }
    };

    consider(std::vector<double>(L, 0.0));
    // Wide log probes seed the search range even when Mff vanishes.
    for (int l = 0; l < L; ++l) {
        for (int sgn : {-1, 1}) {
            for (int k = 0; k <= 36; ++k) {
                std::vector<double> p(L, 0.0);
                p[l] = sgn * std::pow(10.0, -6.0 + k * (12.0 / 36.0));
                consider(p);
            }
        }
    }
    for (const auto& p : singularity_candidates(P)) consider(p);

    if (!std::isfinite(best.h_min)) {
        // No admissible perturbation closes the loop: mu is zero.
        best.h_min = kInf;
        best.p.assign(L, 0.0);
        best.sigma = 0.0;
        return best;
    }

    // Focused grids: the optimum satisfies |p|_inf <= h_min.
    double R = best.h_min * 1.0000001;
    std::vector<double> axis_values{0.0};
    int side = std::max(8, axis_points);
    for (int sgn : {-1, 1}) {
        for (int k = 0; k < side; ++k) {
            double mag = R * std::pow(10.0, -4.0 * (side - 1 - k) / (side - 1));
            axis_values.push_back(sgn * mag);
            axis_values.push_back(sgn * R * (k + 1) / side);
        }
    }
    std::sort(axis_values.begin(), axis_values.end());
    axis_values.erase(std::unique(axis_values.begin(), axis_values.end()), axis_values.end());

    std::vector<std::pair<double, std::vector<double>>> pool;
    auto consider_pooled = [&](const std::vector<double>& p) {
        double h = h_value(P, p);
        pool.emplace_back(h, p);
        if (h < best.h_min) {
            best.h_min = h;
            best.p = p;
        }
    };

    const bool big = P.M.rows() * P.M.cols() > 64;
    if (L == 1) {
        for (double v : axis_values) consider_pooled({v});
    } else if (L == 2) {
        std::vector<double> plane_values{0.0};
        int pp = std::max(6, big ? plane_points / 2 : plane_points);
        for (int sgn : {-1, 1})
            for (int k = 0; k < pp; ++k) {
                plane_values.push_back(sgn * R * std::pow(10.0, -3.0 * (pp - 1 - k) / (pp - 1)));
                plane_values.push_back(sgn * R * (k + 1) / pp);
            }
        std::sort(plane_values.begin(), plane_values.end());
        plane_values.erase(std::unique(plane_values.begin(), plane_values.end()),
                           plane_values.end());
        for (double a : plane_values)
            for (double b : plane_values) consider_pooled({a, b});
        // Tied diagonal rays catch corner optima where both parameters bind.
        for (double v : axis_values) {
            consider_pooled({v, v});
            consider_pooled({v, -v});
        }
        // Fixed-seed scatter starts cover oblique basins the grid misses.
        std::mt19937_64 rng(0x2D5EEDull);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        for (int k = 0; k < (big ? 24 : 48); ++k)
            consider_pooled({R * uni(rng), R * uni(rng)});
    } else {
        // Three or more labels: axis grids plus random-direction rays.
        for (int l = 0; l < L; ++l)
            for (double v : axis_values) {
                std::vector<double> p(L, 0.0);
                p[l] = v;
                consider_pooled(p);
            }
        std::mt19937_64 rng(12345);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        for (int k = 0; k < 64 * L; ++k) {
            std::vector<double> p(L);
            for (int l = 0; l < L; ++l) p[l] = R * uni(rng);
            consider_pooled(p);
        }
    }
    for (const auto& p : extra_starts) consider_pooled(p);

    std::sort(pool.begin(), pool.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // Costly evaluations (wide sweep interconnections) get a trimmed polish;
    // the quantitative single-label checks all run on small matrices where
    // the full budget stays in place.
    const double floor_rel = big ? 1e-9 : 1e-12;
    const int cap = big ? 1500 : 6000;
    int starts = static_cast<int>(
        std::min<std::size_t>(L >= 2 ? (big ? 8 : 12) : 6, pool.size()));
    std::vector<double> p_best = best.p;
    double h_best = best.h_min;
    for (int k = 0; k < starts; ++k) {
        auto p = pool[k].second;
        double h = pool[k].first;
        if (!std::isfinite(h)) continue;
        compass_polish(P, p, h, std::max(R / 8, 1e-8), floor_rel, cap);
        if (h < h_best) {
            h_best = h;
            p_best = p;
        }
    }
    // Corner optima on the tied rays p1 = +/-p2 are one-dimensional kinks;
    // refine each ray directly.
    if (L == 2 && std::isfinite(h_best)) {
        for (double sgn2 : {1.0, -1.0}) {
            auto ray_h = [&](double v) { return h_value(P, {v, sgn2 * v}); };
            const int nray = 129;
            double Rr = h_best * 1.02;
            std::vector<double> rv(nray), rh(nray);
            for (int i = 0; i < nray; ++i) {
                rv[i] = -Rr + 2 * Rr * i / (nray - 1);
                rh[i] = ray_h(rv[i]);
            }
            for (int i = 1; i + 1 < nray; ++i) {
                if (!(rh[i] <= rh[i - 1] && rh[i] <= rh[i + 1])) continue;
                double a = rv[i - 1], b = rv[i + 1];
                for (int it = 0; it < 90; ++it) {
                    double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
                    if (ray_h(m1) < ray_h(m2)) b = m2;
                    else a = m1;
                }
                double v = 0.5 * (a + b);
                double h = ray_h(v);
                if (h < h_best) {
                    h_best = h;
                    p_best = {v, sgn2 * v};
                }
            }
        }
    }

    // Second stage for two labels: once the scale is known, a dense linear
    // grid on the |p|_inf <= h box plus a polish round resolves basins the
    // coarse first pass steps over.
    if (L == 2 && std::isfinite(h_best)) {
        double rb = h_best * 1.02;
        const int nb = big ? 33 : 61;
        std::vector<std::pair<double, std::vector<double>>> stage2;
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j) {
                std::vector<double> q{-rb + 2 * rb * i / (nb - 1), -rb + 2 * rb * j / (nb - 1)};
                stage2.emplace_back(h_value(P, q), q);
            }
        std::sort(stage2.begin(), stage2.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 0; k < std::min<std::size_t>(6, stage2.size()); ++k) {
            auto [h, p] = stage2[k];
            if (!std::isfinite(h)) continue;
            compass_polish(P, p, h, 4 * rb / nb, floor_rel, cap);
            if (h < h_best) {
                h_best = h;
                p_best = p;
            }
        }
    }
    // Fresh-step restart walks past corner stalls of the pattern search.
    if (std::isfinite(h_best)) {
        compass_polish(P, p_best, h_best, std::max(R / 64, 1e-8), floor_rel, cap);
        compass_polish(P, p_best, h_best, 1e-4 * std::max(1.0, h_best), floor_rel, cap);
    }
    best.h_min = h_best;
    best.p = p_best;
    best.sigma = closed_sigma(P, best.p);
    best.from_singularity = !std::isfinite(best.sigma);
    return best;
}

// Real-mu for structures without a performance block: the smallest real
// parameter vector that makes the uncertainty loop singular.
struct RealMuResult {
    double mu = 0.0;
    std::vector<double> p;
};

RealMuResult real_mu_no_perf(const MuProblem& P) {
    RealMuResult best;
    best.p.assign(P.num_labels, 0.0);
    auto offer = [&](const std::vector<double>& p) {
        double pmax = 0;
        for (double v : p) pmax = std::max(pmax, std::abs(v));
        if (pmax > 0 && 1.0 / pmax > best.mu) {
            best.mu = 1.0 / pmax;
            best.p = p;
        }
    };
    for (const auto& p : singularity_candidates(P)) offer(p);
    if (P.num_labels == 2) {
        // Sweep one label, solve the other from the pencil eigenvalues.
        for (int sweep = 0; sweep < 2; ++sweep) {
            int fixed = sweep, solved = 1 - sweep;
            double r = 2.0 * std::max(1.0, sigma_max(P.Mrr));
            if (best.mu > 0) r = std::min(r, 4.0 / best.mu);
            ComplexMatrix A1 = ComplexMatrix::Zero(P.nr, P.nr);
            ComplexMatrix A2 = ComplexMatrix::Zero(P.nr, P.nr);
            for (int c = 0; c < P.nr; ++c) {
                if (P.channel_label[c] == fixed) A1.col(c) = P.Mrr.col(c);
                else A2.col(c) = P.Mrr.col(c);
            }
            for (int sgn : {-1, 1})
                for (int k = 0; k <= 160; ++k) {
                    double pf = sgn * r * k / 160.0;
                    ComplexMatrix base =
                        ComplexMatrix::Identity(P.nr, P.nr) - pf * A1;
                    Eigen::PartialPivLU<ComplexMatrix> lu(base);
                    if (!(lu.rcond() > 1e-12)) continue;
                    ComplexMatrix W = lu.solve(A2);
                    Eigen::ComplexEigenSolver<ComplexMatrix> es(W, false);
                    double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
                    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                        Complex lam = es.eigenvalues()(i);
                        if (std::abs(lam.imag()) > 1e-7 * scale) continue;
                        if (std::abs(lam.real()) < 1e-14) continue;
                        std::vector<double> p(2, 0.0);
                        p[fixed] = pf;
                        p[solved] = 1.0 / lam.real();
                        offer(p);
                    }
                }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Complex-relaxation upper bound via tied diagonal scalings
// ---------------------------------------------------------------------------

struct ScalingGroups {
    // Group g ties rows[g] of M (scaled by t) to cols[g] (scaled by 1/t).
    std::vector<std::vector<int>> rows, cols;
    int gauge = -1;  // full-block group, fixed to t = 1
};

ScalingGroups build_groups(const BlockStructure& st) {
    ScalingGroups G;
    int r = 0;  // row cursor over M = position in delta_cols
    int c = 0;  // col cursor over M = position in delta_rows
    for (const auto& b : st.blocks) {
        if (b.is_real()) {
            for (int j = 0; j < b.rows; ++j) {
                G.rows.push_back({r + j});
                G.cols.push_back({c + j});
            }
        } else {
            std::vector<int> rr(b.cols), cc(b.rows);
            for (int j = 0; j < b.cols; ++j) rr[j] = r + j;
            for (int j = 0; j < b.rows; ++j) cc[j] = c + j;
            G.rows.push_back(rr);
            G.cols.push_back(cc);
            G.gauge = static_cast<int>(G.rows.size()) - 1;
        }
        r += b.cols;
        c += b.rows;
    }
    return G;
}

double scaled_sigma(const ComplexMatrix& M, const ScalingGroups& G,
                    const std::vector<double>& logt, Vector* dl_out, Vector* dr_out) {
    Vector dl = Vector::Ones(M.rows());
    Vector dr = Vector::Ones(M.cols());
    for (std::size_t g = 0; g < G.rows.size(); ++g) {
        double t = std::exp(logt[g]);
        for (int r : G.rows[g]) dl(r) = t;
        for (int c : G.cols[g]) dr(c) = 1.0 / t;
    }
    if (dl_out) *dl_out = dl;
    if (dr_out) *dr_out = dr;
    return sigma_max(dl.asDiagonal() * M * dr.asDiagonal());
}

double dscaling_upper(const ComplexMatrix& M, const BlockStructure& st, Vector* dl_out,
                      Vector* dr_out) {
    ScalingGroups G = build_groups(st);
    std::size_t ng = G.rows.size();
    std::vector<double> logt(ng, 0.0);

    // Descent moves: single coordinates, each repeated block jointly, and all
    // non-gauge groups jointly. The joint moves step past the flats of the
    // max-type objective that stall pure coordinate descent.
    std::vector<std::vector<std::size_t>> moves;
    for (std::size_t g = 0; g < ng; ++g)
        if (static_cast<int>(g) != G.gauge) moves.push_back({g});
    {
        std::vector<std::size_t> all;
        std::size_t g = 0;
        for (const auto& b : st.blocks) {
            if (b.is_real()) {
                std::vector<std::size_t> blockset;
                for (int j = 0; j < b.rows; ++j) blockset.push_back(g + j);
                if (blockset.size() > 1) moves.push_back(blockset);
                all.insert(all.end(), blockset.begin(), blockset.end());
                g += b.rows;
            } else {
                g += 1;
            }
        }
        if (all.size() > 1 && moves.size() > 1) moves.push_back(all);
    }

    // Osborne-style balancing of |M| for the initial scaling.
    for (int sweep = 0; sweep < 10; ++sweep) {
        for (std::size_t g = 0; g < ng; ++g) {
            if (static_cast<int>(g) == G.gauge) continue;
            double rn = 0, cn = 0;
            for (int r : G.rows[g]) rn += (std::exp(logt[g]) * M.row(r)).squaredNorm();
            for (int c : G.cols[g]) cn += (M.col(c) / std::exp(logt[g])).squaredNorm();
            if (rn > 0 && cn > 0) logt[g] += 0.25 * std::log(cn / rn);
        }
    }

    double cur = scaled_sigma(M, G, logt, nullptr, nullptr);
    for (int iter = 0; iter < 200; ++iter) {
        double before = cur;
        for (const auto& mv : moves) {
            // Golden-section on a common shift of log t over the move set.
            auto eval = [&](double shift) {
                std::vector<double> lt = logt;
                for (std::size_t g : mv) lt[g] += shift;
                return scaled_sigma(M, G, lt, nullptr, nullptr);
            };
            double a = -1.5, b = 1.5;
            const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = eval(x1), f2 = eval(x2);
            for (int it = 0; it < 28; ++it) {
                if (f1 < f2) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - gr * (b - a);
                    f1 = eval(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + gr * (b - a);
                    f2 = eval(x2);
                }
            }
            double v = 0.5 * (a + b);
            double fv = eval(v);
            if (fv < cur) {
                for (std::size_t g : mv) logt[g] += v;
                cur = fv;
            }
        }
        if (before - cur <= 1e-6 * std::max(1.0, before)) break;
    }
    return scaled_sigma(M, G, logt, dl_out, dr_out);
}

}  // namespace

double MuUpperResult::certificate_value(const ComplexMatrix& M) const {
    if (d_left.size() != M.rows() || d_right.size() != M.cols()) return 0.0;
    return (d_left.asDiagonal() * M * d_right.asDiagonal()).jacobiSvd().singularValues()(0);
}

MuUpperResult mu_upper(const ComplexMatrix& M, const BlockStructure& structure, MuMode mode) {
    MuProblem P = build_problem(M, structure);
    MuUpperResult res;

    bool pure_full = (P.nr == 0) && P.has_full;
    if (pure_full) {
        res.upper = sigma_max(M);
        res.d_left = Vector::Ones(M.rows());
        res.d_right = Vector::Ones(M.cols());
        res.mode_used = mode;
        return res;
    }

    if (mode == MuMode::ComplexRelaxation) {
        res.upper = dscaling_upper(M, structure, &res.d_left, &res.d_right);
        res.mode_used = MuMode::ComplexRelaxation;
        return res;
    }

    if (!P.has_full) {
        res.upper = real_mu_no_perf(P).mu;
        res.mode_used = MuMode::Mixed;
        res.d_left = Vector::Ones(M.rows());
        res.d_right = Vector::Ones(M.cols());
        return res;
    }

    MixedSearchResult est = mixed_search(P, 40, 14, {});
    if (!est.converged) {
        res.upper = dscaling_upper(M, structure, &res.d_left, &res.d_right);
        res.mode_used = MuMode::ComplexRelaxation;
        res.mixed_converged = false;
        return res;
    }
    res.upper = est.mu();
    res.mode_used = MuMode::Mixed;
    res.d_left = Vector::Ones(M.rows());
    res.d_right = Vector::Ones(M.cols());
    return res;
}

MuLowerResult mu_lower(const ComplexMatrix& M, const BlockStructure& structure, int restarts,
                       std::uint64_t seed) {
    MuProblem P = build_problem(M, structure);
    MuLowerResult res;

    if (P.nr == 0 && P.has_full) {
        // Dominant singular pair via power iteration on M^H M, with an SVD
        // backstop when the iteration cycles.
        ComplexVector v = ComplexVector::Ones(M.cols()).normalized();
        double s = 0;
        for (int it = 0; it < 500; ++it) {
            ComplexVector w = M * v;
            double ns = w.norm();
            if (ns == 0) break;
            ComplexVector v2 = (M.adjoint() * w).normalized();
            double drift = (v2 - v).norm();
            v = v2;
            s = ns;
            if (drift < 1e-13) break;
        }
        Eigen::JacobiSVD<ComplexMatrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        res.lower = std::max(s, svd.singularValues()(0));
        if (res.lower > 0) {
            res.destabilizing =
                (1.0 / res.lower) * svd.matrixV().col(0) * svd.matrixU().col(0).adjoint();
        } else {
            res.destabilizing = ComplexMatrix::Zero(M.cols(), M.rows());
        }
        return res;
    }

    if (!P.has_full) {
        RealMuResult rm = real_mu_no_perf(P);
        res.lower = rm.mu;
        res.destabilizing = rm.mu > 0 ? structure.assemble(rm.p, nullptr)
                                      : ComplexMatrix::Zero(M.cols(), M.rows());
        return res;
    }

    MixedSearchResult best = mixed_search(P, 40, 14, {});
    double R = best.h_min < kInf && best.h_min > 0 ? best.h_min : 1.0;
    const bool big = P.M.rows() * P.M.cols() > 64;
    const double floor_rel = big ? 1e-9 : 1e-12;
    const int cap = big ? 1500 : 6000;
    for (int r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(derive_seed(seed, 0, static_cast<std::uint64_t>(r)));
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        std::vector<double> p(P.num_labels);
        for (int l = 0; l < P.num_labels; ++l) p[l] = R * uni(rng);
        double h = h_value(P, p);
        if (!std::isfinite(h)) continue;
        compass_polish(P, p, h, std::max(R / 8, 1e-8), floor_rel, cap);
        if (h < best.h_min) {
            best.h_min = h;
            best.p = p;
            best.sigma = closed_sigma(P, p);
            best.from_singularity = !std::isfinite(best.sigma);
        }
    }

    if (!(best.h_min < kInf)) {
        res.lower = 0.0;
        res.destabilizing = ComplexMatrix::Zero(M.cols(), M.rows());
        return res;
    }

    res.lower = best.mu();
    ComplexMatrix Df;
    if (best.from_singularity || !std::isfinite(best.sigma) || best.sigma <= 0) {
        Df = ComplexMatrix::Zero(P.pf_rows, P.pf_cols);
    } else {
        ComplexVector d = real_diag(P, best.p);
        ComplexMatrix loop = ComplexMatrix::Identity(P.nr, P.nr) - P.Mrr * d.asDiagonal();
        ComplexMatrix T = P.Mff + P.Mfr * d.asDiagonal() *
                                       Eigen::PartialPivLU<ComplexMatrix>(loop).solve(P.Mrf);
        Eigen::JacobiSVD<ComplexMatrix> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
        double s1 = svd.singularValues()(0);
        Df = (1.0 / s1) * svd.matrixV().col(0) * svd.matrixU().col(0).adjoint();
    }
    res.destabilizing = structure.assemble(best.p, &Df);
    return res;
}

MuSweepResult mu_sweep(const Interconnection& G, const FrequencyGrid& grid, MuMode mode,
                       std::uint64_t seed) {
    MuSweepResult out;
    out.points.resize(grid.points.size());
    parallel_for_index(grid.points.size(), [&](std::size_t i) {
        MuBounds b;
        b.omega = grid.points[i];
        try {
            ComplexMatrix M = G.eval(Complex(0.0, b.omega));
            MuUpperResult up = mu_upper(M, G.structure, mode);
            MuLowerResult lo = mu_lower(M, G.structure, 8,
                                        derive_seed(seed ^ 0x5350u,
                                                    static_cast<std::uint64_t>(i), 0));
            b.upper = std::max(up.upper, lo.lower);
            b.lower = lo.lower;
            b.d_scaling = up.d_left;
            if (lo.lower > 0) b.destabilizing = lo.destabilizing;
            b.lower_converged = lo.converged;
        } catch (const SingularResolvent&) {
            b.skipped = true;
        }
        out.points[i] = std::move(b);
    });
    out.peak_upper = 0.0;
    out.peak_omega = grid.points.empty() ? 0.0 : grid.points.front();
    for (const auto& b : out.points) {
        if (b.skipped) continue;
        if (b.upper > out.peak_upper) {
            out.peak_upper = b.upper;
            out.peak_omega = b.omega;
        }
    }
    return out;
}

}  // namespace rsweep
