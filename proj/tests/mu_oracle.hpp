#pragma once

// Brute-force structured-singular-value oracle used only by tests. It
// evaluates the defining minimization directly: sample the real parameters on
// dense grids, close the performance channel with the smallest full block
// from the SVD, verify each candidate by the determinant condition, and keep
// the best 1/||Delta||. Independent of the library's mu implementation.

#include <vector>

#include "rsweep/interconnection.hpp"
#include "rsweep/types.hpp"
#include "test_util.hpp"

namespace rsweep::testutil {

struct OracleParts {
    ComplexMatrix Mrr, Mrf, Mfr, Mff;
    std::vector<int> label_of;  // per real channel
    int L = 0;
    int nr = 0;
    bool has_full = false;
    int f_rows = 0, f_cols = 0;
};

inline OracleParts oracle_split(const ComplexMatrix& M, const BlockStructure& st) {
    OracleParts P;
    std::vector<std::string> labels;
    for (const auto& b : st.blocks) {
        if (b.kind == Block::Kind::RepeatedRealScalar) {
            auto it = std::find(labels.begin(), labels.end(), b.label);
            int li;
            if (it == labels.end()) {
                labels.push_back(b.label);
                li = static_cast<int>(labels.size()) - 1;
            } else {
                li = static_cast<int>(it - labels.begin());
            }
            for (int j = 0; j < b.rows; ++j) P.label_of.push_back(li);
            P.nr += b.rows;
        } else {
            P.has_full = true;
            P.f_rows = b.rows;
            P.f_cols = b.cols;
        }
    }
    P.L = labels.empty() ? 0 : static_cast<int>(labels.size());
    P.Mrr = M.topLeftCorner(P.nr, P.nr);
    P.Mrf = M.topRightCorner(P.nr, M.cols() - P.nr);
    P.Mfr = M.bottomLeftCorner(M.rows() - P.nr, P.nr);
    P.Mff = M.bottomRightCorner(M.rows() - P.nr, M.cols() - P.nr);
    return P;
}

// ||Delta|| of the best admissible closure at fixed real parameters, or an
// infinite value when no closure exists there.
inline double oracle_h(const OracleParts& P, const std::vector<double>& p) {
    double pmax = 0;
    for (double v : p) pmax = std::max(pmax, std::abs(v));
    ComplexMatrix D = ComplexMatrix::Zero(P.nr, P.nr);
    for (int i = 0; i < P.nr; ++i) D(i, i) = p[P.label_of[i]];
    ComplexMatrix loop = ComplexMatrix::Identity(P.nr, P.nr) - P.Mrr * D;
    double smin = P.nr > 0 ? sigma_min(loop) : 1.0;
    double smax = P.nr > 0 ? sigma_max(loop) : 1.0;
    if (smin <= 1e-12 * std::max(1.0, smax)) return pmax;  // real loop destabilizes
    if (!P.has_full) return std::numeric_limits<double>::infinity();
    ComplexMatrix T = P.Mff + P.Mfr * D * loop.partialPivLu().solve(P.Mrf);
    double s = sigma_max(T);
    if (!(s > 0)) return std::numeric_limits<double>::infinity();
    return std::max(pmax, 1.0 / s);
}

// Pure-real structures need exact loop singularities: refine sigma_min of the
// loop to machine level along dense axis segments.
inline double oracle_real_only(const OracleParts& P, double r) {
    auto loop_smin = [&](const std::vector<double>& p) {
        ComplexMatrix D = ComplexMatrix::Zero(P.nr, P.nr);
        for (int i = 0; i < P.nr; ++i) D(i, i) = p[P.label_of[i]];
        ComplexMatrix loop = ComplexMatrix::Identity(P.nr, P.nr) - P.Mrr * D;
        return sigma_min(loop) / std::max(1.0, sigma_max(loop));
    };
    double best = std::numeric_limits<double>::infinity();
    const int n = 2001;
    for (int l = 0; l < P.L; ++l) {
        auto at = [&](double v) {
            std::vector<double> p(P.L, 0.0);
            p[l] = v;
            return loop_smin(p);
        };
        std::vector<double> f(n);
        for (int i = 0; i < n; ++i) f[i] = at(-r + 2.0 * r * i / (n - 1));
        for (int i = 1; i + 1 < n; ++i) {
            if (!(f[i] <= f[i - 1] && f[i] <= f[i + 1])) continue;
            double a = -r + 2.0 * r * (i - 1) / (n - 1);
            double b = -r + 2.0 * r * (i + 1) / (n - 1);
            for (int it = 0; it < 90; ++it) {
                double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
                if (at(m1) < at(m2)) b = m2;
                else a = m1;
            }
            double vm = 0.5 * (a + b);
            if (at(vm) <= 1e-9 && std::abs(vm) > 1e-12) best = std::min(best, std::abs(vm));
        }
    }
    return std::isfinite(best) ? 1.0 / best : 0.0;
}

inline double mu_oracle(const ComplexMatrix& M, const BlockStructure& st, double radius = 0.0,
                        int points = 401) {
    OracleParts P = oracle_split(M, st);
    if (P.nr == 0) return P.has_full ? sigma_max(M) : 0.0;

    double r = radius > 0 ? radius : 4.0 * (1.0 + sigma_max(M));
    if (!P.has_full) return oracle_real_only(P, r);

    auto axis = [&](int n) {
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(-r + 2.0 * r * i / (n - 1));
        for (int s : {-1, 1})
            for (int k = 0; k <= 40; ++k) v.push_back(s * r * std::pow(10.0, -6.0 * k / 40.0));
        v.push_back(0.0);
        std::sort(v.begin(), v.end());
        return v;
    };

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, std::vector<double>>> cands;
    auto offer = [&](const std::vector<double>& p) {
        double h = oracle_h(P, p);
        cands.emplace_back(h, p);
        best = std::min(best, h);
    };

    std::vector<double> g = axis(points);
    if (P.L == 1) {
        for (double a : g) offer({a});
    } else if (P.L == 2) {
        std::vector<double> g2 = axis(std::max(31, points / 8));
        for (double a : g2)
            for (double b : g2) offer({a, b});
        std::mt19937_64 scatter(0xBADC0FFEull);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        for (int k = 0; k < 200; ++k) offer({r * uni(scatter), r * uni(scatter)});
    } else {
        for (int l = 0; l < P.L; ++l)
            for (double a : g) {
                std::vector<double> p(P.L, 0.0);
                p[l] = a;
                offer(p);
            }
    }

    // Densify locally around the strongest candidates. Search directions
    // include the diagonals so kinks of ||Delta|| along oblique valleys are
    // resolved as well.
    std::vector<std::vector<double>> dirs;
    for (int l = 0; l < P.L; ++l)
        for (int s : {-1, 1}) {
            std::vector<double> d(P.L, 0.0);
            d[l] = s;
            dirs.push_back(d);
        }
    if (P.L == 2)
        for (int s1 : {-1, 1})
            for (int s2 : {-1, 1}) dirs.push_back({s1 * M_SQRT1_2, s2 * M_SQRT1_2});

    // Focused second pass: the optimum satisfies |p|_inf <= best h, so a
    // dense linear grid on that box resolves the competitive region.
    for (auto& [h0, p0] : cands)
        if (std::isfinite(h0)) best = std::min(best, h0);
    if (std::isfinite(best) && best > 0) {
        double rb = best * 1.02;
        const int nb = P.L == 1 ? 801 : 61;
        if (P.L == 1) {
            for (int i = 0; i < nb; ++i) offer({-rb + 2 * rb * i / (nb - 1)});
        } else if (P.L == 2) {
            for (int i = 0; i < nb; ++i)
                for (int j = 0; j < nb; ++j)
                    offer({-rb + 2 * rb * i / (nb - 1), -rb + 2 * rb * j / (nb - 1)});
        }
    }

    std::sort(cands.begin(), cands.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // Spatially separated starts, best first, so distinct basins get polished.
    std::vector<std::pair<double, std::vector<double>>> seeds;
    double sep = std::isfinite(best) ? std::max(1e-12, best / 8) : r / 16;
    for (const auto& c : cands) {
        if (!std::isfinite(c.first)) continue;
        bool close = false;
        for (const auto& s : seeds) {
            double d2 = 0;
            for (int l = 0; l < P.L; ++l)
                d2 += (c.second[l] - s.second[l]) * (c.second[l] - s.second[l]);
            if (std::sqrt(d2) < sep) {
                close = true;
                break;
            }
        }
        if (!close) seeds.push_back(c);
        if (seeds.size() >= (P.L >= 2 ? 24u : 10u)) break;
    }
    for (std::size_t si = 0; si < seeds.size(); ++si) {
        std::vector<double> p = seeds[si].second;
        double h = seeds[si].first;
        double step = 4.0 * r / points;
        int evals = 0;
        while (step > 1e-13 * std::max(1.0, r) && evals < 4000) {
            bool improved = false;
            for (const auto& d : dirs) {
                std::vector<double> q = p;
                for (int l = 0; l < P.L; ++l) q[l] += step * d[l];
                double hq = oracle_h(P, q);
                ++evals;
                if (hq < h) {
                    h = hq;
                    p = std::move(q);
                    improved = true;
                    break;
                }
            }
            if (!improved) step *= 0.5;
        }
        best = std::min(best, h);
    }
    if (!(best < std::numeric_limits<double>::infinity()) || best <= 0) return 0.0;
    return 1.0 / best;
}

}  // namespace rsweep::testutil
