#include "rsweep/hinf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace rsweep {

namespace {

constexpr double kMarginalTol = 1e-9;
constexpr double kPbhTol = 1e-9;
constexpr double kAxisTol = 1e-8;
constexpr double kExclusionRadius = 1e-4;

struct Csys {
    ComplexMatrix A, B, C, D;
    int n() const { return static_cast<int>(A.rows()); }
};

double sigma_max(const ComplexMatrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    return M.jacobiSvd().singularValues()(0);
}

// sigma_max(T(iw)); negative when the resolvent is numerically singular.
double sv_at(const Csys& sys, double w) {
    if (sys.n() == 0) return sigma_max(sys.D);
    ComplexMatrix M =
        Complex(0, w) * ComplexMatrix::Identity(sys.n(), sys.n()) - sys.A;
    Eigen::PartialPivLU<ComplexMatrix> lu(M);
    if (!(lu.rcond() > 1e-13)) return -1.0;
    return sigma_max(sys.C * lu.solve(sys.B) + sys.D);
}

// gamma < ||T||_inf iff the associated Hamiltonian-type matrix has an
// imaginary-axis eigenvalue (gamma must exceed sigma_max(D)).
bool axis_crossings(const Csys& sys, double gamma, std::vector<double>* freqs) {
    const int n = sys.n();
    const int m = static_cast<int>(sys.B.cols());
    ComplexMatrix R = gamma * gamma * ComplexMatrix::Identity(m, m) - sys.D.adjoint() * sys.D;
    Eigen::PartialPivLU<ComplexMatrix> luR(R);
    ComplexMatrix BRi = sys.B * luR.solve(ComplexMatrix::Identity(m, m));
    ComplexMatrix Acl = sys.A + BRi * sys.D.adjoint() * sys.C;
    ComplexMatrix H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = Acl;
    H.topRightCorner(n, n) = BRi * sys.B.adjoint();
    H.bottomLeftCorner(n, n) =
        -sys.C.adjoint() *
        (ComplexMatrix::Identity(sys.C.rows(), sys.C.rows()) + sys.D * luR.solve(sys.D.adjoint())) *
        sys.C;
    H.bottomRightCorner(n, n) = -Acl.adjoint();

    Eigen::ComplexEigenSolver<ComplexMatrix> es(H, false);
    double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    bool any = false;
    if (freqs) freqs->clear();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        Complex lam = es.eigenvalues()(i);
        if (std::abs(lam.real()) <= kAxisTol * scale) {
            any = true;
            if (freqs && lam.imag() >= 0) freqs->push_back(lam.imag());
        }
    }
    if (freqs) std::sort(freqs->begin(), freqs->end());
    return any;
}

double golden_max(const std::function<double(double)>& f, double a, double b, int iters) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

HinfResult bisection_norm(const Csys& sys, double tol, const std::vector<double>& probe_freqs) {
    HinfResult out;
    out.method = HinfMethod::Bisection;

    double sd = sigma_max(sys.D);
    double lo = sd;
    double peak_probe = 0.0;
    for (double w : probe_freqs) {
        double v = sv_at(sys, w);
        if (v > lo) {
            lo = v;
            peak_probe = w;
        }
    }
    out.peak_frequency = peak_probe;

    double bc = sigma_max(sys.B) * sigma_max(sys.C);
    double margin = 0.0;
    if (sys.n() > 0) {
        Eigen::ComplexEigenSolver<ComplexMatrix> es(sys.A, false);
        margin = -es.eigenvalues().real().maxCoeff();
    }
    double hi = lo + (margin > 0 ? 2.0 * bc / margin : 2.0 * bc) + 1e-12;

    if (sys.n() == 0 || bc == 0.0) {
        out.norm = lo;
        return out;
    }

    auto feasible = [&](double g, std::vector<double>* fr) {
        double g_eval = std::max(g, sd * (1 + 1e-12) + 1e-300);
        return axis_crossings(sys, g_eval, fr);
    };

    int doublings = 0;
    while (feasible(hi, nullptr) && doublings < 80) {
        hi *= 2.0;
        ++doublings;
    }

    std::vector<double> crossings;
    double lo_eval = lo * (1 + 1e-12) + 1e-300;
    if (!feasible(lo_eval, &crossings)) {
        // The probe maximum already is the supremum within tolerance.
        out.norm = lo;
        out.iterations = doublings;
        return out;
    }

    std::vector<double> last_crossings = crossings;
    int iters = 0;
    while (hi - lo > tol * std::max(lo, 1e-12) && iters < 200) {
        double mid = 0.5 * (lo + hi);
        std::vector<double> fr;
        if (feasible(mid, &fr)) {
            lo = mid;
            last_crossings = fr;
        } else {
            hi = mid;
        }
        ++iters;
    }
    out.iterations = iters + doublings;

    // Locate the peak from the last feasible crossing set.
    double best_v = lo;
    double best_w = out.peak_frequency;
    std::vector<double> cands = last_crossings;
    for (std::size_t i = 0; i + 1 < last_crossings.size(); ++i)
        cands.push_back(0.5 * (last_crossings[i] + last_crossings[i + 1]));
    for (double w : cands) {
        double v = sv_at(sys, w);
        if (v > best_v) {
            best_v = v;
            best_w = w;
        }
    }
    if (!last_crossings.empty()) {
        double span = last_crossings.back() - last_crossings.front();
        double rad = span > 0 ? span : std::max(1.0, std::abs(best_w)) * 1e-3;
        double wp = golden_max([&](double w) { return sv_at(sys, w); },
                               std::max(0.0, best_w - rad), best_w + rad, 60);
        double vp = sv_at(sys, wp);
        if (vp > best_v) {
            best_v = vp;
            best_w = wp;
        }
    }
    out.norm = std::max(best_v, lo);
    out.peak_frequency = best_w;
    return out;
}

std::vector<double> probe_frequencies(const Matrix& A) {
    std::vector<double> probes{0.0, 1e-2, 1e-1, 1.0, 1e1, 1e2};
    for (double w : eigenfrequencies(A)) probes.push_back(w);
    return probes;
}

std::optional<Csys> deflate_marginal(const StateSpaceModel& ss) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(ss.A.cast<Complex>(), true);
    ComplexMatrix V = es.eigenvectors();
    Eigen::PartialPivLU<ComplexMatrix> lu(V);
    if (!(lu.rcond() > 1e-12)) return std::nullopt;  // defective: cannot deflate
    ComplexMatrix W = lu.solve(ComplexMatrix::Identity(V.rows(), V.cols()));
    double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());

    ComplexMatrix Bc = ss.B.cast<Complex>();
    ComplexMatrix Cc = ss.C.cast<Complex>();
    std::vector<int> keep;
    for (int k = 0; k < V.cols(); ++k) {
        Complex lam = es.eigenvalues()(k);
        if (std::abs(lam.real()) <= kMarginalTol * scale) {
            double obs = (Cc * V.col(k)).norm();
            double ctr = (W.row(k) * Bc).norm();
            bool blocked = obs <= kPbhTol * std::max(1.0, Cc.norm()) * V.col(k).norm() ||
                           ctr <= kPbhTol * std::max(1.0, Bc.norm()) * W.row(k).norm();
            if (!blocked) return std::nullopt;
        } else {
            keep.push_back(k);
        }
    }
    Csys red;
    red.A = ComplexMatrix::Zero(keep.size(), keep.size());
    red.B = ComplexMatrix(keep.size(), Bc.cols());
    red.C = ComplexMatrix(Cc.rows(), keep.size());
    red.D = ss.D.cast<Complex>();
    for (std::size_t i = 0; i < keep.size(); ++i) {
        red.A(i, i) = es.eigenvalues()(keep[i]);
        red.B.row(i) = W.row(keep[i]) * Bc;
        red.C.col(i) = Cc * V.col(keep[i]);
    }
    return red;
}

HinfResult marginal_grid_fallback(const StateSpaceModel& ss) {
    HinfResult out;
    out.method = HinfMethod::Grid;
    out.marginal_fallback = true;

    // Axis pole frequencies to exclude.
    Eigen::EigenSolver<Matrix> es(ss.A, false);
    double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<double> poles;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        Complex lam = es.eigenvalues()(i);
        if (std::abs(lam.real()) <= kMarginalTol * scale) poles.push_back(std::abs(lam.imag()));
    }

    FrequencyGrid grid = default_grid(ss.A);
    Csys sys{ss.A.cast<Complex>(), ss.B.cast<Complex>(), ss.C.cast<Complex>(),
             ss.D.cast<Complex>()};
    auto excluded = [&](double w) {
        for (double wp : poles)
            if (std::abs(w - wp) <= kExclusionRadius) return true;
        return false;
    };

    std::vector<std::pair<double, double>> vals;  // (omega, sigma)
    int evals = 0;
    for (double w : grid.points) {
        if (excluded(w)) continue;
        double v = sv_at(sys, w);
        ++evals;
        if (v >= 0) vals.emplace_back(w, v);
    }
    if (vals.empty()) throw SingularResolvent("no usable grid points outside exclusion windows");

    // Polish the strongest local maxima between their grid neighbours,
    // clamped away from the excluded pole windows.
    std::vector<std::size_t> local;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        double prev = i > 0 ? vals[i - 1].second : -1.0;
        double next = i + 1 < vals.size() ? vals[i + 1].second : -1.0;
        if (vals[i].second >= prev && vals[i].second >= next) local.push_back(i);
    }
    std::sort(local.begin(), local.end(),
              [&](std::size_t a, std::size_t b) { return vals[a].second > vals[b].second; });
    if (local.size() > 4) local.resize(4);

    double best_v = 0.0, best_w = vals.front().first;
    for (const auto& [w, v] : vals) {
        if (v > best_v) {
            best_v = v;
            best_w = w;
        }
    }
    for (std::size_t li : local) {
        double a = li > 0 ? vals[li - 1].first : vals[li].first;
        double b = li + 1 < vals.size() ? vals[li + 1].first : vals[li].first;
        double wstar = vals[li].first;
        for (double wp : poles) {
            if (wp > a && wp < b) {
                if (wstar < wp) b = wp - kExclusionRadius;
                else a = wp + kExclusionRadius;
            }
        }
        if (!(b > a)) continue;
        double wp = golden_max([&](double w) { return sv_at(sys, w); }, a, b, 60);
        double vp = sv_at(sys, wp);
        evals += 62;
        if (vp > best_v) {
            best_v = vp;
            best_w = wp;
        }
    }
    out.norm = best_v;
    out.peak_frequency = best_w;
    out.iterations = evals;
    return out;
}

}  // namespace

HinfResult hinf_norm(const StateSpaceModel& ss, double tol) {
    if (ss.stability == Stability::Unstable)
        throw UnstableSystem("H-infinity norm undefined: open-RHP eigenvalues");

    if (ss.order() == 0 || ss.B.cols() == 0 || ss.C.rows() == 0) {
        HinfResult out;
        out.norm = sigma_max(ss.D.cast<Complex>());
        return out;
    }

    if (ss.stability == Stability::StrictlyHurwitz) {
        Csys sys{ss.A.cast<Complex>(), ss.B.cast<Complex>(), ss.C.cast<Complex>(),
                 ss.D.cast<Complex>()};
        return bisection_norm(sys, tol, probe_frequencies(ss.A));
    }

    if (auto red = deflate_marginal(ss)) {
        HinfResult r = bisection_norm(*red, tol, probe_frequencies(ss.A));
        return r;
    }
    return marginal_grid_fallback(ss);
}

HinfResult hinf_norm_grid(const StateSpaceModel& ss, const FrequencyGrid& grid) {
    if (grid.points.empty()) throw ConfigError("empty frequency grid");
    HinfResult out;
    out.method = HinfMethod::Grid;
    int survivors = 0;
    for (double w : grid.points) {
        try {
            double v = sigma_max(transfer_eval(ss, Complex(0, w)));
            ++survivors;
            if (v > out.norm) {
                out.norm = v;
                out.peak_frequency = w;
            }
        } catch (const SingularResolvent&) {
            continue;  // per-point skip
        }
    }
    if (survivors == 0)
        throw SingularResolvent("all grid points hit singular resolvents");
    if (survivors > 0 && out.norm == 0.0) {
        // Constant or zero transfer: report the first surviving point.
        for (double w : grid.points) {
            try {
                (void)transfer_eval(ss, Complex(0, w));
                out.peak_frequency = w;
                break;
            } catch (const SingularResolvent&) {
            }
        }
    }
    out.iterations = survivors;
    return out;
}

}  // namespace rsweep
