#include "rsweep/state_space.hpp"

#include <algorithm>
#include <cmath>

namespace rsweep {

namespace {

constexpr double kStabilityTol = 1e-9;
constexpr double kRcondThreshold = 1e-12;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Stability classify_stability(const Matrix& A) {
    if (A.rows() == 0) return Stability::StrictlyHurwitz;
    Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    const auto& ev = es.eigenvalues();
    double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    double max_re = ev.real().maxCoeff();
    if (max_re > kStabilityTol * scale) return Stability::Unstable;
    if (max_re > -kStabilityTol * scale) return Stability::MarginallyStable;
    return Stability::StrictlyHurwitz;
}

namespace {
void validate_dims(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D) {
    require(A.rows() == A.cols(), "A must be square");
    require(B.rows() == A.rows(), "B row count must match the state dimension");
    require(C.cols() == A.rows(), "C column count must match the state dimension");
    require(D.rows() == C.rows() && D.cols() == B.cols(), "D must be outputs x inputs");
}
}  // namespace

StateSpaceModel::StateSpaceModel(Matrix A_, Matrix B_, Matrix C_, Matrix D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
    validate_dims(A, B, C, D);
    stability = classify_stability(A);
}

StateSpaceModel::StateSpaceModel(Matrix A_, Matrix B_, Matrix C_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(Matrix::Zero(C.rows(), B.cols())) {
    validate_dims(A, B, C, D);
    stability = classify_stability(A);
}

FrequencyGrid FrequencyGrid::logspace(double lo, double hi, int n) {
    require(lo > 0 && hi > lo && n >= 2, "logspace needs 0 < lo < hi and n >= 2");
    FrequencyGrid g;
    g.points.resize(n);
    double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < n; ++i)
        g.points[i] = std::pow(10.0, llo + (lhi - llo) * i / (n - 1));
    g.points.front() = lo;
    g.points.back() = hi;
    return g;
}

FrequencyGrid FrequencyGrid::linspace(double lo, double hi, int n) {
    require(hi > lo && n >= 2, "linspace needs lo < hi and n >= 2");
    FrequencyGrid g;
    g.excludes_zero = lo > 0;
    g.points.resize(n);
    for (int i = 0; i < n; ++i) g.points[i] = lo + (hi - lo) * i / (n - 1);
    return g;
}

FrequencyGrid FrequencyGrid::merged_with(const std::vector<double>& extra) const {
    FrequencyGrid g = *this;
    for (double w : extra) {
        if (g.excludes_zero && w <= 0) continue;
        g.points.push_back(w);
    }
    std::sort(g.points.begin(), g.points.end());
    std::vector<double> dedup;
    for (double w : g.points) {
        if (!dedup.empty() && std::abs(w - dedup.back()) <= 1e-9 * std::max(1.0, std::abs(w)))
            continue;
        dedup.push_back(w);
    }
    g.points = std::move(dedup);
    return g;
}

FrequencyGrid default_grid(const Matrix& A) {
    FrequencyGrid g = FrequencyGrid::logspace(1e-2, 1e2, 400).merged_with(eigenfrequencies(A));
    g.includes_eigenfrequencies = true;
    return g;
}

FrequencyGrid default_grid(const Matrix& A, const Matrix& S,
                           const std::vector<double>& delta_samples) {
    FrequencyGrid g = default_grid(A);
    for (double d : delta_samples) g = g.merged_with(eigenfrequencies(A + d * S));
    g.includes_eigenfrequencies = true;
    return g;
}

ComplexMatrix resolvent(const Matrix& A, Complex s) {
    const auto n = A.rows();
    ComplexMatrix M = s * ComplexMatrix::Identity(n, n) - A.cast<Complex>();
    Eigen::PartialPivLU<ComplexMatrix> lu(M);
    if (!(lu.rcond() > kRcondThreshold))
        throw SingularResolvent("resolvent: s is numerically an eigenvalue of A");
    return lu.solve(ComplexMatrix::Identity(n, n));
}

ComplexMatrix transfer_eval(const StateSpaceModel& ss, Complex s) {
    if (ss.order() == 0) return ss.D.cast<Complex>();
    ComplexMatrix R = resolvent(ss.A, s);
    return ss.C.cast<Complex>() * R * ss.B.cast<Complex>() + ss.D.cast<Complex>();
}

StateSpaceModel error_system_unperturbed(const Matrix& A, const StructuredPerturbation& pert,
                                         const Matrix& C_u, const Matrix& C_p) {
    require(pert.S.rows() == A.rows() && pert.S.cols() == A.cols(), "S must match A");
    require(C_u.rows() == C_p.rows() && C_u.cols() == C_p.cols(), "C_u and C_p must agree in shape");
    require(C_u.cols() == A.rows(), "C column count must match the state dimension");
    Matrix dS = pert.delta * pert.S;
    return StateSpaceModel(A + dS, dS, C_p, C_p - C_u);
}

StateSpaceModel error_system_perturbed(const Matrix& A, const StructuredPerturbation& pert,
                                       const Matrix& C_u, const Matrix& C_p) {
    require(pert.S.rows() == A.rows() && pert.S.cols() == A.cols(), "S must match A");
    require(C_u.rows() == C_p.rows() && C_u.cols() == C_p.cols(), "C_u and C_p must agree in shape");
    require(C_u.cols() == A.rows(), "C column count must match the state dimension");
    Matrix dS = pert.delta * pert.S;
    return StateSpaceModel(A, dS, C_u, C_p - C_u);
}

double scaling_identity_residual(const Matrix& A, const StructuredPerturbation& pert,
                                 const Matrix& C_u, const Matrix& C_p, double omega) {
    const Complex s(0.0, omega);
    StateSpaceModel unpert = error_system_unperturbed(A, pert, C_u, C_p);
    StateSpaceModel perturbed = error_system_perturbed(A, pert, C_u, C_p);
    ComplexMatrix Tu = transfer_eval(unpert, s);
    ComplexMatrix Tp = transfer_eval(perturbed, s);
    const auto n = A.rows();
    ComplexMatrix correction =
        resolvent(A, s) * (s * ComplexMatrix::Identity(n, n) - (A + pert.delta * pert.S).cast<Complex>());
    ComplexMatrix diff = Tp - Tu * correction;
    return diff.jacobiSvd().singularValues()(0);
}

std::vector<double> eigenfrequencies(const Matrix& A) {
    if (A.rows() == 0) return {};
    Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    const auto& ev = es.eigenvalues();
    double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    std::vector<double> freqs;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double w = std::abs(ev(i).imag());
        if (w > 1e-9 * scale) freqs.push_back(w);
    }
    std::sort(freqs.begin(), freqs.end());
    std::vector<double> dedup;
    for (double w : freqs) {
        if (!dedup.empty() && std::abs(w - dedup.back()) <= 1e-9 * std::max(1.0, w)) continue;
        dedup.push_back(w);
    }
    return dedup;
}

}  // namespace rsweep
