#pragma once

#include <optional>
#include <vector>

#include "rsweep/types.hpp"

namespace rsweep {

enum class Stability { StrictlyHurwitz, MarginallyStable, Unstable };

Stability classify_stability(const Matrix& A);

/// Continuous-time LTI model (A, B, C, D). The stability tag is computed on
/// construction from the eigenvalues of A.
struct StateSpaceModel {
    Matrix A, B, C, D;
    Stability stability;

    StateSpaceModel(Matrix A_, Matrix B_, Matrix C_, Matrix D_);
    StateSpaceModel(Matrix A_, Matrix B_, Matrix C_);  // D = 0

    int order() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int outputs() const { return static_cast<int>(C.rows()); }
};

/// Structured A-matrix uncertainty A + delta*S, optionally paired with an
/// output uncertainty C_p - C_u = delta_c * S_c.
struct StructuredPerturbation {
    Matrix S;
    double delta = 0.0;
    std::optional<Matrix> S_c;
    double delta_c = 0.0;
};

struct FrequencyGrid {
    std::vector<double> points;
    bool includes_eigenfrequencies = false;
    bool excludes_zero = true;

    static FrequencyGrid logspace(double lo, double hi, int n);
    static FrequencyGrid linspace(double lo, double hi, int n);

    /// Returns a grid with `extra` merged in, deduplicated at 1e-9 relative.
    FrequencyGrid merged_with(const std::vector<double>& extra) const;
    std::size_t size() const { return points.size(); }
};

/// 400 log-spaced points on [1e-2, 1e2] merged with the eigenfrequencies of A
/// and, for each supplied delta sample, of A + delta*S.
FrequencyGrid default_grid(const Matrix& A);
FrequencyGrid default_grid(const Matrix& A, const Matrix& S,
                           const std::vector<double>& delta_samples);

/// (sI - A)^-1. Throws SingularResolvent when the reciprocal condition
/// estimate falls below 1e-12.
ComplexMatrix resolvent(const Matrix& A, Complex s);

/// C (sI - A)^-1 B + D.
ComplexMatrix transfer_eval(const StateSpaceModel& ss, Complex s);

/// Error dynamics driven by the nominal state:
/// realization (A + delta*S, delta*S, C_p, C_p - C_u).
StateSpaceModel error_system_unperturbed(const Matrix& A, const StructuredPerturbation& pert,
                                         const Matrix& C_u, const Matrix& C_p);

/// Error dynamics driven by the true state:
/// realization (A, delta*S, C_u, C_p - C_u).
StateSpaceModel error_system_perturbed(const Matrix& A, const StructuredPerturbation& pert,
                                       const Matrix& C_u, const Matrix& C_p);

/// || T_p(iw) - T_u(iw) (iwI - A)^-1 (iwI - A - delta S) ||, the residual of
/// the frequency-correction identity tying the two error realizations.
double scaling_identity_residual(const Matrix& A, const StructuredPerturbation& pert,
                                 const Matrix& C_u, const Matrix& C_p, double omega);

/// Distinct nonzero |Im lambda(A)|, ascending, deduplicated at 1e-9 relative.
std::vector<double> eigenfrequencies(const Matrix& A);

}  // namespace rsweep
