#pragma once

#include <string>

#include "rsweep/fixed_point.hpp"
#include "rsweep/state_space.hpp"
#include "rsweep/types.hpp"

namespace rsweep {

// ---------------------------------------------------------------------------
// Double spring-mass-dashpot benchmark
// ---------------------------------------------------------------------------

struct SmdParams {
    double m1 = 3.0, m2 = 1.0;  // masses
    double k1 = 1.0, k2 = 1.0;  // spring stiffness
    double b1 = 0.1, b2 = 0.1;  // damping rates
    void validate() const;      // all strictly positive
};

enum class SmdStructure { K1, K2, B1, B2 };

SmdStructure smd_structure_from_name(const std::string& name);
std::string to_string(SmdStructure which);

/// Two-mass model with force inputs and mass-scaled rate outputs.
StateSpaceModel smd_model(const SmdParams& p);

/// S = param * dA/dparam, so A(param*(1+delta)) = A + delta*S exactly.
Matrix smd_structure(const SmdParams& p, SmdStructure which);

/// Output structure modeling swapped rate sensing between the two masses.
Matrix smd_colocation_Sc(const SmdParams& p);

// ---------------------------------------------------------------------------
// Two-qubit dephasing model in the Bloch representation
// ---------------------------------------------------------------------------

struct QubitParams {
    double Delta = 0.0;   // detuning (rad/s)
    double J = 1.0;       // coupling (rad/s)
    double gamma = 0.01;  // dephasing rate (1/s)

    double J_eff() const;  // sqrt(Delta^2 + 4 J^2)
    void validate() const;
};

struct BlochModel {
    Matrix A_H;  // antisymmetric Hamiltonian generator
    Matrix A_L;  // symmetric negative-semidefinite dephasing generator
    Matrix A;    // A_H + A_L, rank 2 with a zero eigenvalue
    Matrix C_u;  // 1x3 infidelity-error readout 0.5*[0,0,1]
    Vector r_L;  // left-excitation Bloch vector [0,0,1]
    Vector r_R;  // right-excitation Bloch vector [0,0,-1]
};

BlochModel two_qubit_bloch(const QubitParams& q);

/// Structure of the relative dephasing-rate uncertainty gamma*(1+delta):
/// S equals the dephasing generator evaluated at gamma, so that
/// A(gamma*(1+delta)) = A + delta*S exactly.
Matrix gamma_structure(const QubitParams& q);

enum class QubitParameter { Delta, J };
enum class Formulation { Unperturbed, Perturbed };

Formulation formulation_from_name(const std::string& name);
std::string to_string(Formulation f);

/// Family of error systems for an additively shifted detuning or coupling,
/// with the structured term replaced by the exact generator difference.
/// Throws InvalidDelta when the shifted coupling degenerates to zero.
PerturbationFamily nonlinear_family(const QubitParams& q, QubitParameter which,
                                    Formulation formulation);

/// Family for the relative dephasing-rate uncertainty. The nominal-state
/// formulation is admissible only for delta > -1 (positive dephasing).
PerturbationFamily gamma_family(const QubitParams& q, Formulation formulation);

/// (2 J^2 / J_eff^2) * (1 - exp(-t*gamma) * cos(J_eff * t)).
double fidelity_analytic(double t, const QubitParams& q);

/// 0.5*(1 - z(t)) with r(t) = exp(tA) r0 via the matrix exponential.
double fidelity_simulate(double t, const QubitParams& q, const Vector& r0);

}  // namespace rsweep
