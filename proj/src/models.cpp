#include "rsweep/models.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace rsweep {

namespace {

Matrix smd_A(const SmdParams& p) {
    Matrix M1(2, 2), M2(2, 2);
    M1 << -p.k1 / p.m1, p.k1 / p.m2,
           p.k1 / p.m1, -(p.k1 + p.k2) / p.m2;
    M2 << -p.b1 / p.m1, p.b1 / p.m2,
           p.b1 / p.m1, -(p.b1 + p.b2) / p.m2;
    Matrix A = Matrix::Zero(4, 4);
    A.block<2, 2>(0, 2) = Matrix::Identity(2, 2);
    A.block<2, 2>(2, 0) = M1;
    A.block<2, 2>(2, 2) = M2;
    return A;
}

}  // namespace

void SmdParams::validate() const {
    if (!(m1 > 0 && m2 > 0 && k1 > 0 && k2 > 0 && b1 > 0 && b2 > 0))
        throw std::invalid_argument("spring-mass-dashpot parameters must be strictly positive");
}

SmdStructure smd_structure_from_name(const std::string& name) {
    if (name == "k1") return SmdStructure::K1;
    if (name == "k2") return SmdStructure::K2;
    if (name == "b1") return SmdStructure::B1;
    if (name == "b2") return SmdStructure::B2;
    throw std::invalid_argument("unknown structure selector: " + name);
}

std::string to_string(SmdStructure which) {
    switch (which) {
        case SmdStructure::K1: return "k1";
        case SmdStructure::K2: return "k2";
        case SmdStructure::B1: return "b1";
        case SmdStructure::B2: return "b2";
    }
    return "?";
}

StateSpaceModel smd_model(const SmdParams& p) {
    p.validate();
    Matrix B = Matrix::Zero(4, 2);
    B.block<2, 2>(2, 0) = Matrix::Identity(2, 2);
    Matrix C = Matrix::Zero(2, 4);
    C(0, 2) = 1.0 / p.m1;
    C(1, 3) = 1.0 / p.m2;
    return StateSpaceModel(smd_A(p), B, C);
}

Matrix smd_structure(const SmdParams& p, SmdStructure which) {
    p.validate();
    // A is affine in each parameter, so param * dA/dparam is exact.
    Matrix S = Matrix::Zero(4, 4);
    switch (which) {
        case SmdStructure::K1:
            S(2, 0) = -p.k1 / p.m1;
            S(2, 1) = p.k1 / p.m2;
            S(3, 0) = p.k1 / p.m1;
            S(3, 1) = -p.k1 / p.m2;
            break;
        case SmdStructure::K2:
            S(3, 1) = -p.k2 / p.m2;
            break;
        case SmdStructure::B1:
            S(2, 2) = -p.b1 / p.m1;
            S(2, 3) = p.b1 / p.m2;
            S(3, 2) = p.b1 / p.m1;
            S(3, 3) = -p.b1 / p.m2;
            break;
        case SmdStructure::B2:
            S(3, 3) = -p.b2 / p.m2;
            break;
    }
    return S;
}

Matrix smd_colocation_Sc(const SmdParams& p) {
    p.validate();
    Matrix Sc = Matrix::Zero(2, 4);
    Sc(0, 3) = 1.0 / p.m2;
    Sc(1, 2) = 1.0 / p.m1;
    return Sc;
}

double QubitParams::J_eff() const {
    return std::sqrt(Delta * Delta + 4.0 * J * J);
}

void QubitParams::validate() const {
    if (std::abs(J) < 1e-9) throw InvalidDelta("coupling J must be nonzero");
    if (gamma < 0) throw std::invalid_argument("dephasing rate must be nonnegative");
}

BlochModel two_qubit_bloch(const QubitParams& q) {
    q.validate();
    const double D = q.Delta, J = q.J, g = q.gamma;
    const double Jeff2 = D * D + 4.0 * J * J;

    BlochModel m;
    m.A_H = Matrix(3, 3);
    m.A_H << 0, D, 0,
             -D, 0, -2 * J,
             0, 2 * J, 0;
    m.A_L = Matrix(3, 3);
    m.A_L << D * D, 0, 2 * D * J,
             0, Jeff2, 0,
             2 * D * J, 0, 4 * J * J;
    m.A_L *= -g / Jeff2;
    m.A = m.A_H + m.A_L;
    m.C_u = Matrix(1, 3);
    m.C_u << 0, 0, 0.5;
    m.r_L = Vector(3);
    m.r_L << 0, 0, 1;
    m.r_R = Vector(3);
    m.r_R << 0, 0, -1;

    // Construction-time invariants.
    if ((m.A_H + m.A_H.transpose()).norm() > 1e-12 * std::max(1.0, m.A_H.norm()))
        throw std::logic_error("A_H must be antisymmetric");
    if ((m.A_L - m.A_L.transpose()).norm() > 1e-12 * std::max(1.0, m.A_L.norm()))
        throw std::logic_error("A_L must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> sa(m.A_L);
    if (sa.eigenvalues().maxCoeff() > 1e-12 * std::max(1.0, m.A_L.norm()))
        throw std::logic_error("A_L must be negative semidefinite");
    Eigen::EigenSolver<Matrix> es(m.A, false);
    double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    bool zero_seen = false, osc_ok = true;
    int osc_count = 0;
    for (int i = 0; i < 3; ++i) {
        Complex lam = es.eigenvalues()(i);
        if (std::abs(lam) <= 1e-9 * scale) {
            zero_seen = true;
        } else {
            ++osc_count;
            if (g > 0 && std::abs(lam - Complex(-g, lam.imag() > 0 ? q.J_eff() : -q.J_eff())) >
                             1e-9 * scale)
                osc_ok = false;
        }
    }
    if (!zero_seen || osc_count != 2 || !osc_ok)
        throw std::logic_error("Bloch generator spectrum must be {0, -gamma +/- i J_eff}");
    return m;
}

Matrix gamma_structure(const QubitParams& q) {
    if (!(q.gamma > 0)) throw std::invalid_argument("gamma_structure requires gamma > 0");
    return two_qubit_bloch(q).A_L;
}

Formulation formulation_from_name(const std::string& name) {
    if (name == "unperturbed" || name == "u") return Formulation::Unperturbed;
    if (name == "perturbed" || name == "p") return Formulation::Perturbed;
    throw std::invalid_argument("unknown formulation: " + name);
}

std::string to_string(Formulation f) {
    return f == Formulation::Unperturbed ? "unperturbed" : "perturbed";
}

PerturbationFamily nonlinear_family(const QubitParams& q, QubitParameter which,
                                    Formulation formulation) {
    q.validate();
    BlochModel nominal = two_qubit_bloch(q);
    Matrix A0 = nominal.A;
    Matrix Cu = nominal.C_u;

    PerturbationFamily fam;
    fam.label = which == QubitParameter::Delta ? "Delta" : "J";
    if (which == QubitParameter::J) {
        double J0 = q.J;
        fam.valid = [J0](double d) { return std::abs(J0 + d) >= 1e-9; };
    }
    fam.realize = [q, which, formulation, A0, Cu](double delta) {
        QubitParams qp = q;
        if (which == QubitParameter::Delta) {
            qp.Delta = q.Delta + delta;
        } else {
            qp.J = q.J + delta;
            if (std::abs(qp.J) < 1e-9)
                throw InvalidDelta("coupling shifted to zero: J_eff degenerate");
        }
        Matrix dA = two_qubit_bloch(qp).A - A0;
        if (formulation == Formulation::Unperturbed)
            return StateSpaceModel(A0 + dA, dA, Cu, Matrix::Zero(Cu.rows(), dA.cols()));
        return StateSpaceModel(A0, dA, Cu, Matrix::Zero(Cu.rows(), dA.cols()));
    };
    return fam;
}

PerturbationFamily gamma_family(const QubitParams& q, Formulation formulation) {
    q.validate();
    if (!(q.gamma > 0)) throw std::invalid_argument("gamma family requires gamma > 0");
    BlochModel nominal = two_qubit_bloch(q);
    Matrix A0 = nominal.A;
    Matrix S = nominal.A_L;
    Matrix Cu = nominal.C_u;

    PerturbationFamily fam;
    fam.label = "gamma";
    if (formulation == Formulation::Unperturbed) {
        // gamma*(1+delta) must stay positive for the error system to carry an
        // L2 gain.
        fam.admissible_min = -1.0;
    }
    fam.realize = [formulation, A0, S, Cu](double delta) {
        Matrix dS = delta * S;
        Matrix D0 = Matrix::Zero(Cu.rows(), dS.cols());
        if (formulation == Formulation::Unperturbed)
            return StateSpaceModel(A0 + dS, dS, Cu, D0);
        return StateSpaceModel(A0, dS, Cu, D0);
    };
    return fam;
}

double fidelity_analytic(double t, const QubitParams& q) {
    q.validate();
    if (t < 0) throw std::invalid_argument("time must be nonnegative");
    double Jeff = q.J_eff();
    return (2.0 * q.J * q.J / (Jeff * Jeff)) * (1.0 - std::exp(-t * q.gamma) * std::cos(Jeff * t));
}

double fidelity_simulate(double t, const QubitParams& q, const Vector& r0) {
    if (t < 0) throw std::invalid_argument("time must be nonnegative");
    if (r0.size() != 3) throw std::invalid_argument("Bloch vector must have 3 components");
    if (r0.norm() > 1.0 + 1e-12) throw std::invalid_argument("Bloch vector must lie in the unit ball");
    BlochModel m = two_qubit_bloch(q);
    Matrix E = (t * m.A).exp();
    Vector rt = E * r0;
    return 0.5 * (1.0 - rt(2));
}

}  // namespace rsweep
