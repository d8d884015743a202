#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rsweep/types.hpp"

namespace rsweep {

/// One uncertainty block. A RepeatedRealScalar block of size k stands for
/// delta*I_k with a real scalar shared by every block carrying the same
/// label. A FullComplex block is an unstructured complex rows x cols matrix.
struct Block {
    enum class Kind { RepeatedRealScalar, FullComplex };
    Kind kind;
    int rows = 0;  // rows of the Delta_i matrix
    int cols = 0;  // cols of the Delta_i matrix
    std::string label;

    static Block repeated_real(int size, std::string label);
    static Block full_complex(int rows, int cols);
    bool is_real() const { return kind == Kind::RepeatedRealScalar; }
};

struct BlockStructure {
    std::vector<Block> blocks;

    int delta_rows() const;  // total rows of Delta = cols of a compatible M
    int delta_cols() const;  // total cols of Delta = rows of a compatible M
    std::vector<std::string> real_labels() const;  // distinct, in block order
    bool has_full_block() const;

    /// Assembles the block-diagonal Delta from per-label real values and an
    /// optional matrix for the trailing full block.
    ComplexMatrix assemble(const std::vector<double>& real_values,
                           const ComplexMatrix* full_block) const;

    void validate_against(const ComplexMatrix& M) const;  // throws StructureMismatch
};

/// Frequency-indexed partitioned matrix G(s) closing the loop between the
/// structured uncertainty channels and a disturbance-to-error performance
/// channel.
struct Interconnection {
    std::function<ComplexMatrix(Complex)> eval;
    std::vector<int> uncertainty_sizes;  // square channel sizes, block order
    int dist = 0;                        // disturbance channel width
    int err = 0;                         // error channel height
    BlockStructure structure;            // real blocks then one full block
    std::string scenario;

    int uncertainty_dim() const;
    ComplexMatrix operator()(Complex s) const { return eval(s); }
};

/// G(s) = [Phi^-1 S, Phi^-1 S; C_p, C_p - C_u] with structure {delta I_n, Delta_f}.
Interconnection g_unperturbed_basic(const Matrix& A, const Matrix& S,
                                    const Matrix& C_u, const Matrix& C_p);

/// Five-channel nominal-state-driven interconnection covering initial-state
/// error (include_z0) and sensor-matrix uncertainty C_p - C_u = delta_c S_c
/// (include_Sc). Channels are deleted verbatim by flag: z0 off removes the
/// second and fifth rows/columns plus the z(0) input, Sc off removes rows and
/// columns three through five.
Interconnection g_unperturbed_general(const Matrix& A, const Matrix& S,
                                      const std::optional<Matrix>& S_c, const Matrix& C_u,
                                      bool include_z0, bool include_Sc);

/// True-state-driven interconnection [0 0 I; 0 0 I; Cu Phi^-1 S, S_c, 0];
/// without S_c the second row and column are removed.
Interconnection g_perturbed_basic(const Matrix& A, const Matrix& S,
                                  const std::optional<Matrix>& S_c, const Matrix& C_u);

/// True-state-driven interconnection with the initial-state channel appended
/// to the disturbance: [0 0 | 0 I; 0 0 | 0 I; Cu Phi^-1 S, S_c | Cu Phi^-1, 0].
Interconnection g_perturbed_z0(const Matrix& A, const Matrix& S,
                               const std::optional<Matrix>& S_c, const Matrix& C_u);

/// Upper LFT: G22 + G21 Delta (I - G11 Delta)^-1 G12, with Delta closing the
/// uncertainty channels (the first nu rows and columns of G).
ComplexMatrix lft_upper(const ComplexMatrix& G, int nu, const ComplexMatrix& Delta);
ComplexMatrix lft_upper(const Interconnection& G, Complex s, const ComplexMatrix& Delta);

/// Closed-form bound ||[Cu Phi^-1 S, S_c]|| sqrt(delta^2 + delta_c^2), plus
/// ||Cu Phi^-1|| when the initial-state channel is included. Dominates the
/// true-state-driven error norm without any structured-singular-value work.
double direct_bound_perturbed(const Matrix& A, const Matrix& S,
                              const std::optional<Matrix>& S_c, const Matrix& C_u,
                              double omega, double delta, double delta_c, bool include_z0);

}  // namespace rsweep
