#include "rsweep/interconnection.hpp"

#include <numeric>

#include "rsweep/state_space.hpp"

namespace rsweep {

Block Block::repeated_real(int size, std::string label) {
    if (size <= 0) throw StructureMismatch("repeated real block needs positive size");
    if (label.empty()) throw StructureMismatch("repeated real block needs a label");
    return Block{Kind::RepeatedRealScalar, size, size, std::move(label)};
}

Block Block::full_complex(int rows, int cols) {
    if (rows <= 0 || cols <= 0) throw StructureMismatch("full complex block needs positive dims");
    return Block{Kind::FullComplex, rows, cols, {}};
}

int BlockStructure::delta_rows() const {
    return std::accumulate(blocks.begin(), blocks.end(), 0,
                           [](int acc, const Block& b) { return acc + b.rows; });
}

int BlockStructure::delta_cols() const {
    return std::accumulate(blocks.begin(), blocks.end(), 0,
                           [](int acc, const Block& b) { return acc + b.cols; });
}

std::vector<std::string> BlockStructure::real_labels() const {
    std::vector<std::string> labels;
    for (const auto& b : blocks) {
        if (!b.is_real()) continue;
        if (std::find(labels.begin(), labels.end(), b.label) == labels.end())
            labels.push_back(b.label);
    }
    return labels;
}

bool BlockStructure::has_full_block() const {
    for (const auto& b : blocks)
        if (!b.is_real()) return true;
    return false;
}

ComplexMatrix BlockStructure::assemble(const std::vector<double>& real_values,
                                       const ComplexMatrix* full_block) const {
    auto labels = real_labels();
    if (real_values.size() != labels.size())
        throw StructureMismatch("one real value per distinct label is required");
    ComplexMatrix Delta = ComplexMatrix::Zero(delta_rows(), delta_cols());
    int r = 0, c = 0;
    for (const auto& b : blocks) {
        if (b.is_real()) {
            auto it = std::find(labels.begin(), labels.end(), b.label);
            double v = real_values[static_cast<std::size_t>(it - labels.begin())];
            Delta.block(r, c, b.rows, b.cols) = v * ComplexMatrix::Identity(b.rows, b.cols);
        } else {
            if (full_block == nullptr)
                throw StructureMismatch("structure has a full block but none was supplied");
            if (full_block->rows() != b.rows || full_block->cols() != b.cols)
                throw StructureMismatch("full block has the wrong shape");
            Delta.block(r, c, b.rows, b.cols) = *full_block;
        }
        r += b.rows;
        c += b.cols;
    }
    return Delta;
}

void BlockStructure::validate_against(const ComplexMatrix& M) const {
    if (blocks.empty()) throw StructureMismatch("empty block structure");
    bool full_seen = false;
    for (const auto& b : blocks) {
        if (b.is_real() && full_seen)
            throw StructureMismatch("real blocks must precede the full performance block");
        if (!b.is_real()) {
            if (full_seen) throw StructureMismatch("at most one full complex block is supported");
            full_seen = true;
        }
    }
    if (M.rows() != delta_cols() || M.cols() != delta_rows())
        throw StructureMismatch("matrix dimensions do not match the block structure");
}

int Interconnection::uncertainty_dim() const {
    return std::accumulate(uncertainty_sizes.begin(), uncertainty_sizes.end(), 0);
}

namespace {

void check_common(const Matrix& A, const Matrix& S, const Matrix& C_u) {
    if (A.rows() != A.cols()) throw std::invalid_argument("A must be square");
    if (S.rows() != A.rows() || S.cols() != A.cols()) throw std::invalid_argument("S must match A");
    if (C_u.cols() != A.rows()) throw std::invalid_argument("C columns must match the state dim");
}

void check_Sc(const std::optional<Matrix>& S_c, const Matrix& C_u) {
    if (!S_c) return;
    if (S_c->rows() != C_u.rows() || S_c->cols() != C_u.cols())
        throw std::invalid_argument("S_c must have the shape of C");
}

}  // namespace

Interconnection g_unperturbed_basic(const Matrix& A, const Matrix& S,
                                    const Matrix& C_u, const Matrix& C_p) {
    check_common(A, S, C_u);
    if (C_p.rows() != C_u.rows() || C_p.cols() != C_u.cols())
        throw std::invalid_argument("C_p must have the shape of C_u");
    const int n = static_cast<int>(A.rows());
    const int p = static_cast<int>(C_u.rows());

    Interconnection G;
    G.uncertainty_sizes = {n};
    G.dist = n;
    G.err = p;
    G.structure.blocks = {Block::repeated_real(n, "delta"), Block::full_complex(n, p)};
    G.scenario = "unperturbed-basic";
    Matrix Cc = C_u, Cpp = C_p, Sm = S, Am = A;
    G.eval = [Am, Sm, Cc, Cpp, n, p](Complex s) {
        ComplexMatrix X = resolvent(Am, s) * Sm.cast<Complex>();
        ComplexMatrix Gm(n + p, 2 * n);
        Gm.block(0, 0, n, n) = X;
        Gm.block(0, n, n, n) = X;
        Gm.block(n, 0, p, n) = Cpp.cast<Complex>();
        Gm.block(n, n, p, n) = (Cpp - Cc).cast<Complex>();
        return Gm;
    };
    return G;
}

Interconnection g_unperturbed_general(const Matrix& A, const Matrix& S,
                                      const std::optional<Matrix>& S_c, const Matrix& C_u,
                                      bool include_z0, bool include_Sc) {
    check_common(A, S, C_u);
    check_Sc(S_c, C_u);
    if (include_Sc && !S_c)
        throw std::invalid_argument("include_Sc requires S_c");
    const int n = static_cast<int>(A.rows());
    const int p = static_cast<int>(C_u.rows());

    // Channel bookkeeping follows the five-block layout before deletion:
    // blocks 1,2 carry delta, blocks 3-5 carry delta_c; z(0) and w share the
    // disturbance side. Flags delete rows/columns verbatim.
    std::vector<int> kept;  // which of the five uncertainty channels survive
    if (include_z0 && include_Sc) kept = {0, 1, 2, 3, 4};
    else if (!include_z0 && include_Sc) kept = {0, 2, 3};
    else if (include_z0 && !include_Sc) kept = {0, 1};
    else kept = {0};

    Interconnection G;
    for (std::size_t i = 0; i < kept.size(); ++i) G.uncertainty_sizes.push_back(n);
    G.dist = include_z0 ? 2 * n : n;
    G.err = p;
    for (int ch : kept)
        G.structure.blocks.push_back(Block::repeated_real(n, ch < 2 ? "delta" : "delta_c"));
    G.structure.blocks.push_back(Block::full_complex(G.dist, p));
    G.scenario = "unperturbed-general";

    Matrix Sc = S_c ? *S_c : Matrix::Zero(p, n);
    Matrix Am = A, Sm = S, Cc = C_u;
    G.eval = [Am, Sm, Sc, Cc, n, p, kept, include_z0](Complex s) {
        ComplexMatrix Phi_inv = resolvent(Am, s);
        ComplexMatrix X = Phi_inv * Sm.cast<Complex>();
        ComplexMatrix Cuc = Cc.cast<Complex>();
        ComplexMatrix Scc = Sc.cast<Complex>();
        const int nch = 5;
        const int dist_full = 2 * n;
        ComplexMatrix full = ComplexMatrix::Zero(nch * n + p, nch * n + dist_full);
        auto put = [&](int br, int bc, const ComplexMatrix& blockM) {
            full.block(br * n, bc * n, blockM.rows(), blockM.cols()) = blockM;
        };
        ComplexMatrix I_n = ComplexMatrix::Identity(n, n);
        put(0, 0, X);
        put(2, 0, I_n);
        put(1, 1, X);
        put(4, 1, X);
        put(1, 5, Phi_inv);
        put(4, 5, Phi_inv);
        put(0, 6, X);
        put(3, 6, I_n);
        full.block(nch * n, 0 * n, p, n) = Cuc;
        full.block(nch * n, 1 * n, p, n) = Cuc * X;
        full.block(nch * n, 2 * n, p, n) = Scc;
        full.block(nch * n, 3 * n, p, n) = Scc;
        full.block(nch * n, 4 * n, p, n) = Scc;
        full.block(nch * n, 5 * n, p, n) = Cuc * Phi_inv;

        // Select surviving rows/columns: kept uncertainty channels, then the
        // disturbance channels (z0 only when included), then the error row.
        std::vector<int> rows, cols;
        for (int ch : kept)
            for (int i = 0; i < n; ++i) rows.push_back(ch * n + i), cols.push_back(ch * n + i);
        if (include_z0)
            for (int i = 0; i < n; ++i) cols.push_back(5 * n + i);
        for (int i = 0; i < n; ++i) cols.push_back(6 * n + i);
        for (int i = 0; i < p; ++i) rows.push_back(nch * n + i);

        ComplexMatrix Gm(rows.size(), cols.size());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < cols.size(); ++c) Gm(r, c) = full(rows[r], cols[c]);
        return Gm;
    };
    return G;
}

Interconnection g_perturbed_basic(const Matrix& A, const Matrix& S,
                                  const std::optional<Matrix>& S_c, const Matrix& C_u) {
    check_common(A, S, C_u);
    check_Sc(S_c, C_u);
    const int n = static_cast<int>(A.rows());
    const int p = static_cast<int>(C_u.rows());
    const bool with_sc = S_c.has_value();

    Interconnection G;
    G.uncertainty_sizes = with_sc ? std::vector<int>{n, n} : std::vector<int>{n};
    G.dist = n;
    G.err = p;
    G.structure.blocks.push_back(Block::repeated_real(n, "delta"));
    if (with_sc) G.structure.blocks.push_back(Block::repeated_real(n, "delta_c"));
    G.structure.blocks.push_back(Block::full_complex(n, p));
    G.scenario = "perturbed-basic";

    Matrix Am = A, Sm = S, Cc = C_u;
    Matrix Sc = with_sc ? *S_c : Matrix();
    G.eval = [Am, Sm, Sc, Cc, n, p, with_sc](Complex s) {
        ComplexMatrix M = Cc.cast<Complex>() * resolvent(Am, s) * Sm.cast<Complex>();
        const int nu = with_sc ? 2 * n : n;
        ComplexMatrix Gm = ComplexMatrix::Zero(nu + p, nu + n);
        Gm.block(0, nu, n, n) = ComplexMatrix::Identity(n, n);
        Gm.block(nu + 0, 0, p, n) = M;
        if (with_sc) {
            Gm.block(n, nu, n, n) = ComplexMatrix::Identity(n, n);
            Gm.block(nu, n, p, n) = Sc.cast<Complex>();
        }
        return Gm;
    };
    return G;
}

Interconnection g_perturbed_z0(const Matrix& A, const Matrix& S,
                               const std::optional<Matrix>& S_c, const Matrix& C_u) {
    check_common(A, S, C_u);
    check_Sc(S_c, C_u);
    const int n = static_cast<int>(A.rows());
    const int p = static_cast<int>(C_u.rows());
    const bool with_sc = S_c.has_value();

    Interconnection G;
    G.uncertainty_sizes = with_sc ? std::vector<int>{n, n} : std::vector<int>{n};
    G.dist = 2 * n;  // (z(0), w) jointly
    G.err = p;
    G.structure.blocks.push_back(Block::repeated_real(n, "delta"));
    if (with_sc) G.structure.blocks.push_back(Block::repeated_real(n, "delta_c"));
    G.structure.blocks.push_back(Block::full_complex(2 * n, p));
    G.scenario = "perturbed-z0";

    Matrix Am = A, Sm = S, Cc = C_u;
    Matrix Sc = with_sc ? *S_c : Matrix();
    G.eval = [Am, Sm, Sc, Cc, n, p, with_sc](Complex s) {
        ComplexMatrix Phi_inv = resolvent(Am, s);
        ComplexMatrix Cuc = Cc.cast<Complex>();
        ComplexMatrix M = Cuc * Phi_inv * Sm.cast<Complex>();
        const int nu = with_sc ? 2 * n : n;
        ComplexMatrix Gm = ComplexMatrix::Zero(nu + p, nu + 2 * n);
        Gm.block(0, nu + n, n, n) = ComplexMatrix::Identity(n, n);
        Gm.block(nu, 0, p, n) = M;
        Gm.block(nu, nu, p, n) = Cuc * Phi_inv;
        if (with_sc) {
            Gm.block(n, nu + n, n, n) = ComplexMatrix::Identity(n, n);
            Gm.block(nu, n, p, n) = Sc.cast<Complex>();
        }
        return Gm;
    };
    return G;
}

ComplexMatrix lft_upper(const ComplexMatrix& G, int nu, const ComplexMatrix& Delta) {
    if (nu < 0 || nu > G.rows() || nu > G.cols())
        throw StructureMismatch("uncertainty channel exceeds the matrix partition");
    if (Delta.rows() != nu || Delta.cols() != nu)
        throw StructureMismatch("Delta must close the square uncertainty channel");
    const auto pr = G.rows() - nu;
    const auto pc = G.cols() - nu;
    ComplexMatrix G11 = G.topLeftCorner(nu, nu);
    ComplexMatrix G12 = G.topRightCorner(nu, pc);
    ComplexMatrix G21 = G.bottomLeftCorner(pr, nu);
    ComplexMatrix G22 = G.bottomRightCorner(pr, pc);
    ComplexMatrix loop = ComplexMatrix::Identity(nu, nu) - G11 * Delta;
    Eigen::PartialPivLU<ComplexMatrix> lu(loop);
    if (nu > 0 && !(lu.rcond() > 1e-12))
        throw SingularLftLoop("I - G11*Delta is singular: destabilizing uncertainty candidate");
    return G22 + G21 * Delta * lu.solve(G12);
}

ComplexMatrix lft_upper(const Interconnection& G, Complex s, const ComplexMatrix& Delta) {
    return lft_upper(G.eval(s), G.uncertainty_dim(), Delta);
}

double direct_bound_perturbed(const Matrix& A, const Matrix& S,
                              const std::optional<Matrix>& S_c, const Matrix& C_u,
                              double omega, double delta, double delta_c, bool include_z0) {
    check_common(A, S, C_u);
    check_Sc(S_c, C_u);
    const Complex s(0.0, omega);
    ComplexMatrix CuPhi = C_u.cast<Complex>() * resolvent(A, s);
    ComplexMatrix lhs = CuPhi * S.cast<Complex>();
    ComplexMatrix stacked(C_u.rows(), lhs.cols() + (S_c ? S_c->cols() : 0));
    stacked.leftCols(lhs.cols()) = lhs;
    if (S_c) stacked.rightCols(S_c->cols()) = S_c->cast<Complex>();
    double bound = stacked.jacobiSvd().singularValues()(0) *
                   std::sqrt(delta * delta + delta_c * delta_c);
    if (include_z0) bound += CuPhi.jacobiSvd().singularValues()(0);
    return bound;
}

}  // namespace rsweep
