#include "kamred/homological.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace kamred {

namespace {

Mat kron(const Mat &A, const Mat &B) {
    Mat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

Mat vec_of(const Mat &Y) {
    Mat v(Y.size(), 1);
    int k = 0;
    for (int j = 0; j < Y.cols(); ++j)
        for (int i = 0; i < Y.rows(); ++i) v(k++, 0) = Y(i, j);
    return v;
}

Mat unvec(const Mat &v, int rows, int cols) {
    Mat Y(rows, cols);
    int k = 0;
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) Y(i, j) = v(k++, 0);
    return Y;
}

// Orthonormal basis of the range of a (possibly oblique) projection.
Mat range_basis(const Mat &P) {
    const int k = static_cast<int>(std::lround(P.trace().real()));
    if (k <= 0) return Mat(P.rows(), 0);
    if (k == P.rows()) return Mat::Identity(P.rows(), P.cols());
    Eigen::JacobiSVD<Mat> svd(P, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(k);
}

struct CompressedBlock {
    Mat B;   // n x k orthonormal basis
    Mat A;   // k x k compressed matrix
    Mat Q;   // k x n left inverse with Q B = I, B Q = P
};

CompressedBlock compress(const Mat &Atilde, const Mat &P) {
    CompressedBlock c;
    c.B = range_basis(P);
    c.Q = c.B.adjoint() * P;
    c.A = c.B.adjoint() * Atilde * c.B;
    return c;
}

Mat solve_compressed(const Mat &A_L, const Mat &A_Lp, cplx mu, const Mat &G, HomSolver method,
                     int *expansion_terms) {
    const int k = static_cast<int>(A_L.rows()), kp = static_cast<int>(A_Lp.rows());
    const Mat Ik = Mat::Identity(k, k), Ikp = Mat::Identity(kp, kp);
    const Mat Ikk = Mat::Identity(k * kp, k * kp);
    if (method == HomSolver::Direct) {
        const Mat K = mu * Ikk - kron(Ikp, A_L) + kron(A_Lp.transpose(), Ik);
        Eigen::FullPivLU<Mat> lu(K);
        if (!lu.isInvertible())
            throw std::runtime_error("block_resolvent: singular block system");
        if (expansion_terms) *expansion_terms = 0;
        return unvec(lu.solve(vec_of(G)), k, kp);
    }
    // Nilpotent expansion: split both sides into semisimple + nilpotent and
    // sum the finite geometric series.
    const Mat S_L = semisimple_part(A_L), N_L = A_L - S_L;
    const Mat S_Lp = semisimple_part(A_Lp), N_Lp = A_Lp - S_Lp;
    const Mat AD = mu * Ikk - kron(Ikp, S_L) + kron(S_Lp.transpose(), Ik);
    const Mat AN = kron(Ikp, N_L) - kron(N_Lp.transpose(), Ik);
    Eigen::FullPivLU<Mat> lu(AD);
    if (!lu.isInvertible())
        throw std::runtime_error("block_resolvent: singular diagonalizable part");
    Mat t = lu.solve(vec_of(G));
    Mat sum = t;
    const int terms = k * kp - 1;
    for (int j = 0; j < terms; ++j) {
        t = lu.solve(AN * t);
        sum += t;
    }
    if (expansion_terms) *expansion_terms = terms;
    return unvec(sum, k, kp);
}

}  // namespace

Mat block_resolvent(const Mat &Atilde, const Mat &P_L, const Mat &P_Lp, cplx mu, const Mat &B,
                    HomSolver method, int *expansion_terms) {
    const CompressedBlock L = compress(Atilde, P_L);
    const CompressedBlock Lp = compress(Atilde, P_Lp);
    if (L.B.cols() == 0 || Lp.B.cols() == 0) return Mat::Zero(B.rows(), B.cols());
    const Mat G = L.Q * B * Lp.B;
    const Mat Y = solve_compressed(L.A, Lp.A, mu, G, method, expansion_terms);
    return L.B * Y * Lp.Q;
}

HomologicalSolution solve_homological(const Mat &Atilde, const Decomposition &dec,
                                      const TorusMatFn &F, std::int64_t N,
                                      const DiophantineData &dd, double kappa_prime,
                                      const HomOptions &opts) {
    const int n = F.n();
    if (Atilde.rows() != n) throw std::invalid_argument("solve_homological: dimension mismatch");
    auto [FN, tail] = truncate_and_tail(F, N);

    const size_t R = dec.size();
    std::vector<CompressedBlock> blocks(R);
    std::vector<std::vector<cplx>> spectra(R);
    for (size_t i = 0; i < R; ++i) {
        blocks[i] = compress(Atilde, dec.subspaces[i].projection);
        // divisors must reflect the matrix actually solved against, not the
        // eigenvalues stored when the decomposition was first built
        spectra[i] = eigenvalues(blocks[i].A);
    }

    HomologicalSolution sol;
    sol.solver = opts.solver;
    sol.X = TorusMatFn(n, F.d());
    sol.min_divisor = std::numeric_limits<double>::infinity();

    for (const auto &[m, Fm] : FN.coeffs()) {
        if (m.is_zero()) continue;
        const cplx mu(0.0, 2.0 * M_PI * m.dot(dd.omega));
        const double mord = std::pow(m.order(), dd.tau);
        Mat Xm = Mat::Zero(n, n);
        const double fm_norm = op_norm(Fm);
        for (size_t i = 0; i < R; ++i) {
            for (size_t j = 0; j < R; ++j) {
                // Only blocks that actually carry mass are inverted; a
                // resonant divisor on a structurally empty block is exactly
                // what good periodicity promises and is not an error.
                const Mat G = blocks[i].Q * Fm * blocks[j].B;
                if (G.size() == 0 || op_norm(G) <= 1e-14 * fm_norm) continue;

                double divisor = std::numeric_limits<double>::infinity();
                for (cplx a : spectra[i])
                    for (cplx b : spectra[j])
                        divisor = std::min(divisor, std::abs(mu - (a - b)));
                sol.per_block_divisor_margin[{static_cast<int>(i), static_cast<int>(j), m}] =
                    divisor * mord;
                sol.min_divisor = std::min(sol.min_divisor, divisor);
                if (divisor < opts.guard_frac * kappa_prime / mord) {
                    char msg[256];
                    std::snprintf(msg, sizeof(msg),
                                  "solve_homological: divisor %.3e below guard %.3e at block "
                                  "(%zu,%zu), |m| = %.1f, |G| = %.3e despite DC precondition",
                                  divisor, opts.guard_frac * kappa_prime / mord, i, j, m.order(),
                                  op_norm(G));
                    throw std::runtime_error(msg);
                }
                int terms = 0;
                const Mat Y =
                    solve_compressed(blocks[i].A, blocks[j].A, mu, G, opts.solver, &terms);
                {
                    // certified resolvent norm for the truncation bookkeeping
                    const int ki = static_cast<int>(blocks[i].A.rows());
                    const int kj = static_cast<int>(blocks[j].A.rows());
                    const Mat K = mu * Mat::Identity(ki * kj, ki * kj) -
                                  kron(Mat::Identity(kj, kj), blocks[i].A) +
                                  kron(blocks[j].A.transpose(), Mat::Identity(ki, ki));
                    Eigen::JacobiSVD<Mat> svd(K);
                    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
                    if (smin > 0) {
                        const double amp = op_norm(dec.subspaces[i].projection) *
                                           op_norm(dec.subspaces[j].projection) / smin;
                        sol.resolvent_bound = std::max(sol.resolvent_bound, amp);
                    }
                }
                if (opts.cross_check) {
                    const HomSolver other = opts.solver == HomSolver::Direct
                                                ? HomSolver::NilpotentExpansion
                                                : HomSolver::Direct;
                    const Mat Y2 = solve_compressed(blocks[i].A, blocks[j].A, mu, G, other, &terms);
                    const double ref = std::max(op_norm(Y), 1e-300);
                    sol.cross_check_rel = std::max(sol.cross_check_rel, op_norm(Y - Y2) / ref);
                }
                sol.expansion_terms = std::max(sol.expansion_terms, terms);
                Xm += blocks[i].B * Y * blocks[j].Q;
            }
        }
        if (op_norm(Xm) > 0) sol.X.set_coeff(m, Xm);
    }
    // The dropped mass of F maps into X through the block resolvents.
    sol.X.add_budget(F.truncation_budget() * std::max(1.0, sol.resolvent_bound));

    // Fourier residual of the equation on the solved modes.
    for (const auto &[m, Fm] : FN.coeffs()) {
        if (m.is_zero()) continue;
        const Mat Xm = sol.X.coeff(m);
        const cplx mu(0.0, 2.0 * M_PI * m.dot(dd.omega));
        const Mat Rm = mu * Xm - (Atilde * Xm - Xm * Atilde) - Fm;
        sol.residual_norm = std::max(sol.residual_norm, op_norm(Rm));
    }
    return sol;
}

}  // namespace kamred
