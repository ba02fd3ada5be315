#include "kamred/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kamred/groups.hpp"

namespace kamred {

namespace {

// Union-find over eigenvalue indices.
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); }
    void unite(int i, int j) {
        i = find(i);
        j = find(j);
        if (i != j) parent[std::max(i, j)] = std::min(i, j);
    }
};

// Orthonormal kernel basis by SVD with relative rank tolerance.
Mat kernel_basis(const Mat &M, int expected_dim, double rel_tol = 1e-10) {
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
    const auto &sv = svd.singularValues();
    const int n = static_cast<int>(M.cols());
    int rank = 0;
    const double floor = sv.size() ? sv(0) * rel_tol : 0.0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > floor) ++rank;
    int k = n - rank;
    // The construction fixes the kernel dimension; trust it when the
    // threshold is borderline.
    if (expected_dim > 0) k = expected_dim;
    return svd.matrixV().rightCols(k);
}

Decomposition build_from_clusters(const Mat &A, const std::vector<cplx> &eig,
                                  const std::vector<std::vector<int>> &clusters,
                                  double kappa_prime) {
    const int n = static_cast<int>(A.rows());
    Decomposition dec;
    dec.source = A;
    dec.gap = kappa_prime;

    if (clusters.size() == 1) {
        Subspace s;
        s.basis = Mat::Identity(n, n);
        s.projection = Mat::Identity(n, n);
        s.spectrum = eig;
        s.label = 0;
        dec.subspaces.push_back(std::move(s));
        return dec;
    }

    // Invariant subspace of a cluster = kernel of prod (A - lambda I) over the
    // cluster eigenvalues (with multiplicity), by SVD thresholding.
    std::vector<Mat> bases;
    for (const auto &cl : clusters) {
        Mat M = Mat::Identity(n, n);
        const double scale = std::max(1.0, op_norm(A));
        for (int idx : cl) M = (A - eig[idx] * Mat::Identity(n, n)) * M / scale;
        bases.push_back(kernel_basis(M, static_cast<int>(cl.size())));
    }

    // Projections from the block-diagonalizing similarity V = [B_1 ... B_s].
    Mat V(n, n);
    int col = 0;
    for (const auto &B : bases) {
        V.middleCols(col, B.cols()) = B;
        col += static_cast<int>(B.cols());
    }
    if (col != n)
        throw std::runtime_error("cluster_decomposition: subspace dimensions do not fill C^n");
    {
        Eigen::JacobiSVD<Mat> svd(V);
        const auto &sv = svd.singularValues();
        const double cond = sv(0) / std::max(sv(sv.size() - 1), 1e-300);
        if (cond > 1e12)
            throw std::runtime_error(
                "cluster_decomposition: block-diagonalizing similarity is ill-conditioned "
                "(condition number " + std::to_string(cond) + ")");
    }
    Eigen::PartialPivLU<Mat> lu(V);
    const Mat Vinv = lu.inverse();

    col = 0;
    for (size_t c = 0; c < clusters.size(); ++c) {
        const int k = static_cast<int>(bases[c].cols());
        Subspace s;
        s.basis = bases[c];
        s.projection = V.middleCols(col, k) * Vinv.middleRows(col, k);
        for (int idx : clusters[c]) s.spectrum.push_back(eig[idx]);
        s.label = static_cast<int>(c);
        dec.subspaces.push_back(std::move(s));
        col += k;
    }
    return dec;
}

std::vector<std::vector<int>> components(const std::vector<cplx> &eig, double thresh) {
    const int p = static_cast<int>(eig.size());
    UnionFind uf(p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            if (std::abs(eig[i] - eig[j]) <= thresh) uf.unite(i, j);
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < p; ++i) groups[uf.find(i)].push_back(i);
    std::vector<std::vector<int>> out;
    for (auto &[root, idx] : groups) out.push_back(std::move(idx));
    // Deterministic order: by (Re, Im) of the first eigenvalue in the cluster.
    std::sort(out.begin(), out.end(), [&](const auto &a, const auto &b) {
        const cplx ea = eig[a.front()], eb = eig[b.front()];
        if (ea.real() != eb.real()) return ea.real() < eb.real();
        return ea.imag() < eb.imag();
    });
    return out;
}

}  // namespace

std::vector<cplx> eigenvalues(const Mat &A) {
    Eigen::ComplexSchur<Mat> schur(A, false);
    if (schur.info() != Eigen::Success)
        throw std::runtime_error("eigenvalues: Schur iteration did not converge");
    std::vector<cplx> eig(A.rows());
    for (int i = 0; i < A.rows(); ++i) eig[i] = schur.matrixT()(i, i);
    std::sort(eig.begin(), eig.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return eig;
}

Mat Decomposition::compressed_block(int i) const {
    const auto &s = subspaces[i];
    return s.basis.adjoint() * source * s.basis;
}

double Decomposition::consistency_defect() const {
    const int nn = n();
    Mat sum = Mat::Zero(nn, nn);
    double worst = 0.0;
    for (size_t i = 0; i < subspaces.size(); ++i) {
        const Mat &P = subspaces[i].projection;
        sum += P;
        worst = std::max(worst, op_norm(source * P - P * source));
        for (size_t j = 0; j < subspaces.size(); ++j) {
            const Mat PQ = P * subspaces[j].projection;
            worst = std::max(worst, op_norm(i == j ? Mat(PQ - P) : PQ));
        }
    }
    worst = std::max(worst, op_norm(sum - Mat::Identity(nn, nn)));
    return worst;
}

Decomposition cluster_decomposition(const Mat &A, double kappa_prime) {
    if (kappa_prime < 0) throw std::invalid_argument("cluster_decomposition: kappa' >= 0 required");
    const auto eig = eigenvalues(A);
    return build_from_clusters(A, eig, components(eig, kappa_prime), kappa_prime);
}

Decomposition generalized_eigenspaces(const Mat &A) {
    const auto eig = eigenvalues(A);
    const double ident_tol = 1e-8 * (1.0 + op_norm(A));
    return build_from_clusters(A, eig, components(eig, ident_tol), 0.0);
}

Mat semisimple_part(const Mat &A) {
    const Decomposition dec = generalized_eigenspaces(A);
    Mat S = Mat::Zero(A.rows(), A.cols());
    for (const auto &s : dec.subspaces) {
        cplx mean = 0.0;
        for (cplx l : s.spectrum) mean += l;
        mean /= static_cast<double>(s.spectrum.size());
        S += mean * s.projection;
    }
    return S;
}

Mat nilpotent_part(const Mat &A) { return A - semisimple_part(A); }

void classify_decomposition(Decomposition &dec, double tol_scale) {
    const size_t R = dec.size();
    dec.conjugate_pairing.assign(R, -1);
    dec.symplectic_pairing.assign(R, -1);

    double pnorm_max = 1.0;
    for (const auto &s : dec.subspaces) pnorm_max = std::max(pnorm_max, op_norm(s.projection));

    // Conjugation permutes the subspaces iff conj(P_i) equals some P_j.
    dec.real_flag = true;
    for (size_t i = 0; i < R; ++i) {
        const Mat Pc = dec.subspaces[i].projection.conjugate();
        int partner = -1;
        for (size_t j = 0; j < R; ++j) {
            if (op_norm(Pc - dec.subspaces[j].projection) <= tol_scale * pnorm_max * pnorm_max) {
                partner = static_cast<int>(j);
                break;
            }
        }
        dec.conjugate_pairing[i] = partner;
        if (partner < 0) dec.real_flag = false;
    }

    // Unitary: pairwise orthogonal ranges.
    dec.unitary_flag = true;
    for (size_t i = 0; i < R && dec.unitary_flag; ++i)
        for (size_t j = 0; j < R; ++j) {
            if (i == j) continue;
            if (op_norm(dec.subspaces[i].basis.adjoint() * dec.subspaces[j].basis) >
                tol_scale * pnorm_max * pnorm_max) {
                dec.unitary_flag = false;
                break;
            }
        }

    // Symplectic: exactly one J-partner per subspace, tested on P* J P.
    dec.symplectic_flag = false;
    dec.symplectic_ambiguous = false;
    if (dec.n() % 2 == 0) {
        const Mat J = symplectic_J(dec.n());
        bool ok = true;
        for (size_t i = 0; i < R; ++i) {
            int partner = -1;
            int count = 0;
            for (size_t j = 0; j < R; ++j) {
                const double v = op_norm(dec.subspaces[i].projection.adjoint() * J *
                                         dec.subspaces[j].projection);
                if (v > tol_scale * pnorm_max * pnorm_max) {
                    ++count;
                    partner = static_cast<int>(j);
                }
            }
            if (count > 1) dec.symplectic_ambiguous = true;
            if (count != 1) {
                ok = false;
                break;
            }
            dec.symplectic_pairing[i] = partner;
        }
        dec.symplectic_flag = ok;
    }
}

Decomposition meet_decompositions(const Decomposition &a, const Decomposition &b, double tol) {
    const int n = a.n();
    if (b.n() != n) throw std::invalid_argument("meet_decompositions: dimension mismatch");
    const double scale = 1.0 + op_norm(a.source);
    for (const auto &sa : a.subspaces)
        for (const auto &sb : b.subspaces)
            if (op_norm(sa.projection * sb.projection - sb.projection * sa.projection) >
                tol * scale)
                throw std::runtime_error(
                    "meet_decompositions: projections do not commute; inputs are not "
                    "decompositions of a common matrix");

    Decomposition dec;
    dec.source = a.source;
    dec.gap = std::min(a.gap, b.gap);
    int label = 0;
    int total = 0;
    for (const auto &sa : a.subspaces) {
        for (const auto &sb : b.subspaces) {
            const Mat Q = sa.projection * sb.projection;
            Eigen::JacobiSVD<Mat> svd(Q, Eigen::ComputeThinU);
            int k = 0;
            const auto &sv = svd.singularValues();
            const double floor = sv.size() ? std::max(1e-12, sv(0) * 1e-10) : 0.0;
            for (int i = 0; i < sv.size(); ++i)
                if (sv(i) > floor) ++k;
            if (k == 0) continue;
            Subspace s;
            s.basis = svd.matrixU().leftCols(k);
            s.projection = Q;
            s.label = label++;
            const Mat Ak = s.basis.adjoint() * a.source * s.basis;
            for (cplx l : eigenvalues(Ak)) s.spectrum.push_back(l);
            dec.subspaces.push_back(std::move(s));
            total += k;
        }
    }
    if (total != n)
        throw std::runtime_error("meet_decompositions: intersections do not fill C^n");
    return dec;
}

}  // namespace kamred
