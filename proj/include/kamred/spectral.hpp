// Eigen-structure of constant matrices: clusterings of the spectrum at a gap
// kappa', generalized eigenspaces, spectral projections, nilpotent parts and
// classification of decompositions (real / symplectic / unitary).

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kamred/fourier.hpp"

namespace kamred {

struct Subspace {
    Mat basis;                   // n x k, orthonormal columns spanning L
    Mat projection;              // spectral projection onto L
    std::vector<cplx> spectrum;  // eigenvalues assigned to L (with multiplicity)
    int label = 0;

    int dim() const { return static_cast<int>(basis.cols()); }
};

struct Decomposition {
    std::vector<Subspace> subspaces;
    Mat source;        // the matrix being decomposed
    double gap = 0.0;  // the kappa' used

    bool real_flag = false;
    bool symplectic_flag = false;
    bool symplectic_ambiguous = false;  // two J-partners above tolerance
    bool unitary_flag = false;
    // pairing[i] = index of the partner subspace, or -1 when not paired
    std::vector<int> conjugate_pairing;
    std::vector<int> symplectic_pairing;

    int n() const { return static_cast<int>(source.rows()); }
    size_t size() const { return subspaces.size(); }
    // Matrix of A compressed to subspace i in its orthonormal basis.
    Mat compressed_block(int i) const;
    // Worst deviation from sum P = I, P_i P_j = delta_ij P_i, [A, P_i] = 0.
    double consistency_defect() const;
};

// Eigenvalues of A (with multiplicity), Schur-based.
std::vector<cplx> eigenvalues(const Mat &A);

// The finest A-invariant decomposition whose cluster spectra are pairwise
// separated by more than kappa' (connected components of the |a-b| <= kappa'
// graph on the spectrum).
Decomposition cluster_decomposition(const Mat &A, double kappa_prime);

// One subspace per distinct eigenvalue (numerical identity threshold).
Decomposition generalized_eigenspaces(const Mat &A);

// Jordan-Chevalley nilpotent part A - A_semisimple.
Mat nilpotent_part(const Mat &A);
Mat semisimple_part(const Mat &A);

// Fill the real/symplectic/unitary flags and pairings of a decomposition.
// Throws on ambiguous symplectic pairing.
void classify_decomposition(Decomposition &dec, double tol_scale = 1e-8);

// Common refinement: nonzero intersections of subspaces of two decompositions
// of the same matrix.  Requires commuting projections.
Decomposition meet_decompositions(const Decomposition &a, const Decomposition &b,
                                  double tol = 1e-8);

}  // namespace kamred
