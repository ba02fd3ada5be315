// Trivial maps Phi = sum_L e^{2 i pi <m_L, theta>} P_L, construction of
// renormalizations of order N (shifting cluster spectra by lattice
// frequencies until the small-divisor condition is restored), conjugation by
// trivial maps, and the periodicity bookkeeping that guarantees a single
// period doubling suffices over the real groups.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kamred/diophantine.hpp"
#include "kamred/groups.hpp"
#include "kamred/spectral.hpp"

namespace kamred {

struct TrivialMap {
    Decomposition decomposition;
    std::vector<Frequency> labels;  // one per subspace

    TorusMatFn to_torus_fn() const;
    TrivialMap inverse() const;  // labels negated
    std::int64_t max_doubled_label() const;
};

// Block (L,L') of Phi f Phi^-1 at frequency m equals
// P_L f_hat(m - (m_L - m_{L'})) P_{L'}: an exact frequency relabeling.
// With inverse = true computes Phi^-1 f Phi.
TorusMatFn trivial_conjugate(const TrivialMap &phi, const TorusMatFn &f, bool inverse = false);

// Label constraints for the tag: m_L = -m_{conj(L)} over real groups,
// m_L = m_{J(L)} on symplectic pairs, integral labels for GL(n,C)/U(n).
// For real tags also samples the reconstructed map for realness.
MembershipResult trivial_map_validity(const TrivialMap &phi, GroupTag g);

// Computable surrogate sum_L |P_L| e^{2 pi |m_L| r'^2} together with the
// symbolic ledger bound n C C0 ((1+|A_N|)/kappa'')^{n(n+1)} e^{4 pi r'^2 N}.
struct PhiBound {
    double surrogate;
    double symbolic;
};
PhiBound phi_gevrey_bound(const TrivialMap &phi, double r_prime, double C = 1.0, double C0 = 1.0,
                          std::int64_t N = 0);

// Per-block periodicity flags relative to a decomposition and its labels.
struct PeriodicityLedger {
    std::vector<Frequency> labels;             // per subspace
    std::vector<std::vector<bool>> block_integral;  // m_L - m_{L'} integral?
    bool single_doubling = true;               // all labels in (1/2)Z^d

    static PeriodicityLedger from_labels(const std::vector<Frequency> &labels);
};

// Block (L,L') passes iff every frequency in the support of P_L f P_{L'}
// lies in Z^d + (m_L - m_{L'}).
struct PeriodicityCheck {
    std::vector<std::vector<bool>> block_ok;
    bool all_ok = true;
};
PeriodicityCheck good_periodicity_check(const TorusMatFn &f, const Decomposition &dec,
                                        const std::vector<Frequency> &labels,
                                        double coeff_tol_scale = 1e-12);
PeriodicityCheck good_periodicity_check(const TorusMatFn &f, const TrivialMap &phi,
                                        double coeff_tol_scale = 1e-12);

// Coarsens dec by merging subspaces coupled by nonzero blocks of Aprime - A,
// keeping good periodicity of H.  Hypothesis checked numerically: every
// coupled block of H must be T^d-periodic.  Returns the coarsened
// decomposition and the merged labels.
struct MergedDecomposition {
    Decomposition dec;
    std::vector<Frequency> labels;
};
MergedDecomposition merge_periodicity(const TorusMatFn &H, const Decomposition &dec,
                                      const std::vector<Frequency> &labels, const Mat &A,
                                      const Mat &Aprime, double block_tol_scale = 1e-12);

// Renormalization of A of order N: Phi trivial w.r.t. the kappa''-clustering
// of A with |m_L| <= 2N, Atilde = A - sum_L 2 i pi <m_L, omega> P_L, and the
// shifted spectrum passes the exhaustive DC check at (kappa'', N_dc).
struct Renormalization {
    TrivialMap phi;
    Mat Atilde;
    double kappa_dprime;
    ResonanceReport dc;     // verification scan of the shifted spectrum
    double norm_change;     // |Atilde - A|
    std::int64_t order;     // N
};

struct RenormOptions {
    // kappa'' override; <= 0 means the default kappa / (n (8N)^tau).
    double kappa_dprime = 0.0;
    // Exhaustive-scan order; <= 0 means N itself (practical callers cap it).
    std::int64_t dc_order = 0;
    int candidates_per_cluster = 32;
    std::int64_t max_combinations = 4096;
};

Renormalization build_renormalization(const Mat &A, const DiophantineData &dd, std::int64_t N,
                                      GroupTag g, const RenormOptions &opts = {});

}  // namespace kamred
