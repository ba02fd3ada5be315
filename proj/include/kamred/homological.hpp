// Blockwise Fourier solution of the homological equation
//   d_omega X = [Atilde, X] + F^N - F_hat(0),   X_hat(0) = 0,
// with two independent solver paths per block: a direct vectorized solve and
// the finite nilpotent expansion A_D^{-1} (I + A_N A_D^{-1} + ...).

#pragma once

#include <cstdint>
#include <map>
#include <tuple>

#include "kamred/diophantine.hpp"
#include "kamred/spectral.hpp"

namespace kamred {

enum class HomSolver { Direct, NilpotentExpansion };

struct HomologicalSolution {
    TorusMatFn X;
    double residual_norm = 0.0;  // max coefficient norm of the Fourier residual
    // (block_i, block_j, frequency) -> divisor margin |mu - (a-a')| |m|^tau
    std::map<std::tuple<int, int, Frequency>, double> per_block_divisor_margin;
    HomSolver solver = HomSolver::Direct;
    double cross_check_rel = 0.0;  // direct vs expansion, max relative gap
    int expansion_terms = 0;       // correction terms summed per block solve
    double min_divisor = 0.0;      // smallest divisor value met while solving
    double resolvent_bound = 0.0;  // largest certified block-resolvent norm
};

struct HomOptions {
    HomSolver solver = HomSolver::Direct;
    bool cross_check = true;  // always run the second path and compare
    // Internal consistency guard: divisors below guard_frac * kappa'/|m|^tau
    // after a DC pass indicate a mis-assembled operator.
    double guard_frac = 0.1;
};

// Solves one block: X with X = P_L X P_{L'} and
//   (mu - A_{L,L'}) X = P_L B P_{L'},  A_{L,L'} M = Atilde P_L M - M P_{L'} Atilde.
// expansion_terms (optional out) reports the series length used.
Mat block_resolvent(const Mat &Atilde, const Mat &P_L, const Mat &P_Lp, cplx mu, const Mat &B,
                    HomSolver method, int *expansion_terms = nullptr);

// Full solve over all modes 0 < |m| <= N present in F and all block pairs of
// the decomposition.  Requires a DC-verified spectrum at (kappa', N).
HomologicalSolution solve_homological(const Mat &Atilde, const Decomposition &dec,
                                      const TorusMatFn &F, std::int64_t N,
                                      const DiophantineData &dd, double kappa_prime,
                                      const HomOptions &opts = {});

}  // namespace kamred
