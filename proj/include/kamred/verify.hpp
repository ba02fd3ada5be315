// Independent dynamical verification: RK4 integration of the cocycle ODE,
// conjugacy residuals measured on a grid, and the cross-check that the
// conjugated flows actually agree.

#pragma once

#include <cstdint>
#include <vector>

#include "kamred/groups.hpp"

namespace kamred {

struct CocycleTrajectory {
    RVec theta0;
    std::vector<double> times;
    std::vector<Mat> values;  // X^t(theta0)
    double h = 0.0;
};

// Classical fixed-step RK4 on dX/dt = Afn(theta0 + t omega) X, X^0 = Id.
CocycleTrajectory integrate_cocycle(const TorusMatFn &Afn, const RVec &omega, const RVec &theta0,
                                    double T, double h);

// Max over a grid of |d_omega Z - (A + F) Z + Z Bbar| with d_omega Z exact
// from the Fourier data.
double conjugacy_residual(const Mat &A, const TorusMatFn &F, const TorusMatFn &Z,
                          const TorusMatFn &Bbar, const RVec &omega, int grid_per_dim = 32);

// Integrates X^t for A+F and Y^t for Abar+Fbar and returns
// max_t |X^t - Z(theta0 + t omega) Y^t Z(theta0)^{-1}|.
double reducibility_cross_check(const Mat &A, const TorusMatFn &F, const TorusMatFn &Z,
                                const TorusMatFn &Abar, const TorusMatFn &Fbar, const RVec &omega,
                                const RVec &theta0, double T, double h);

// Bundle of stored run artifacts and the checks the verifier runs on them.
struct RunArtifacts {
    Mat A;            // original constant part
    TorusMatFn F;     // original perturbation
    TorusMatFn Z;     // accumulated conjugacy
    TorusMatFn Abar;  // reducible part
    TorusMatFn Fbar;  // residual perturbation
    TorusMatFn Psi;   // reducing map of Abar
    Mat A_eps;        // final constant
    double budget;    // certified residual bound from the run
    GroupTag group = GroupTag::SLnR;
    RVec omega;
};

struct VerifyOptions {
    double T = 10.0;
    double h = 1e-3;
    int grid = 32;
    double cross_tol = 1e-4;
    bool run_cross_check = true;  // the RK4 check is the slow part
};

struct VerifyResult {
    double conjugacy_residual = 0.0;
    bool conjugacy_ok = false;
    double cross_check = 0.0;
    bool cross_check_ok = true;
    double group_violation = 0.0;
    bool group_ok = false;
    double reducibility_defect = 0.0;  // d Psi - Abar Psi + Psi A_eps mass
    bool reducibility_ok = false;
    bool pass() const {
        return conjugacy_ok && cross_check_ok && group_ok && reducibility_ok;
    }
};

// Replays the stored artifacts through every dynamical check: grid conjugacy
// residual against the stored budget, RK4 cross-check of the two cocycles,
// group membership of Z, and reducibility of Abar by Psi.
VerifyResult verify_artifacts(const RunArtifacts &art, const VerifyOptions &opts = {});

}  // namespace kamred
