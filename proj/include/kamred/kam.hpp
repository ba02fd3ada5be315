// The KAM almost-reducibility iteration: inductive step, double step with
// renormalization, the schedule arithmetic, and the full driver.
//
// The driver maintains U_k = Z_k Psi_k and the Fourier-data defect bound
// R_k of the conjugacy identity
//   d_omega U_k = (A + F) U_k - U_k (A_k + Ftilde_k) + defect_k,
// so the final grid residual of the published artifacts is certified by the
// accumulated truncation bookkeeping.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kamred/homological.hpp"
#include "kamred/renorm.hpp"

namespace kamred {

struct LedgerEntry {
    double value = 0.0;
    std::string provenance;
    std::string status;  // "fixed", "calibrated", "unspecified-in-source"
};

// All named constants of the estimates, configurable with provenance notes.
// Runtime decisions use measured quantities; these feed the diagnostic
// (sufficient-condition) checks and the schedule arithmetic only.
struct ConstantsLedger {
    std::map<std::string, LedgerEntry> entries;

    static ConstantsLedger defaults(int n);
    double value(const std::string &name) const;
    void set(const std::string &name, double v, const std::string &status = "configured");
};

enum class KamMode { Faithful, Practical };

struct KamParams {
    DiophantineData dd;
    GroupTag group = GroupTag::SLnR;
    KamMode mode = KamMode::Practical;
    int n = 2;
    double c_N = 2.0;          // practical-mode scale for N(eps)
    std::int64_t max_band = 64;
    double taylor_tol = 1e-30;
    double target_eps = 1e-9;
    int max_steps = 8;
    double r0 = 0.1;           // Gevrey parameter of the input
    double eps0_gate = 0.05;   // practical-mode smallness gate on S_r(F)
    double decay_factor = 10.0;  // practical-mode acceptance per double step
    ConstantsLedger constants = ConstantsLedger::defaults(2);
};

struct StepSizes {
    std::int64_t N;
    double kappa_dprime;
    double r_prime;
};
// N(eps), kappa''(eps), r'(eps) per mode; requires 0 < eps < 1.
StepSizes step_sizes(double eps, const KamParams &p);

// --- schedule arithmetic (log-space) -------------------------------------

struct ScheduleRow {
    int k;
    double log_eps;  // (5/2)^k log eps0
    double gamma;
    double r;        // 1 / |log eps_{k-1}|^2
    double b;
    double kappa;
    double log_a;    // log of the (epsk1) left-hand side
    bool epsk1_ok;
    bool epsk2_ok;
};

struct ScheduleResult {
    std::vector<ScheduleRow> rows;
    bool feasible = true;
    int first_violation = -1;
};

// Works with log eps_k = (5/2)^k log eps0 throughout, so astronomically
// small eps0 are exact.  r_0 must be supplied for the k = 0 row.
ScheduleResult schedule(double log_eps0, double gamma0, double b0, double C_prime, double tau,
                        double D2, int kmax, double r_initial = 1.0);

// --- step-level reports ---------------------------------------------------

struct NrPersistenceReport {
    bool cond1_ok;   // sufficient smallness condition with the ledger constant
    bool cond2_ok;   // N <= |log eps|^4 / C
    ResonanceReport direct;  // authoritative DC scan of Atilde + F_hat(0)
    bool pass() const { return direct.pass(); }
};

NrPersistenceReport nr_persistence_check(const Mat &Atilde, const Mat &Fhat0, double kappa_prime,
                                         std::int64_t N, std::int64_t N_dc, const KamParams &p,
                                         Lattice lat);

class StepFailure : public std::runtime_error {
  public:
    StepFailure(const std::string &hypothesis, const std::string &detail)
        : std::runtime_error("KAM step failure [" + hypothesis + "]: " + detail),
          hypothesis_(hypothesis) {}
    const std::string &hypothesis() const { return hypothesis_; }

  private:
    std::string hypothesis_;
};

struct InductiveOutcome {
    HomologicalSolution hom;  // X and diagnostics
    Mat Aprime;
    TorusMatFn Fprime;
    Decomposition dec_prime;
    std::vector<Frequency> labels_prime;
    TorusMatFn E;     // e^X as stored
    TorusMatFn Einv;  // e^{-X} as stored
    double eta_mass;  // measured defect of d e^X = (A~+F~) e^X - e^X (A'+F')
    DropStats drops;
    NrPersistenceReport nr;
};

// One application of the inductive lemma.  kappa_prime guards the divisors;
// N_dc caps the exhaustive scans (practical mode).
InductiveOutcome inductive_step(const Mat &Atilde, const Decomposition &dec,
                                const std::vector<Frequency> &labels, const TorusMatFn &Ftilde,
                                std::int64_t N, double kappa_prime, std::int64_t N_dc,
                                const KamParams &p);

struct KamReportRow {
    int k;
    double eps_k;
    double r_k;
    std::int64_t N_k;
    double kappa_k;
    double dc_margin;
    double S_Fk;
    double S_Zminus_id;
    double budget;
    double wall_time_ms;
    // json-report extras: the step's renormalization labels (trivial map) and
    // where the margin was attained
    std::vector<std::vector<int>> renorm_doubled_labels;
    std::vector<int> dc_margin_at;
};

struct KamState {
    int k = 0;
    Mat A;
    std::vector<TrivialMap> psi;  // accumulated renormalizations
    TorusMatFn U;                 // Z_k Psi_k as stored Fourier data
    TorusMatFn Ftilde;
    Decomposition dec;
    std::vector<Frequency> labels;
    PeriodicityLedger ledger;     // per-block periodicity flags for `labels`
    double eps = 0.0;
    double r = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    double b = 0.0;
    double defect = 0.0;  // R_k, the running conjugacy-identity defect bound
    double outer_mass = 0.0;  // |A_0| + mass(F_0), amplifier for drop charges
    bool single_doubling_ok = true;
};

// One double step (renormalization + two inductive steps).  Appends a report
// row; throws StepFailure with forensics when a hypothesis fails.
KamState double_step(const KamState &state, const KamParams &p, KamReportRow &row);

struct RunResult {
    bool reached_target = false;
    int steps = 0;
    TorusMatFn Z;      // accumulated conjugacy
    Mat A_eps;         // final constant part
    TorusMatFn Abar;   // reducible part as a function
    TorusMatFn Fbar;   // residual perturbation in the original frame
    TorusMatFn Psi;    // the reducing map of Abar (product of trivial maps)
    double budget = 0.0;         // certified residual bound incl. fl allowance
    double defect_raw = 0.0;     // truncation-only part of the bound
    std::vector<KamReportRow> rows;
    std::string status;
    Decomposition final_dec;     // decomposition carried out of the last step
    std::vector<Frequency> final_labels;
};

RunResult run(const Mat &A, const TorusMatFn &F, const KamParams &p);

}  // namespace kamred
