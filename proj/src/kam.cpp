#include "kamred/kam.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>

namespace kamred {

namespace {

constexpr double kFlNoise = 1e-13;  // rounding allowance scale for defect chains

double log_abs(double log_eps) { return std::abs(log_eps); }

TorusMatFn psi_product(const std::vector<TrivialMap> &psi, int n, int d) {
    TorusMatFn acc = TorusMatFn::identity(n, d);
    for (const auto &phi : psi) acc = convolve_product(acc, phi.to_torus_fn(), {});
    return acc;
}

TorusMatFn psi_inverse_product(const std::vector<TrivialMap> &psi, int n, int d) {
    TorusMatFn acc = TorusMatFn::identity(n, d);
    for (auto it = psi.rbegin(); it != psi.rend(); ++it)
        acc = convolve_product(acc, it->inverse().to_torus_fn(), {});
    return acc;
}

// Conjugation Psi f Psi^{-1} as a chain of exact trivial conjugations.
TorusMatFn psi_conjugate(const std::vector<TrivialMap> &psi, const TorusMatFn &f, bool inverse) {
    TorusMatFn g = f;
    if (!inverse) {
        for (auto it = psi.rbegin(); it != psi.rend(); ++it) g = trivial_conjugate(*it, g, false);
    } else {
        for (const auto &phi : psi) g = trivial_conjugate(phi, g, true);
    }
    return g;
}

// Assign each subspace of `meet` its parent in `parent_dec` (the subspace
// whose projection acts as the identity on it).
std::vector<int> meet_parents(const Decomposition &meet, const Decomposition &parent_dec) {
    std::vector<int> out(meet.size(), -1);
    for (size_t i = 0; i < meet.size(); ++i) {
        const Mat &B = meet.subspaces[i].basis;
        double best = -1.0;
        for (size_t j = 0; j < parent_dec.size(); ++j) {
            const double v = (parent_dec.subspaces[j].projection * B).norm();
            if (v > best) {
                best = v;
                out[i] = static_cast<int>(j);
            }
        }
    }
    return out;
}

}  // namespace

// --- constants ledger ------------------------------------------------------

ConstantsLedger ConstantsLedger::defaults(int n) {
    ConstantsLedger l;
    auto put = [&](const std::string &k, double v, const std::string &prov,
                   const std::string &st) { l.entries[k] = LedgerEntry{v, prov, st}; };
    put("C0", 16.0, "projection-norm constant, depends only on n", "calibrated");
    put("C_prime", 1.0, "homological estimate constant (n,d,tau); diagnostic ratio only",
        "unspecified-in-source");
    put("C_dprime", 1.0, "inductive smallness constant (tau,n); diagnostic only",
        "unspecified-in-source");
    put("C_tilde_prime", 1.0, "double-step smallness constant (n,d,kappa,tau); diagnostic only",
        "unspecified-in-source");
    put("C_PRG", 1.0, "iteration smallness constant (n,d,tau,kappa); faithful gate only",
        "unspecified-in-source");
    put("D", 2.0, "tail exponent (d)", "unspecified-in-source");
    put("D_prime", 12.0, "homological estimate exponent (n,d,tau)", "unspecified-in-source");
    put("D1", 10.0, "double-step exponent (n,d,tau)", "unspecified-in-source");
    put("D2", 10.0, "schedule exponent, equals D1 at its use sites", "unspecified-in-source");
    put("D3", 16.0 * 10.0 * std::max(n * (n + 1), 2), "iteration exponent 16 gamma0 D2", "derived");
    put("c", 1.0, "persistence smallness constant (n,tau); sufficient-condition diagnostic",
        "unspecified-in-source");
    put("c_d", 1.0, "log-vs-power threshold constant (d)", "unspecified-in-source");
    put("C_d", 1.0, "truncation tail constant (d)", "unspecified-in-source");
    const double c0 = 16.0;
    const double gbar =
        std::max(static_cast<double>(n * (n + 1)), std::ceil(std::log(c0) / (2.0 * std::log(2.0))));
    put("gamma_bar", gbar, "smallest class with C0^{1/(2 gamma_bar)} <= 2, at least n(n+1)",
        "derived");
    return l;
}

double ConstantsLedger::value(const std::string &name) const {
    auto it = entries.find(name);
    if (it == entries.end()) throw std::invalid_argument("ConstantsLedger: unknown constant " + name);
    return it->second.value;
}

void ConstantsLedger::set(const std::string &name, double v, const std::string &status) {
    entries[name].value = v;
    entries[name].status = status;
}

// --- schedule --------------------------------------------------------------

StepSizes step_sizes(double eps, const KamParams &p) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("step_sizes: 0 < eps < 1 required");
    const double d = static_cast<double>(p.dd.dim());
    const double l = std::abs(std::log(eps));
    const double l4 = l * l * l * l;
    double Nreal;
    if (p.mode == KamMode::Faithful) {
        const double c = 4.0 * std::exp(1.0) * d;
        Nreal = c * c * l4;
    } else {
        Nreal = p.c_N * l4;
    }
    StepSizes s;
    s.N = static_cast<std::int64_t>(std::ceil(Nreal));
    s.kappa_dprime = p.dd.kappa / std::pow(9.0 * p.n * static_cast<double>(s.N), p.dd.tau);
    s.r_prime = 1.0 / (l * l);
    return s;
}

ScheduleResult schedule(double log_eps0, double gamma0, double b0, double C_prime, double tau,
                        double D2, int kmax, double r_initial) {
    if (!(log_eps0 < 0.0)) throw std::invalid_argument("schedule: log eps0 < 0 required");
    ScheduleResult res;
    double log_eps = log_eps0;
    double log_eps_prev = log_eps0;  // row 0 uses r_initial
    double b = b0;
    double gamma = gamma0;
    for (int k = 0; k <= kmax; ++k) {
        ScheduleRow row;
        row.k = k;
        row.log_eps = log_eps;
        row.gamma = gamma;
        if (k == 0) {
            row.r = r_initial;
            row.b = b;
        } else {
            row.r = 1.0 / (log_abs(log_eps_prev) * log_abs(log_eps_prev));
            b += std::pow(log_abs(log_eps_prev), 4.0) / C_prime;
            row.b = b;
        }
        row.kappa = C_prime / std::pow(log_abs(log_eps), 4.0 * tau);
        // (epsk2): 4 / r_k <= |log eps_k|^2
        row.epsk2_ok = 4.0 / row.r <= log_abs(log_eps) * log_abs(log_eps) + 1e-12;
        // (epsk1): ((b_k+1)/(kappa_k r_{k+1}))^{D2 gamma_k} eps_k <= C_prime
        const double log_eps_next = 2.5 * log_eps;
        const double r_next = 1.0 / (log_abs(log_eps) * log_abs(log_eps));
        row.log_a =
            D2 * gamma * (std::log(b + 1.0) - std::log(row.kappa) - std::log(r_next)) + log_eps;
        row.epsk1_ok = row.log_a <= std::log(C_prime) + 1e-12;
        if ((!row.epsk1_ok || !row.epsk2_ok) && res.first_violation < 0) {
            res.first_violation = k;
            res.feasible = false;
        }
        res.rows.push_back(row);
        log_eps_prev = log_eps;
        log_eps = log_eps_next;
        gamma *= 2.0;
    }
    return res;
}

// --- persistence check -------------------------------------------------------

NrPersistenceReport nr_persistence_check(const Mat &Atilde, const Mat &Fhat0, double kappa_prime,
                                         std::int64_t N, std::int64_t N_dc, const KamParams &p,
                                         Lattice lat) {
    NrPersistenceReport rep;
    const double eps_t = op_norm(Fhat0);
    const double d = static_cast<double>(p.dd.dim());
    const double C = 1.0 / std::pow(4.0 * std::exp(1.0) * d, 2.0);
    const double c = p.constants.value("c");
    if (eps_t == 0.0) {
        rep.cond1_ok = true;
        rep.cond2_ok = true;
    } else {
        rep.cond1_ok = eps_t <= c * std::pow(std::pow(C, p.dd.tau) * kappa_prime /
                                                 (1.0 + op_norm(Atilde)),
                                             2.0 * p.n);
        rep.cond2_ok = static_cast<double>(N) <= std::pow(std::abs(std::log(eps_t)), 4.0) / C;
    }
    rep.direct = spectrum_dc_check(Mat(Atilde + Fhat0), p.dd, 0.75 * kappa_prime,
                                   std::max<std::int64_t>(N_dc, 1), lat);
    return rep;
}

// --- inductive step ----------------------------------------------------------

InductiveOutcome inductive_step(const Mat &Atilde, const Decomposition &dec,
                                const std::vector<Frequency> &labels, const TorusMatFn &Ftilde,
                                std::int64_t N, double kappa_prime, std::int64_t N_dc,
                                const KamParams &p) {
    const int d = Ftilde.d();
    const Lattice lat = is_real_group(p.group) ? Lattice::HalfInteger : Lattice::Integer;
    InductiveOutcome out;

    out.hom = solve_homological(Atilde, dec, Ftilde, N, p.dd, kappa_prime, {});
    const TorusMatFn &X = out.hom.X;
    if (X.total_mass() >= 1.0)
        throw StepFailure("perturbative-regime", "S(X) >= 1; homological solution too large");

    const Mat F0 = Ftilde.coeff(Frequency::zero(d));
    out.Aprime = Atilde + F0;

    OpOptions conv;
    conv.max_doubled_band = 2 * p.max_band;
    conv.stats = &out.drops;
    // Coefficients far below the quadratic scale F*X cannot influence the
    // remainder at working precision; dropping them keeps supports lean and
    // their mass stays accounted in the budgets.
    conv.abs_floor = 1e-15 * std::max(X.stored_mass(), 1e-30) *
                     std::min(1.0, std::max(Ftilde.stored_mass(), 1e-30));
    out.E = exp_of(X, conv, p.taylor_tol);
    out.Einv = exp_of(X * cplx(-1.0, 0.0), conv, p.taylor_tol);

    // Remainder via the homogeneous rearrangement: every term carries at
    // least one small factor, so rounding stays relative to the small scale.
    auto [FN, tail_mass] = truncate_and_tail(Ftilde, N);
    TorusMatFn tailfn(Ftilde.n(), d);
    for (const auto &[m, M] : Ftilde.coeffs())
        if (m.doubled_order() > 2 * N) tailfn.set_coeff(m, M);
    TorusMatFn Gn = FN.budgetless();
    Gn.set_coeff(Frequency::zero(d), Mat::Zero(Ftilde.n(), Ftilde.n()));
    const TorusMatFn G0 = TorusMatFn::constant(F0, d);
    const TorusMatFn Id = TorusMatFn::identity(Ftilde.n(), d);

    TorusMatFn T2(Ftilde.n(), d);
    {
        TorusMatFn S = Gn;
        TorusMatFn Xpow = X;
        double kfact = 1.0;
        const double gn_scale = std::max(1.0, Gn.total_mass());
        for (int k = 1; k <= 40; ++k) {
            S = convolve_product(X, S, conv) + convolve_product(Gn, Xpow, conv);
            kfact *= (k + 1);
            const TorusMatFn term = S * cplx(1.0 / kfact, 0.0);
            T2 += term;
            if (term.total_mass() <= p.taylor_tol * gn_scale) break;
            if (k < 40) Xpow = convolve_product(Xpow, X, conv);
        }
    }

    TorusMatFn Fp = convolve_product(out.Einv, tailfn, conv);
    Fp += convolve_product(convolve_product(out.Einv, Ftilde, conv), out.E - Id, conv);
    Fp += convolve_product(out.Einv - Id, G0, conv);
    Fp -= convolve_product(out.Einv, T2, conv);
    Fp.prune(1e-16, &out.drops);
    out.Fprime = Fp;

    // Measured defect of d_omega e^X = (A~ + F~) e^X - e^X (A' + F') on the
    // stored data; measurement drops are counted into the defect.
    {
        DropStats ms;
        OpOptions mc;
        mc.max_doubled_band = 2 * p.max_band;
        mc.stats = &ms;
        mc.rel_floor = 0.0;
        mc.abs_floor = 0.0;
        const TorusMatFn Es = out.E.budgetless();
        const TorusMatFn AF = TorusMatFn::constant(Atilde, d) + Ftilde.budgetless();
        const TorusMatFn APF = TorusMatFn::constant(out.Aprime, d) + Fp.budgetless();
        TorusMatFn defect = derivative_omega(Es, p.dd.omega);
        defect -= convolve_product(AF, Es, mc);
        defect += convolve_product(Es, APF, mc);
        out.eta_mass = defect.stored_mass() + ms.plain;
    }

    auto merged = merge_periodicity(out.Fprime, dec, labels, Atilde, out.Aprime);
    out.dec_prime = std::move(merged.dec);
    out.labels_prime = std::move(merged.labels);

    out.nr = nr_persistence_check(Atilde, F0, kappa_prime, N, N_dc, p, lat);
    if (!out.nr.pass())
        throw StepFailure("nr-persistence",
                          "spectrum of A' = A~ + F_hat(0) fails the direct DC check at 3 kappa'/4");
    return out;
}

// --- double step ---------------------------------------------------------------

KamState double_step(const KamState &state, const KamParams &p, KamReportRow &row) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = state.Ftilde.n(), d = state.Ftilde.d();

    const double eps = std::min(gevrey_upper_bound(state.Ftilde, std::min(state.r, 1.0)), 0.999);
    row.k = state.k + 1;
    row.eps_k = eps;
    row.r_k = state.r;

    if (eps > 0 && 4.0 / std::pow(std::log(eps), 2.0) > state.r + 1e-15)
        throw StepFailure("petitesse2",
                          "4/|log eps|^2 = " + std::to_string(4.0 / std::pow(std::log(eps), 2.0)) +
                              " exceeds r = " + std::to_string(state.r));

    const StepSizes sz = step_sizes(eps, p);
    const std::int64_t N_dc =
        p.mode == KamMode::Practical ? std::min<std::int64_t>(sz.N, p.max_band) : sz.N;
    row.N_k = sz.N;
    row.kappa_k = sz.kappa_dprime;

    RenormOptions ropts;
    ropts.kappa_dprime = sz.kappa_dprime;  // section-6.3 convention
    ropts.dc_order = N_dc;
    Renormalization ren = build_renormalization(state.A, p.dd, sz.N, p.group, ropts);
    {
        const auto valid = trivial_map_validity(ren.phi, p.group);
        if (!valid.ok)
            throw StepFailure("group-validity", "renormalization map invalid: " + valid.detail);
    }
    row.dc_margin = ren.dc.margin;
    row.dc_margin_at = ren.dc.margin_at.doubled;
    for (const auto &l : ren.phi.labels) row.renorm_doubled_labels.push_back(l.doubled);
    if (ren.norm_change > 4.0 * M_PI * static_cast<double>(sz.N) + 1e-9)
        throw StepFailure("renorm-norm", "|A~ - A| exceeds 4 pi N");

    // Meet of the carried decomposition with the renormalization clustering.
    Decomposition meetd = meet_decompositions(state.dec, ren.phi.decomposition);
    const std::vector<int> pa = meet_parents(meetd, state.dec);
    const std::vector<int> pphi = meet_parents(meetd, ren.phi.decomposition);
    std::vector<Frequency> labels1(meetd.size());
    for (size_t i = 0; i < meetd.size(); ++i)
        labels1[i] = state.labels[pa[i]] - ren.phi.labels[pphi[i]];
    classify_decomposition(meetd);

    const TorusMatFn F1 = trivial_conjugate(ren.phi, state.Ftilde, /*inverse=*/true);
    if (!good_periodicity_check(F1, meetd, labels1).all_ok)
        throw StepFailure("periodicity",
                          "conjugated perturbation loses good periodicity w.r.t. the meet");

    // Two inductive steps: at (eps, kappa'') and at (eps^{9/5}, 3 kappa''/4).
    InductiveOutcome st1 =
        inductive_step(ren.Atilde, meetd, labels1, F1, sz.N, sz.kappa_dprime, N_dc, p);
    InductiveOutcome st2 = inductive_step(st1.Aprime, st1.dec_prime, st1.labels_prime, st1.Fprime,
                                          sz.N, 0.75 * sz.kappa_dprime, N_dc, p);

    // Norm growth per property (00G).
    if (op_norm(st2.Aprime) >
        op_norm(state.A) + std::pow(eps, 11.0 / 12.0) + 8.0 * M_PI * static_cast<double>(sz.N) + 1e-9)
        throw StepFailure("norm-growth", "|A''| grew beyond |A| + eps^{11/12} + 8 pi N");

    // Single-doubling discipline; complex/unitary groups stay on T^d.
    KamState next;
    next.single_doubling_ok = state.single_doubling_ok;
    if (!allows_half_integer_labels(p.group)) {
        for (const auto &m : st2.labels_prime)
            if (!m.is_integral())
                throw StepFailure("periodicity", "half-integer label under a complex/unitary tag");
        for (const auto &[m, M] : st2.Fprime.coeffs())
            if (!m.is_integral())
                throw StepFailure("periodicity",
                                  "half-integer frequency under a complex/unitary tag");
    }

    // Conjugacy accumulation U <- U Phi e^X e^{X''} with the defect chain.
    const TorusMatFn phifn = ren.phi.to_torus_fn();
    const TorusMatFn Afn = TorusMatFn::constant(state.A, d);
    const TorusMatFn Atfn = TorusMatFn::constant(ren.Atilde, d);
    const double defect_phi =
        (derivative_omega(phifn, p.dd.omega) - convolve_product(Afn, phifn, {}) +
         convolve_product(phifn, Atfn, {}))
            .budgetless()
            .total_mass();
    const double fl_conj = kFlNoise * state.Ftilde.stored_mass() *
                           phifn.stored_mass() * phifn.stored_mass();

    double R = state.defect;
    TorusMatFn U = convolve_product(state.U, phifn, {});
    R = R * phifn.stored_mass() + state.U.stored_mass() * (defect_phi + fl_conj);

    const double frame1 = op_norm(st1.Aprime) + st1.Fprime.stored_mass();
    const double frame2 = op_norm(st2.Aprime) + st2.Fprime.stored_mass();

    DropStats w1;
    OpOptions uconv;
    uconv.max_doubled_band = 4 * p.max_band;
    uconv.stats = &w1;
    const double MU1 = U.stored_mass();
    U = convolve_product(U, st1.E, uconv);
    R = R * st1.E.stored_mass() + MU1 * st1.eta_mass + w1.weighted +
        w1.plain * (state.outer_mass + frame1);

    DropStats w2;
    uconv.stats = &w2;
    const double MU2 = U.stored_mass();
    U = convolve_product(U, st2.E, uconv);
    R = R * st2.E.stored_mass() + MU2 * st2.eta_mass + w2.weighted +
        w2.plain * (state.outer_mass + frame2);

    next.k = state.k + 1;
    next.A = st2.Aprime;
    next.psi = state.psi;
    next.psi.push_back(ren.phi);
    next.U = U;
    next.Ftilde = st2.Fprime;
    next.dec = st2.dec_prime;
    next.labels = st2.labels_prime;
    next.ledger = PeriodicityLedger::from_labels(next.labels);
    next.single_doubling_ok = next.single_doubling_ok && next.ledger.single_doubling;
    next.r = sz.r_prime;
    next.kappa = sz.kappa_dprime;
    next.gamma = state.gamma * 2.0;
    next.b = state.b + std::pow(std::abs(std::log(eps)), 4.0);
    next.defect = R;
    next.outer_mass = state.outer_mass;

    const double eps_next = gevrey_upper_bound(next.Ftilde, std::min(next.r, 1.0));
    next.eps = eps_next;
    row.S_Fk = eps_next;
    row.budget = R;

    if (p.mode == KamMode::Faithful) {
        if (eps_next > std::pow(eps, 2.5))
            throw StepFailure("eps-5/2", "S(F') exceeds eps^{5/2} in faithful mode");
    } else if (eps_next > eps / p.decay_factor) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "double step reduced S(F) by less than the required factor: %.6g -> %.6g "
                      "(stored %.6g, budget %.6g)",
                      eps, eps_next, next.Ftilde.stored_mass(), next.Ftilde.truncation_budget());
        throw StepFailure("decay", msg);
    }

    // Z_k - Id mass for the report.
    {
        const TorusMatFn psiinv = psi_inverse_product(next.psi, n, d);
        const TorusMatFn Z = convolve_product(next.U, psiinv, {});
        row.S_Zminus_id = (Z - TorusMatFn::identity(n, d)).budgetless().total_mass();
    }

    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return next;
}

// --- driver ---------------------------------------------------------------------

RunResult run(const Mat &A, const TorusMatFn &F, const KamParams &p) {
    const int n = F.n(), d = F.d();
    RunResult res;

    // Gates: integral support (good periodicity w.r.t. L_A with zero labels),
    // algebra membership, smallness.
    for (const auto &[m, M] : F.coeffs())
        if (!m.is_integral())
            throw StepFailure("gate", "input perturbation has a half-integer frequency");
    const auto amem = algebra_membership(F, p.group, 1e-8);
    if (!amem.ok)
        throw StepFailure("gate", "perturbation is not " + to_string(p.group) +
                                      "-algebra valued (violation " +
                                      std::to_string(amem.violation) + ", " + amem.detail + ")");
    const auto amemA = algebra_membership(A, p.group, 1e-8);
    if (!amemA.ok)
        throw StepFailure("gate", "constant part is not in the Lie algebra of " +
                                      to_string(p.group));

    const double S0 = F.support_size() ? gevrey_upper_bound(F, p.r0) : F.truncation_budget();
    if (p.mode == KamMode::Faithful) {
        const double gamma0 = std::max(p.constants.value("gamma_bar"),
                                       static_cast<double>(p.n * (p.n + 1)));
        const double D3 = 16.0 * gamma0 * p.constants.value("D2");
        const double gate = std::pow(p.constants.value("C_PRG") / (op_norm(A) + 1.0), D3);
        if (S0 > gate)
            throw StepFailure("gate", "faithful smallness gate (petitesse3) fails: S_r(F) = " +
                                          std::to_string(S0));
    } else if (S0 > p.eps0_gate) {
        throw StepFailure("gate", "S_r(F) = " + std::to_string(S0) +
                                      " exceeds the practical gate " + std::to_string(p.eps0_gate));
    }

    KamState state;
    state.A = A;
    state.U = TorusMatFn::identity(n, d);
    state.Ftilde = F;
    state.dec = generalized_eigenspaces(A);
    classify_decomposition(state.dec);
    state.labels.assign(state.dec.size(), Frequency::zero(d));
    state.ledger = PeriodicityLedger::from_labels(state.labels);
    state.eps = S0;
    state.r = p.r0;
    state.kappa = p.dd.kappa;
    state.gamma = std::max(p.constants.value("gamma_bar"), static_cast<double>(p.n * (p.n + 1)));
    state.b = op_norm(A);
    state.outer_mass = op_norm(A) + F.stored_mass();

    res.rows.push_back({0, S0, p.r0, 0, p.dd.kappa, 0.0, S0, 0.0, 0.0, 0.0});

    while (state.k < p.max_steps && state.eps > p.target_eps && state.Ftilde.support_size() > 0) {
        KamReportRow row{};
        state = double_step(state, p, row);
        res.rows.push_back(row);
    }
    res.steps = state.k;
    res.reached_target = state.eps <= p.target_eps;
    res.status = res.reached_target ? "target reached"
                                    : "stopped after " + std::to_string(state.k) + " steps";

    // Published artifacts.
    const TorusMatFn psifn = psi_product(state.psi, n, d);
    const TorusMatFn psiinv = psi_inverse_product(state.psi, n, d);
    DropStats wz;
    OpOptions zconv;
    zconv.stats = &wz;
    res.Z = convolve_product(state.U, psiinv, zconv);
    res.A_eps = state.A;
    const TorusMatFn Akfn = TorusMatFn::constant(state.A, d);
    res.Abar = convolve_product(derivative_omega(psifn, p.dd.omega), psiinv, {}) +
               convolve_product(convolve_product(psifn, Akfn, {}), psiinv, {});
    res.Fbar = psi_conjugate(state.psi, state.Ftilde, false);
    res.Psi = psifn;
    res.final_dec = state.dec;
    res.final_labels = state.labels;

    // Final defect: R |Psi^{-1}| + |U| (measured exactness defects of the
    // trivial-map identities) + weighted drops of the Z assembly.
    const double m1 = (derivative_omega(psiinv, p.dd.omega) +
                       convolve_product(convolve_product(psiinv, derivative_omega(psifn, p.dd.omega), {}),
                                        psiinv, {}))
                          .budgetless()
                          .total_mass();
    const double m2 = (convolve_product(psiinv, psifn, {}) - TorusMatFn::identity(n, d))
                          .budgetless()
                          .total_mass() *
                      (op_norm(state.A) + state.Ftilde.stored_mass()) * psiinv.stored_mass();
    const double frame_out = state.outer_mass + res.Abar.stored_mass() + res.Fbar.stored_mass();
    res.defect_raw = state.defect * psiinv.stored_mass() +
                     state.U.stored_mass() * (m1 + m2) + wz.weighted + wz.plain * frame_out;
    const double fl_allow = kFlNoise * (1.0 + res.Z.stored_mass()) * (1.0 + frame_out) *
                            std::sqrt(static_cast<double>(res.Z.support_size()) + 1.0);
    res.budget = res.defect_raw + fl_allow;
    if (!res.rows.empty()) res.rows.back().budget = res.budget;
    return res;
}

}  // namespace kamred
