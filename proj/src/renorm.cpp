#include "kamred/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace kamred {

TorusMatFn TrivialMap::to_torus_fn() const {
    if (labels.empty()) throw std::invalid_argument("TrivialMap: no labels");
    const int d = labels[0].dim();
    TorusMatFn f(decomposition.n(), d);
    for (size_t i = 0; i < labels.size(); ++i)
        f.add_coeff(labels[i], decomposition.subspaces[i].projection);
    return f;
}

TrivialMap TrivialMap::inverse() const {
    TrivialMap t = *this;
    for (auto &m : t.labels) m = -m;
    return t;
}

std::int64_t TrivialMap::max_doubled_label() const {
    std::int64_t b = 0;
    for (const auto &m : labels) b = std::max<std::int64_t>(b, m.doubled_order());
    return b;
}

TorusMatFn trivial_conjugate(const TrivialMap &phi, const TorusMatFn &f, bool inverse) {
    if (phi.decomposition.n() != f.n())
        throw std::invalid_argument("trivial_conjugate: dimension mismatch");
    const size_t R = phi.labels.size();
    TorusMatFn r(f.n(), f.d());
    for (const auto &[m, M] : f.coeffs()) {
        for (size_t i = 0; i < R; ++i) {
            const Mat left = phi.decomposition.subspaces[i].projection * M;
            for (size_t j = 0; j < R; ++j) {
                Frequency shift = phi.labels[i] - phi.labels[j];
                if (inverse) shift = -shift;
                r.add_coeff(m + shift, left * phi.decomposition.subspaces[j].projection);
            }
        }
    }
    double pm = 0.0;
    for (const auto &s : phi.decomposition.subspaces) pm += op_norm(s.projection);
    r.add_budget(f.truncation_budget() * pm * pm);
    r.prune();
    return r;
}

MembershipResult trivial_map_validity(const TrivialMap &phi, GroupTag g) {
    const auto &dec = phi.decomposition;
    const auto &labels = phi.labels;
    const size_t R = labels.size();

    if (!allows_half_integer_labels(g)) {
        for (const auto &m : labels)
            if (!m.is_integral())
                return {false, 1.0, "half-integer label on a complex/unitary group"};
    }

    if (is_real_group(g)) {
        if (!dec.real_flag) return {false, 1.0, "decomposition is not real"};
        for (size_t i = 0; i < R; ++i) {
            const int j = dec.conjugate_pairing[i];
            if (j < 0 || !(labels[i] + labels[j]).is_zero())
                return {false, 1.0, "real pairing m_L = -m_{conj L} violated"};
        }
    }
    if (g == GroupTag::SpnR) {
        if (!dec.symplectic_flag)
            return {false, 1.0, dec.symplectic_ambiguous ? "ambiguous symplectic pairing"
                                                         : "decomposition is not symplectic"};
        for (size_t i = 0; i < R; ++i) {
            const int j = dec.symplectic_pairing[i];
            if (j < 0 || !(labels[i] - labels[j]).is_zero())
                return {false, 1.0, "symplectic pairing m_L = m_{L'} violated"};
        }
    }
    if (g == GroupTag::On || g == GroupTag::Un) {
        if (!dec.unitary_flag) return {false, 1.0, "decomposition is not unitary"};
    }

    if (is_real_group(g)) {
        // Sample the reconstructed map for realness.
        const TorusMatFn f = phi.to_torus_fn();
        double worst = 0.0;
        RVec theta(f.d());
        for (int s = 0; s < 17; ++s) {
            for (int i = 0; i < f.d(); ++i) theta[i] = 2.0 * ((s * 7 + 3 * i) % 17) / 17.0;
            worst = std::max(worst, f.evaluate(theta).imag().cwiseAbs().maxCoeff());
        }
        if (worst > 1e-9) return {false, worst, "reconstructed map is not real on a sample grid"};
        return {true, worst, ""};
    }
    return {true, 0.0, ""};
}

PhiBound phi_gevrey_bound(const TrivialMap &phi, double r_prime, double C, double C0,
                          std::int64_t N) {
    double s = 0.0;
    for (size_t i = 0; i < phi.labels.size(); ++i)
        s += op_norm(phi.decomposition.subspaces[i].projection) *
             std::exp(2.0 * M_PI * phi.labels[i].order() * r_prime * r_prime);
    const int n = phi.decomposition.n();
    const double anil = op_norm(nilpotent_part(phi.decomposition.source));
    const double kpp = phi.decomposition.gap > 0 ? phi.decomposition.gap : 1.0;
    const double symbolic = n * C * C0 * std::pow((1.0 + anil) / kpp, n * (n + 1)) *
                            std::exp(4.0 * M_PI * r_prime * r_prime * static_cast<double>(N));
    return {s, symbolic};
}

PeriodicityLedger PeriodicityLedger::from_labels(const std::vector<Frequency> &labels) {
    PeriodicityLedger led;
    led.labels = labels;
    const size_t R = labels.size();
    led.block_integral.assign(R, std::vector<bool>(R, true));
    for (size_t i = 0; i < R; ++i)
        for (size_t j = 0; j < R; ++j)
            led.block_integral[i][j] = (labels[i] - labels[j]).is_integral();
    return led;
}

PeriodicityCheck good_periodicity_check(const TorusMatFn &f, const Decomposition &dec,
                                        const std::vector<Frequency> &labels,
                                        double coeff_tol_scale) {
    const size_t R = dec.size();
    PeriodicityCheck out;
    out.block_ok.assign(R, std::vector<bool>(R, true));
    double lead = 0.0;
    for (const auto &[m, M] : f.coeffs()) lead = std::max(lead, op_norm(M));
    const double tol = coeff_tol_scale * (1.0 + lead);
    for (const auto &[m, M] : f.coeffs()) {
        for (size_t i = 0; i < R; ++i)
            for (size_t j = 0; j < R; ++j) {
                if (!out.block_ok[i][j]) continue;
                if ((m - (labels[i] - labels[j])).is_integral()) continue;
                const double v = op_norm(dec.subspaces[i].projection * M *
                                         dec.subspaces[j].projection);
                if (v > tol) {
                    out.block_ok[i][j] = false;
                    out.all_ok = false;
                }
            }
    }
    return out;
}

PeriodicityCheck good_periodicity_check(const TorusMatFn &f, const TrivialMap &phi,
                                        double coeff_tol_scale) {
    return good_periodicity_check(f, phi.decomposition, phi.labels, coeff_tol_scale);
}

MergedDecomposition merge_periodicity(const TorusMatFn &H, const Decomposition &dec,
                                      const std::vector<Frequency> &labels, const Mat &A,
                                      const Mat &Aprime, double block_tol_scale) {
    const size_t R = dec.size();
    if (labels.size() != R) throw std::invalid_argument("merge_periodicity: label count mismatch");
    const Mat D = Aprime - A;
    const double scale = std::max(op_norm(D), 1e-30);

    // Hypothesis: every coupled block of Aprime - A must be a T^d-periodic
    // block of H, which under good periodicity means an integral label
    // difference.
    const auto per = good_periodicity_check(H, dec, labels);
    std::vector<int> parent(R);
    for (size_t i = 0; i < R; ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int i) {
        return parent[i] == i ? i : parent[i] = find(parent[i]);
    };
    for (size_t i = 0; i < R; ++i)
        for (size_t j = 0; j < R; ++j) {
            if (i == j) continue;
            const double v =
                op_norm(dec.subspaces[i].projection * D * dec.subspaces[j].projection);
            if (v <= block_tol_scale * scale) continue;
            if (!per.block_ok[i][j] || !(labels[i] - labels[j]).is_integral())
                throw std::runtime_error(
                    "merge_periodicity: block (" + std::to_string(i) + "," + std::to_string(j) +
                    ") of A'-A couples subspaces whose H-block is not T^d-periodic");
            const int a = find(static_cast<int>(i)), b = find(static_cast<int>(j));
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }

    std::map<int, std::vector<int>> comps;
    for (size_t i = 0; i < R; ++i) comps[find(static_cast<int>(i))].push_back(static_cast<int>(i));

    MergedDecomposition out;
    out.dec.source = Aprime;
    out.dec.gap = dec.gap;
    int label = 0;
    for (const auto &[root, members] : comps) {
        Subspace s;
        Mat P = Mat::Zero(dec.n(), dec.n());
        int dim = 0;
        for (int i : members) dim += dec.subspaces[i].dim();
        Mat B(dec.n(), dim);
        int col = 0;
        for (int i : members) {
            P += dec.subspaces[i].projection;
            B.middleCols(col, dec.subspaces[i].dim()) = dec.subspaces[i].basis;
            col += dec.subspaces[i].dim();
        }
        Eigen::HouseholderQR<Mat> qr(B);
        s.basis = qr.householderQ() * Mat::Identity(dec.n(), dim);
        s.projection = P;
        s.label = label++;
        // refresh the spectrum against the new matrix
        s.spectrum = eigenvalues(Mat(s.basis.adjoint() * Aprime * s.basis));
        out.dec.subspaces.push_back(std::move(s));
        out.labels.push_back(labels[members.front()]);
    }
    classify_decomposition(out.dec);
    return out;
}

// ---- renormalization construction ---------------------------------------

namespace {

// Union-find with signs: m_i = sign_i * m_{root(i)}; a sign conflict within
// one component forces its label to zero.
struct SignedGroups {
    std::vector<int> parent;
    std::vector<int> sign;  // sign relative to parent
    std::vector<bool> zero;

    explicit SignedGroups(size_t R) : parent(R), sign(R, 1), zero(R, false) {
        for (size_t i = 0; i < R; ++i) parent[i] = static_cast<int>(i);
    }
    std::pair<int, int> root_of(int i) const {
        int s = 1, j = i;
        while (parent[j] != j) {
            s *= sign[j];
            j = parent[j];
        }
        return {j, s};
    }
    void relate(int i, int j, int s) {  // impose m_i = s * m_j
        auto [ri, si] = root_of(i);
        auto [rj, sj] = root_of(j);
        if (ri == rj) {
            if (si != s * sj) zero[ri] = true;  // m = -m forces zero
            return;
        }
        if (ri > rj) {
            // keep the smaller index as root: rewrite m_{ri} = t m_{rj}
            parent[ri] = rj;
            sign[ri] = si * s * sj;
            zero[rj] = zero[rj] || zero[ri];
        } else {
            parent[rj] = ri;
            sign[rj] = sj * s * si;
            zero[ri] = zero[ri] || zero[rj];
        }
    }
};

struct Candidate {
    double score;
    Frequency m;
    bool operator<(const Candidate &o) const {
        if (score != o.score) return score < o.score;
        if (m.doubled_order() != o.m.doubled_order())
            return m.doubled_order() < o.m.doubled_order();
        return m.doubled < o.m.doubled;
    }
};

}  // namespace

Renormalization build_renormalization(const Mat &A, const DiophantineData &dd, std::int64_t N,
                                      GroupTag g, const RenormOptions &opts) {
    if (N < 2) throw std::invalid_argument("build_renormalization: N >= 2 required");
    const int n = static_cast<int>(A.rows());
    const int d = dd.dim();
    const double kpp = opts.kappa_dprime > 0
                           ? opts.kappa_dprime
                           : dd.kappa / (n * std::pow(8.0 * static_cast<double>(N), dd.tau));
    const std::int64_t N_dc = opts.dc_order > 0 ? std::min(opts.dc_order, N) : N;
    const Lattice lat = is_real_group(g) ? Lattice::HalfInteger : Lattice::Integer;

    Decomposition dec = cluster_decomposition(A, kpp);
    classify_decomposition(dec);
    const size_t R = dec.size();

    // Pairing constraints on the labels.
    SignedGroups groups(R);
    if (is_real_group(g)) {
        if (!dec.real_flag)
            throw std::runtime_error(
                "build_renormalization: clustering of a real-group matrix is not real");
        for (size_t i = 0; i < R; ++i)
            groups.relate(static_cast<int>(i), dec.conjugate_pairing[i], -1);
    }
    if (g == GroupTag::SpnR) {
        if (!dec.symplectic_flag)
            throw std::runtime_error(
                "build_renormalization: clustering is not symplectic" +
                std::string(dec.symplectic_ambiguous ? " (ambiguous pairing)" : ""));
        for (size_t i = 0; i < R; ++i)
            groups.relate(static_cast<int>(i), dec.symplectic_pairing[i], +1);
    }

    std::vector<int> root(R), rsign(R);
    std::vector<int> reps;
    for (size_t i = 0; i < R; ++i) {
        auto [r, s] = groups.root_of(static_cast<int>(i));
        root[i] = r;
        rsign[i] = s;
        if (r == static_cast<int>(i) && !groups.zero[r]) reps.push_back(r);
    }
    std::vector<int> rep_index(R, -1);
    for (size_t gi = 0; gi < reps.size(); ++gi) rep_index[reps[gi]] = static_cast<int>(gi);

    // Candidate labels per free representative, ranked by how well they cancel
    // the cluster's mean rotation Im(alpha)/2pi.
    const std::int64_t search_order = std::min<std::int64_t>(2 * N, 2 * N_dc);
    const Lattice label_lat =
        allows_half_integer_labels(g) ? Lattice::HalfInteger : Lattice::Integer;
    std::vector<std::vector<Candidate>> cands(reps.size());
    for (size_t gi = 0; gi < reps.size(); ++gi) {
        const auto &spec = dec.subspaces[reps[gi]].spectrum;
        double rho = 0.0;
        for (cplx l : spec) rho += l.imag();
        rho /= (2.0 * M_PI * static_cast<double>(spec.size()));
        std::set<Candidate> best;
        auto consider = [&](const Frequency &m) {
            best.insert({std::abs(rho - m.dot(dd.omega)), m});
            if (static_cast<int>(best.size()) > opts.candidates_per_cluster)
                best.erase(std::prev(best.end()));
        };
        consider(Frequency::zero(d));
        for_each_frequency(d, search_order, label_lat, consider);
        std::vector<Candidate> list(best.begin(), best.end());
        const Frequency z = Frequency::zero(d);
        if (std::none_of(list.begin(), list.end(), [&](const Candidate &c) { return c.m == z; }))
            list.push_back({std::abs(rho), z});
        // Trials go smallest label first (zero leading); the score only
        // ranks candidates of equal size.  Shifts happen when forced by the
        // DC check, never for marginal score gains.
        std::sort(list.begin(), list.end(), [](const Candidate &a, const Candidate &b) {
            if (a.m.doubled_order() != b.m.doubled_order())
                return a.m.doubled_order() < b.m.doubled_order();
            if (a.score != b.score) return a.score < b.score;
            return a.m.doubled < b.m.doubled;
        });
        cands[gi] = std::move(list);
    }

    // Walk label combinations ordered by (largest label, summed score, lex);
    // the first combination whose shifted spectrum passes the exhaustive DC
    // check wins.
    using Key = std::tuple<std::int64_t, double, std::vector<int>>;
    auto make_key = [&](const std::vector<int> &idx) {
        std::int64_t mx = 0;
        double sum = 0.0;
        for (size_t gi = 0; gi < idx.size(); ++gi) {
            mx = std::max<std::int64_t>(mx, cands[gi][idx[gi]].m.doubled_order());
            sum += cands[gi][idx[gi]].score;
        }
        return Key{mx, sum, idx};
    };
    std::set<Key> queue;
    std::set<std::vector<int>> seen;
    const std::vector<int> start(reps.size(), 0);
    queue.insert(make_key(start));
    seen.insert(start);

    double best_margin = -1.0;
    std::int64_t tried = 0;

    while (!queue.empty() && tried < opts.max_combinations) {
        const auto key = *queue.begin();
        queue.erase(queue.begin());
        const std::vector<int> idx = std::get<2>(key);
        ++tried;

        std::vector<Frequency> labels(R, Frequency::zero(d));
        bool in_range = true;
        for (size_t i = 0; i < R && in_range; ++i) {
            if (groups.zero[root[i]]) continue;
            const int gi = rep_index[root[i]];
            const Frequency m = cands[gi][idx[gi]].m;
            labels[i] = rsign[i] > 0 ? m : -m;
            if (labels[i].doubled_order() > 4 * N) in_range = false;
        }

        if (in_range) {
            // Verify the shifted spectrum together with its conjugate: over
            // the real groups the spectrum is conjugation-symmetric anyway,
            // and for gl(n,C)/u(n) this catches rotation resonances
            // 2 Im(alpha) ~ 2 pi <m, omega> that plain differences miss.
            std::vector<cplx> shifted;
            for (size_t i = 0; i < R; ++i) {
                const cplx shift(0.0, 2.0 * M_PI * labels[i].dot(dd.omega));
                for (cplx l : dec.subspaces[i].spectrum) {
                    shifted.push_back(l - shift);
                    shifted.push_back(std::conj(l - shift));
                }
            }
            ResonanceReport rep = spectrum_dc_check(shifted, dd, kpp, N_dc, lat);
            best_margin = std::max(best_margin, rep.margin);
            if (rep.pass()) {
                Renormalization out;
                out.phi.decomposition = dec;
                out.phi.labels = labels;
                out.kappa_dprime = kpp;
                out.dc = std::move(rep);
                out.order = N;
                Mat At = A;
                for (size_t i = 0; i < R; ++i)
                    At -= cplx(0.0, 2.0 * M_PI * labels[i].dot(dd.omega)) *
                          dec.subspaces[i].projection;
                out.Atilde = At;
                out.norm_change = op_norm(At - A);
                return out;
            }
        }

        if (reps.empty()) break;
        for (size_t gi = 0; gi < reps.size(); ++gi) {
            std::vector<int> nxt = idx;
            if (++nxt[gi] >= static_cast<int>(cands[gi].size())) continue;
            if (seen.insert(nxt).second) queue.insert(make_key(nxt));
        }
    }

    throw std::runtime_error(
        "build_renormalization: no admissible labels within |m_L| <= 2N; best margin " +
        std::to_string(best_margin) + " against kappa'' = " + std::to_string(kpp));
}

}  // namespace kamred
