#include "kamred/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "kamred/parallel.hpp"
#include "kamred/spectral.hpp"

namespace kamred {

DiophantineData::DiophantineData(RVec w, double k, double t) : omega(std::move(w)), kappa(k), tau(t) {
    if (omega.size() < 1) throw std::invalid_argument("DiophantineData: d >= 1 required");
    if (omega.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
        throw std::invalid_argument("DiophantineData: sup|omega_i| <= 1 required");
    if (!(kappa > 0.0 && kappa < 1.0))
        throw std::invalid_argument("DiophantineData: kappa in (0,1) required");
    const double d = static_cast<double>(omega.size());
    // boundary tau = max(1, d-1) is accepted; only the finite checks run here
    if (tau < std::max(1.0, d - 1.0) - 1e-12)
        throw std::invalid_argument("DiophantineData: tau >= max(1, d-1) required");
}

namespace {

// Lexicographic enumeration of doubled vectors with given shell sum.
void enumerate_shell(std::vector<int> &h, int pos, int remaining, int step,
                     const std::function<void(const Frequency &)> &fn) {
    const int d = static_cast<int>(h.size());
    if (pos == d - 1) {
        if (remaining % step != 0) return;
        if (remaining == 0) {
            h[pos] = 0;
            fn(Frequency(h));
        } else {
            h[pos] = -remaining;
            fn(Frequency(h));
            h[pos] = remaining;
            fn(Frequency(h));
        }
        return;
    }
    for (int v = -remaining; v <= remaining; v += step) {
        h[pos] = v;
        enumerate_shell(h, pos + 1, remaining - std::abs(v), step, fn);
    }
}

void enumerate_shell_range(int d, std::int64_t s_begin, std::int64_t s_end, Lattice lat,
                           const std::function<void(const Frequency &)> &fn) {
    const int step = lat == Lattice::Integer ? 2 : 1;
    std::vector<int> h(d, 0);
    for (std::int64_t s = s_begin; s < s_end; ++s) {
        if (lat == Lattice::Integer && (s % 2) != 0) continue;
        enumerate_shell(h, 0, static_cast<int>(s), step, fn);
    }
}

struct ScanResult {
    double margin = std::numeric_limits<double>::infinity();
    Frequency margin_at;
    std::vector<Resonance> violations;
};

}  // namespace

void for_each_frequency(int d, std::int64_t N, Lattice lat,
                        const std::function<void(const Frequency &)> &fn) {
    enumerate_shell_range(d, 1, 2 * N + 1, lat, fn);
}

ResonanceReport diophantine_check(const DiophantineData &dd, std::int64_t N) {
    if (N < 1) throw std::invalid_argument("diophantine_check: N >= 1 required");
    ResonanceReport rep;
    rep.order = N;
    double best = std::numeric_limits<double>::infinity();
    for_each_frequency(dd.dim(), N, Lattice::Integer, [&](const Frequency &m) {
        const double value = std::abs(m.dot(dd.omega));
        const double ord = m.order();
        const double scaled = value * std::pow(ord, dd.tau);
        if (scaled < best) {
            best = scaled;
            rep.margin_at = m;
        }
        if (value < dd.kappa / std::pow(ord, dd.tau))
            rep.violations.push_back({m, value, dd.kappa / std::pow(ord, dd.tau)});
    });
    rep.margin = best;
    return rep;
}

ResonanceReport spectrum_dc_check(const std::vector<cplx> &spectrum, const DiophantineData &dd,
                                  double kappa_prime, std::int64_t N, Lattice lat) {
    if (N < 1) throw std::invalid_argument("spectrum_dc_check: N >= 1 required");
    if (!(kappa_prime > 0.0 && kappa_prime <= dd.kappa))
        throw std::invalid_argument("spectrum_dc_check: kappa' in (0, kappa] required");

    // The divisor only sees differences alpha - alpha'; deduplicate them.
    std::vector<cplx> diffs;
    for (cplx a : spectrum)
        for (cplx b : spectrum) diffs.push_back(a - b);
    std::sort(diffs.begin(), diffs.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());

    const std::int64_t shells = 2 * N;
    std::vector<ScanResult> partial(static_cast<size_t>(std::min<std::int64_t>(max_threads(), std::max<std::int64_t>(shells, 1))) + 1);
    parallel_chunks(shells, [&](int w, std::int64_t b, std::int64_t e) {
        ScanResult &res = partial[w];
        enumerate_shell_range(static_cast<int>(dd.omega.size()), b + 1, e + 1, lat,
                              [&](const Frequency &m) {
            const double ord = m.order();
            const double bound = kappa_prime / std::pow(ord, dd.tau);
            const cplx tw(0.0, 2.0 * M_PI * m.dot(dd.omega));
            for (cplx dl : diffs) {
                const double value = std::abs(dl - tw);
                const double scaled = value * std::pow(ord, dd.tau);
                if (scaled < res.margin) {
                    res.margin = scaled;
                    res.margin_at = m;
                }
                if (value < bound) res.violations.push_back({m, value, bound});
            }
        });
    });

    ResonanceReport rep;
    rep.order = N;
    rep.margin = std::numeric_limits<double>::infinity();
    for (const auto &res : partial) {
        if (res.margin < rep.margin) {
            rep.margin = res.margin;
            rep.margin_at = res.margin_at;
        }
        rep.violations.insert(rep.violations.end(), res.violations.begin(), res.violations.end());
    }
    return rep;
}

ResonanceReport spectrum_dc_check(const Mat &A, const DiophantineData &dd, double kappa_prime,
                                  std::int64_t N, Lattice lat) {
    return spectrum_dc_check(eigenvalues(A), dd, kappa_prime, N, lat);
}

}  // namespace kamred
