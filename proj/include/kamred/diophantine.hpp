// Diophantine and spectral small-divisor conditions, checked exhaustively up
// to a finite order with a fixed enumeration (shells of |m| ascending,
// lexicographic within each shell) so that reported margins are reproducible.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kamred/fourier.hpp"

namespace kamred {

struct DiophantineData {
    RVec omega;
    double kappa;
    double tau;

    DiophantineData() : kappa(0), tau(1) {}
    DiophantineData(RVec w, double k, double t);
    int dim() const { return static_cast<int>(omega.size()); }
};

enum class Lattice { Integer, HalfInteger };

struct Resonance {
    Frequency m;
    double value;  // |<m,omega>| or |alpha - alpha' - 2 i pi <m,omega>|
    double bound;  // kappa / |m|^tau at this m
};

struct ResonanceReport {
    std::vector<Resonance> violations;
    double margin = 0.0;    // min over checked m of value * |m|^tau
    Frequency margin_at;    // where the margin is attained
    std::int64_t order = 0; // the N that was scanned
    bool pass() const { return violations.empty(); }
};

// Enumerate lattice frequencies with 0 < |m| <= N in the fixed order; calls
// fn(m).  Doubled order runs over shells 1..2N (HalfInteger) or 2,4,..,2N
// (Integer).
void for_each_frequency(int d, std::int64_t N, Lattice lat,
                        const std::function<void(const Frequency &)> &fn);

// Checks |<m,omega>| >= kappa/|m|^tau for all integer 0 < |m| <= N.
ResonanceReport diophantine_check(const DiophantineData &dd, std::int64_t N);

// Checks |alpha - alpha' - 2 i pi <m,omega>| >= kappa'/|m|^tau over all
// ordered eigenvalue pairs of A and all lattice m with 0 < |m| <= N.
ResonanceReport spectrum_dc_check(const Mat &A, const DiophantineData &dd, double kappa_prime,
                                  std::int64_t N, Lattice lat);

// Same check for an explicit spectrum (used by the renormalization search).
ResonanceReport spectrum_dc_check(const std::vector<cplx> &spectrum, const DiophantineData &dd,
                                  double kappa_prime, std::int64_t N, Lattice lat);

}  // namespace kamred
