// Classical groups handled by the engine and the membership predicates for
// their Lie algebras and for the groups themselves.  All algebra conditions
// are linear, so functions are checked coefficientwise.

#pragma once

#include <string>

#include "kamred/fourier.hpp"

namespace kamred {

enum class GroupTag { GLnC, GLnR, SLnR, SpnR, On, Un };

std::string to_string(GroupTag g);
GroupTag group_tag_from_string(const std::string &s);

// Real groups force the half-integer lattice through renormalization;
// gl(n,C) and u(n) stay on the integer lattice (no period doubling).
bool is_real_group(GroupTag g);
bool allows_half_integer_labels(GroupTag g);

// The standard symplectic form matrix J = [[0,-I],[I,0]] (n even).
Mat symplectic_J(int n);

struct MembershipResult {
    bool ok;
    double violation;  // worst deviation found
    std::string detail;
};

// Lie algebra membership of a constant matrix, within tol.
MembershipResult algebra_membership(const Mat &A, GroupTag g, double tol = 1e-9);
// Coefficientwise algebra membership of a function value.
MembershipResult algebra_membership(const TorusMatFn &f, GroupTag g, double tol = 1e-9);

// Group membership of a constant matrix (realness, det for SL, M^T J M = J
// for Sp, orthogonality/unitarity for O/U).
MembershipResult group_membership(const Mat &M, GroupTag g, double tol = 1e-9);
// Max violation of a function over a uniform grid on the double torus.
MembershipResult group_membership(const TorusMatFn &f, GroupTag g, double tol = 1e-9,
                                  int grid_per_dim = 16);

}  // namespace kamred
