#include "kamred/groups.hpp"

#include <cmath>

namespace kamred {

std::string to_string(GroupTag g) {
    switch (g) {
        case GroupTag::GLnC: return "GL(n,C)";
        case GroupTag::GLnR: return "GL(n,R)";
        case GroupTag::SLnR: return "SL(n,R)";
        case GroupTag::SpnR: return "Sp(n,R)";
        case GroupTag::On: return "O(n)";
        case GroupTag::Un: return "U(n)";
    }
    return "?";
}

GroupTag group_tag_from_string(const std::string &s) {
    if (s == "GL(n,C)" || s == "gl(n,C)" || s == "glC" || s == "gl(2,C)") return GroupTag::GLnC;
    if (s == "GL(n,R)" || s == "gl(n,R)" || s == "glR" || s == "gl(2,R)") return GroupTag::GLnR;
    if (s == "SL(n,R)" || s == "sl(n,R)" || s == "sl" || s == "sl(2,R)") return GroupTag::SLnR;
    if (s == "Sp(n,R)" || s == "sp(n,R)" || s == "sp" || s == "sp(2,R)") return GroupTag::SpnR;
    if (s == "O(n)" || s == "o(n)" || s == "o" || s == "o(2)") return GroupTag::On;
    if (s == "U(n)" || s == "u(n)" || s == "u" || s == "u(2)") return GroupTag::Un;
    throw std::invalid_argument("unknown group tag: " + s);
}

bool is_real_group(GroupTag g) {
    return g == GroupTag::GLnR || g == GroupTag::SLnR || g == GroupTag::SpnR || g == GroupTag::On;
}

bool allows_half_integer_labels(GroupTag g) { return is_real_group(g); }

Mat symplectic_J(int n) {
    if (n % 2 != 0) throw std::invalid_argument("symplectic_J: n must be even");
    const int h = n / 2;
    Mat J = Mat::Zero(n, n);
    J.topRightCorner(h, h) = -Mat::Identity(h, h);
    J.bottomLeftCorner(h, h) = Mat::Identity(h, h);
    return J;
}

namespace {

double realness_violation(const Mat &A) { return A.imag().cwiseAbs().maxCoeff(); }

MembershipResult combine(double v, double tol, const std::string &what) {
    return MembershipResult{v <= tol, v, v <= tol ? "" : what};
}

}  // namespace

MembershipResult algebra_membership(const Mat &A, GroupTag g, double tol) {
    const int n = static_cast<int>(A.rows());
    switch (g) {
        case GroupTag::GLnC:
            return MembershipResult{true, 0.0, ""};
        case GroupTag::GLnR:
            return combine(realness_violation(A), tol, "not real");
        case GroupTag::SLnR: {
            const double v = std::max(realness_violation(A), std::abs(A.trace()));
            return combine(v, tol, "not real traceless");
        }
        case GroupTag::SpnR: {
            if (n % 2 != 0) return MembershipResult{false, 1.0, "odd dimension"};
            const Mat J = symplectic_J(n);
            const double v =
                std::max(realness_violation(A), op_norm(A.transpose() * J + J * A));
            return combine(v, tol, "X^T J + J X != 0");
        }
        case GroupTag::On:
            return combine(std::max(realness_violation(A), op_norm(A + A.transpose())), tol,
                           "not real skew-symmetric");
        case GroupTag::Un:
            return combine(op_norm(A + A.adjoint()), tol, "not skew-Hermitian");
    }
    return MembershipResult{false, 1.0, "?"};
}

MembershipResult algebra_membership(const TorusMatFn &f, GroupTag g, double tol) {
    // All listed algebra conditions are linear; realness couples m and -m,
    // the rest act coefficient by coefficient.
    double worst = 0.0;
    std::string detail;
    const bool needs_real = is_real_group(g);
    for (const auto &[m, M] : f.coeffs()) {
        if (needs_real) {
            const double v = (f.coeff(-m) - M.conjugate()).cwiseAbs().maxCoeff();
            if (v > worst) {
                worst = v;
                detail = "realness pairing";
            }
        }
        Mat cond;
        switch (g) {
            case GroupTag::GLnC:
            case GroupTag::GLnR:
                continue;
            case GroupTag::SLnR: {
                const double v = std::abs(M.trace());
                if (v > worst) {
                    worst = v;
                    detail = "trace";
                }
                continue;
            }
            case GroupTag::SpnR: {
                const Mat J = symplectic_J(f.n());
                cond = M.transpose() * J + J * M;
                break;
            }
            case GroupTag::On:
                cond = M + M.transpose();
                break;
            case GroupTag::Un:
                cond = M + f.coeff(-m).adjoint();
                break;
        }
        const double v = op_norm(cond);
        if (v > worst) {
            worst = v;
            detail = "linear condition";
        }
    }
    return MembershipResult{worst <= tol, worst, worst <= tol ? "" : detail};
}

MembershipResult group_membership(const Mat &M, GroupTag g, double tol) {
    const int n = static_cast<int>(M.rows());
    switch (g) {
        case GroupTag::GLnC: {
            const double v = std::abs(M.determinant()) < 1e-14 ? 1.0 : 0.0;
            return combine(v, tol, "singular");
        }
        case GroupTag::GLnR:
            return combine(realness_violation(M), tol, "not real");
        case GroupTag::SLnR: {
            const double v = std::max(realness_violation(M), std::abs(M.determinant() - cplx(1.0)));
            return combine(v, tol, "det != 1 or not real");
        }
        case GroupTag::SpnR: {
            const Mat J = symplectic_J(n);
            const double v =
                std::max(realness_violation(M), op_norm(M.transpose() * J * M - J));
            return combine(v, tol, "M^T J M != J");
        }
        case GroupTag::On: {
            const double v = std::max(realness_violation(M),
                                      op_norm(M.transpose() * M - Mat::Identity(n, n)));
            return combine(v, tol, "M^T M != I");
        }
        case GroupTag::Un: {
            const double v = op_norm(M.adjoint() * M - Mat::Identity(n, n));
            return combine(v, tol, "M* M != I");
        }
    }
    return MembershipResult{false, 1.0, "?"};
}

MembershipResult group_membership(const TorusMatFn &f, GroupTag g, double tol, int grid_per_dim) {
    double worst = 0.0;
    std::string detail;
    const int d = f.d();
    std::vector<int> idx(d, 0);
    RVec theta(d);
    while (true) {
        for (int i = 0; i < d; ++i) theta[i] = 2.0 * idx[i] / grid_per_dim;
        auto res = group_membership(f.evaluate(theta), g, tol);
        if (res.violation > worst) {
            worst = res.violation;
            detail = res.detail;
        }
        int i = 0;
        for (; i < d; ++i) {
            if (++idx[i] < grid_per_dim) break;
            idx[i] = 0;
        }
        if (i == d) break;
    }
    return MembershipResult{worst <= tol, worst, detail};
}

}  // namespace kamred
