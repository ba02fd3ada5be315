#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kamred/kam.hpp"
#include "kamred/verify.hpp"
#include "props.hpp"

using namespace kamred;

TEST_CASE("RK4: constant scalar coefficient matches the closed form") {
    TorusMatFn Afn = TorusMatFn::constant(cplx(0, 1) * Mat::Identity(1, 1), 1);
    RVec omega(1), theta0(1);
    omega << 0.618;
    theta0 << 0.0;
    const auto traj = integrate_cocycle(Afn, omega, theta0, 1.0, 1e-3);
    const cplx expect = std::exp(cplx(0.0, 1.0));
    CHECK(std::abs(traj.values.back()(0, 0) - expect) <= 1e-9);
    CHECK(op_norm(traj.values.front() - Mat::Identity(1, 1)) == 0.0);
}

TEST_CASE("RK4: zero coefficient freezes the identity") {
    TorusMatFn Afn(2, 1);
    RVec omega(1), theta0(1);
    omega << 0.5;
    theta0 << 0.3;
    const auto traj = integrate_cocycle(Afn, omega, theta0, 0.5, 1e-2);
    for (const auto &X : traj.values) CHECK(op_norm(X - Mat::Identity(2, 2)) == 0.0);
}

TEST_CASE("RK4: fourth-order convergence on a quasi-periodic instance") {
    props::Rng rng(81);
    Mat A(2, 2);
    A << 0, 0.3, -0.3, 0;
    TorusMatFn Afn = TorusMatFn::constant(A, 2) + props::rand_fn(rng, 2, 2, 2, 3, 0.1, true);
    RVec omega = props::golden_omega();
    RVec theta0(2);
    theta0 << 0.2, 0.7;
    const double T = 1.0;
    const Mat ref = integrate_cocycle(Afn, omega, theta0, T, 1.0 / 4096).values.back();
    const double e1 = op_norm(integrate_cocycle(Afn, omega, theta0, T, 1.0 / 128).values.back() - ref);
    const double e2 = op_norm(integrate_cocycle(Afn, omega, theta0, T, 1.0 / 256).values.back() - ref);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 3.7);
    CHECK(order <= 4.3);
}

TEST_CASE("conjugacy_residual: exact identity data gives zero") {
    Mat A(2, 2);
    A << 0, 0.25, -0.25, 0;
    TorusMatFn F(2, 2);
    const TorusMatFn Z = TorusMatFn::identity(2, 2);
    const TorusMatFn Bbar = TorusMatFn::constant(A, 2);
    CHECK(conjugacy_residual(A, F, Z, Bbar, props::golden_omega(), 8) <= 1e-15);
}

TEST_CASE("conjugacy_residual: one exact inductive step stays within budget") {
    KamParams p;
    p.dd = DiophantineData(props::golden_omega(), 0.1, 2.0);
    p.group = GroupTag::SLnR;
    p.n = 2;
    p.r0 = 0.1;
    p.max_band = 64;
    p.target_eps = 1e-300;
    p.max_steps = 1;
    Mat A(2, 2);
    A << 0, 0.25, -0.25, 0;
    props::Rng rng(83);
    TorusMatFn F = props::rand_fn(rng, 2, 2, 3, 4, 1.0, true);
    // force sl(2,R): remove traces
    TorusMatFn Fsl(2, 2);
    for (const auto &[m, M] : F.coeffs()) {
        Mat Mm = M;
        const cplx t = Mm.trace() / 2.0;
        Mm(0, 0) -= t;
        Mm(1, 1) -= t;
        Fsl.add_coeff(m, Mm);
    }
    Fsl = Fsl * cplx(1e-3 / gevrey_upper_bound(Fsl, p.r0), 0.0);
    const auto res = run(A, Fsl, p);
    const double resid = conjugacy_residual(A, Fsl, res.Z, res.Abar + res.Fbar, p.dd.omega, 8);
    CHECK(resid <= res.budget);
}

TEST_CASE("conjugacy_residual: corrupting a coefficient moves the residual linearly") {
    Mat A(2, 2);
    A << 0, 0.25, -0.25, 0;
    TorusMatFn F(2, 2);
    TorusMatFn Z = TorusMatFn::identity(2, 2);
    const TorusMatFn Bbar = TorusMatFn::constant(A, 2);
    const RVec omega = props::golden_omega();
    const double base = conjugacy_residual(A, F, Z, Bbar, omega, 8);
    for (double delta : {1e-6, 1e-4}) {
        TorusMatFn Zc = Z;
        Mat C = Zc.coeff(Frequency::zero(2));
        C(0, 1) += delta;
        Zc.set_coeff(Frequency::zero(2), C);
        const double resid = conjugacy_residual(A, F, Zc, Bbar, omega, 8);
        CHECK(resid >= 0.1 * delta);
        CHECK(resid <= 10.0 * delta + base);
    }
}

TEST_CASE("reducibility_cross_check: trivial pair and negative control") {
    Mat A(2, 2);
    A << 0, 0.25, -0.25, 0;
    TorusMatFn F(2, 2);
    const TorusMatFn Z = TorusMatFn::identity(2, 2);
    const TorusMatFn Abar = TorusMatFn::constant(A, 2);
    const TorusMatFn Fbar(2, 2);
    const RVec omega = props::golden_omega();
    RVec theta0(2);
    theta0 << 0.0, 0.0;
    CHECK(reducibility_cross_check(A, F, Z, Abar, Fbar, omega, theta0, 2.0, 1e-3) <= 1e-9);

    // now upstairs has a perturbation but Z stays the identity: discrepancy
    // grows with T
    props::Rng rng(87);
    TorusMatFn Fp = props::rand_fn(rng, 2, 2, 2, 3, 1.0, true);
    Fp = Fp * cplx(1e-2 / Fp.total_mass(), 0.0);
    const double mism = reducibility_cross_check(A, Fp, Z, Abar, Fbar, omega, theta0, 10.0, 1e-2);
    // non-resonant parts average out along the flow; what matters is that the
    // control lands far above the 1e-4 verification threshold
    CHECK(mism >= 1e-3);
}

TEST_CASE("group_membership: identity, rotation, exponential map") {
    for (GroupTag g : {GroupTag::GLnC, GroupTag::GLnR, GroupTag::SLnR, GroupTag::SpnR,
                       GroupTag::On, GroupTag::Un})
        CHECK(group_membership(Mat(Mat::Identity(2, 2)), g).ok);

    Mat R(2, 2);
    R << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
    for (GroupTag g : {GroupTag::On, GroupTag::SLnR, GroupTag::SpnR})
        CHECK(group_membership(R, g).ok);

    // exp of an algebra element lands in the group
    props::Rng rng(91);
    for (GroupTag g : {GroupTag::SLnR, GroupTag::On, GroupTag::Un, GroupTag::SpnR}) {
        TorusMatFn X(2, 2);
        Mat M = 0.3 * props::rand_mat(rng, 2);
        switch (g) {
            case GroupTag::SLnR:
                M = Mat(M.real().cast<cplx>());
                M(1, 1) = -M(0, 0);
                break;
            case GroupTag::On: {
                Mat S = Mat((M - Mat(M.transpose())) / 2.0);
                M = Mat(S.real().cast<cplx>());
                break;
            }
            case GroupTag::Un:
                M = Mat((M - Mat(M.adjoint())) / 2.0);
                break;
            case GroupTag::SpnR: {
                Mat S = Mat(M.real().cast<cplx>());
                const Mat J = symplectic_J(2);
                M = Mat(0.5 * (S - J.transpose() * Mat(S.transpose()) * J));
                break;
            }
            default:
                break;
        }
        REQUIRE(algebra_membership(M, g, 1e-9).ok);
        X.set_coeff(Frequency::zero(2), M);
        OpOptions free;
        const TorusMatFn E = exp_of(X, free, 1e-25);
        CHECK(group_membership(E, g, 1e-9, 8).violation <= 1e-9);
    }
}

TEST_CASE("negative controls: every residual detects a delta-perturbation") {
    // property-style: corrupt certified inputs and expect >= c * delta
    props::Rng rng(93);
    Mat A(2, 2);
    A << 0, 0.25, -0.25, 0;
    const RVec omega = props::golden_omega();
    const TorusMatFn Bbar = TorusMatFn::constant(A, 2);
    TorusMatFn F(2, 2);
    int fails = 0;
    for (int c = 0; c < 100; ++c) {
        std::uniform_real_distribution<double> u(1e-8, 1e-4);
        const double delta = u(rng);
        TorusMatFn Zc = TorusMatFn::identity(2, 2);
        std::uniform_int_distribution<int> pick(0, 3);
        Mat C = Zc.coeff(Frequency::zero(2));
        C(pick(rng) / 2, pick(rng) % 2) += delta;
        Zc.set_coeff(Frequency::zero(2), C);
        if (conjugacy_residual(A, F, Zc, Bbar, omega, 4) < 0.05 * delta) ++fails;
    }
    CHECK(fails == 0);
}
