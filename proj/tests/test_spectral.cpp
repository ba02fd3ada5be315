#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kamred/groups.hpp"
#include "kamred/spectral.hpp"
#include "props.hpp"

using namespace kamred;

TEST_CASE("cluster: diagonal matrix with a known gap structure") {
    Mat A = Mat::Zero(3, 3);
    A(0, 0) = 0.0;
    A(1, 1) = 0.05;
    A(2, 2) = 1.0;
    const Decomposition dec = cluster_decomposition(A, 0.1);
    REQUIRE(dec.size() == 2);
    Mat P0 = Mat::Zero(3, 3);
    P0(0, 0) = 1;
    P0(1, 1) = 1;
    Mat P1 = Mat::Zero(3, 3);
    P1(2, 2) = 1;
    CHECK(op_norm(dec.subspaces[0].projection - P0) < 1e-12);
    CHECK(op_norm(dec.subspaces[1].projection - P1) < 1e-12);
    CHECK(dec.subspaces[0].spectrum.size() == 2);
}

TEST_CASE("cluster: one eigenvalue gives the full space") {
    Mat A(2, 2);
    A << 0, 1, 0, 0;
    const Decomposition dec = cluster_decomposition(A, 0.5);
    REQUIRE(dec.size() == 1);
    CHECK(op_norm(dec.subspaces[0].projection - Mat::Identity(2, 2)) < 1e-14);
}

TEST_CASE("cluster: constructed 4x4 spectrum matches the construction") {
    props::Rng rng(41);
    for (int c = 0; c < 20; ++c) {
        // eigenvalues in two groups separated by ~1, inner gaps <= 0.05
        std::uniform_real_distribution<double> u(-0.02, 0.02);
        std::vector<cplx> eig = {cplx(0.0, u(rng)), cplx(0.05, u(rng)), cplx(1.0, u(rng)),
                                 cplx(1.05, u(rng))};
        Mat V = Mat::Identity(4, 4) + 0.4 * props::rand_mat(rng, 4);
        Mat D = Mat::Zero(4, 4);
        for (int i = 0; i < 4; ++i) D(i, i) = eig[i];
        const Mat A = V * D * V.inverse();
        const Decomposition dec = cluster_decomposition(A, 0.2);
        REQUIRE(dec.size() == 2);
        CHECK(dec.subspaces[0].dim() == 2);
        CHECK(dec.subspaces[1].dim() == 2);
        CHECK(dec.consistency_defect() <= 1e-8 * (1.0 + op_norm(A)));
    }
}

TEST_CASE("generalized eigenspaces: identity, diagonal, Jordan block") {
    CHECK(generalized_eigenspaces(Mat::Identity(3, 3)).size() == 1);

    Mat D = Mat::Zero(2, 2);
    D(0, 0) = 1;
    D(1, 1) = 2;
    const Decomposition dec = generalized_eigenspaces(D);
    REQUIRE(dec.size() == 2);
    CHECK(dec.subspaces[0].dim() == 1);

    Mat J(2, 2);
    J << 1, 1, 0, 1;
    const Decomposition dj = generalized_eigenspaces(J);
    REQUIRE(dj.size() == 1);
    CHECK(dj.subspaces[0].dim() == 2);
}

TEST_CASE("nilpotent part: diagonalizable, Jordan block, constructed oracle") {
    Mat A(2, 2);
    A << 1, 1, 0, 2;
    CHECK(op_norm(nilpotent_part(A)) < 1e-10);

    Mat J(2, 2);
    J << 1, 1, 0, 1;
    Mat expect(2, 2);
    expect << 0, 1, 0, 0;
    CHECK(op_norm(nilpotent_part(J) - expect) < 1e-12);

    props::Rng rng(43);
    for (int c = 0; c < 20; ++c) {
        const int n = 3;
        Mat N = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) N(i, j) = props::rand_cplx(rng);
        const cplx lambda = props::rand_cplx(rng);
        const Mat A2 = lambda * Mat::Identity(n, n) + N;
        CHECK(op_norm(nilpotent_part(A2) - N) <= 1e-9 * (1.0 + op_norm(A2)));
    }
}

TEST_CASE("classify: real symmetric is real and unitary") {
    props::Rng rng(47);
    Mat A = props::rand_mat(rng, 3);
    A = Mat((A + Mat(A.transpose())) / 2.0);
    A = Mat((A + A.conjugate()) / 2.0);
    Decomposition dec = cluster_decomposition(A, 0.0);
    classify_decomposition(dec);
    CHECK(dec.real_flag);
    CHECK(dec.unitary_flag);
}

TEST_CASE("classify: elliptic sp(2,R) generator pairings") {
    const double beta = 0.37;
    Mat A(2, 2);
    A << 0, beta, -beta, 0;
    Decomposition dec = cluster_decomposition(A, 0.1);
    classify_decomposition(dec);
    REQUIRE(dec.size() == 2);
    CHECK(dec.real_flag);
    // conjugation swaps the two eigenlines
    CHECK(dec.conjugate_pairing[0] == 1);
    CHECK(dec.conjugate_pairing[1] == 0);
    CHECK(dec.symplectic_flag);
    // direct computation of P* J P: each line pairs through J with itself
    const Mat J = symplectic_J(2);
    const double self0 =
        op_norm(dec.subspaces[0].projection.adjoint() * J * dec.subspaces[0].projection);
    const double cross =
        op_norm(dec.subspaces[0].projection.adjoint() * J * dec.subspaces[1].projection);
    CHECK(self0 > 0.1);
    CHECK(cross < 1e-10);
    CHECK(dec.symplectic_pairing[0] == 0);
    CHECK(dec.symplectic_pairing[1] == 1);
    CHECK(dec.unitary_flag);  // eigenlines of a skew-symmetric matrix are orthogonal
}

TEST_CASE("classify: single-subspace decomposition is vacuously everything") {
    Mat A(2, 2);
    A << 0, 1, 0, 0;
    Decomposition dec = cluster_decomposition(A, 0.5);
    classify_decomposition(dec);
    CHECK(dec.real_flag);
    CHECK(dec.symplectic_flag);
    CHECK(dec.unitary_flag);
    CHECK(dec.conjugate_pairing[0] == 0);
    CHECK(dec.symplectic_pairing[0] == 0);
}

TEST_CASE("meet: same input, trivial input, diagonal enumeration") {
    Mat A = Mat::Zero(3, 3);
    A(0, 0) = 0.0;
    A(1, 1) = 0.05;
    A(2, 2) = 1.0;
    const Decomposition fine = generalized_eigenspaces(A);
    const Decomposition coarse = cluster_decomposition(A, 0.1);
    const Decomposition trivial = cluster_decomposition(A, 10.0);

    CHECK(meet_decompositions(fine, fine).size() == fine.size());
    CHECK(meet_decompositions(trivial, coarse).size() == coarse.size());

    const Decomposition m = meet_decompositions(coarse, fine);
    CHECK(m.size() == 3);
    CHECK(m.consistency_defect() < 1e-10);
}

TEST_CASE("meet: rejects non-commuting projections") {
    // two decompositions of different matrices do not commute in general
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = 1;
    A(1, 1) = -1;
    Mat B(2, 2);
    B << 0, 1, 1, 0;
    const Decomposition da = generalized_eigenspaces(A);
    const Decomposition db = generalized_eigenspaces(B);
    CHECK_THROWS(meet_decompositions(da, db));
}

TEST_CASE("spectral property ensembles") {
    for (const auto &p : props::spectral_properties(20260808, 100)) {
        INFO(p.name, " worst=", p.worst);
        CHECK(p.failures == 0);
    }
}
