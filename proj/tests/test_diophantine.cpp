#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kamred/diophantine.hpp"
#include "kamred/spectral.hpp"
#include "props.hpp"

using namespace kamred;

TEST_CASE("diophantine: d = 1 golden-ish frequency has no small divisors") {
    RVec w(1);
    w << 0.618;
    DiophantineData dd(w, 0.3, 1.0);
    const auto rep = diophantine_check(dd, 100);
    CHECK(rep.pass());
    CHECK(rep.margin >= 0.3);
}

TEST_CASE("diophantine: golden vector in d = 2 passes at kappa = 0.2, tau = 1") {
    DiophantineData dd(props::golden_omega(), 0.2, 1.0001);
    const auto rep = diophantine_check(dd, 200);
    CHECK(rep.pass());
    // brute-force oracle over the same range
    double margin = std::numeric_limits<double>::infinity();
    for (int a = -200; a <= 200; ++a)
        for (int b = -200; b <= 200; ++b) {
            if (a == 0 && b == 0) continue;
            const int ord = std::abs(a) + std::abs(b);
            if (ord > 200) continue;
            const double v = std::abs(a * dd.omega[0] + b * dd.omega[1]) *
                             std::pow(static_cast<double>(ord), dd.tau);
            margin = std::min(margin, v);
        }
    CHECK(rep.margin == doctest::Approx(margin).epsilon(1e-14));
}

TEST_CASE("diophantine: rational resonance is reported at m = (1,-2)") {
    RVec w(2);
    w << 1.0, 0.5;
    DiophantineData dd(w, 0.05, 1.5);
    const auto rep = diophantine_check(dd, 10);
    CHECK_FALSE(rep.pass());
    bool found = false;
    for (const auto &v : rep.violations) {
        if ((v.m.doubled == std::vector<int>{2, -4}) || (v.m.doubled == std::vector<int>{-2, 4}))
            found = v.value < 1e-14;
    }
    CHECK(found);
}

TEST_CASE("spectrum DC: scalar zero matrix reduces to the base condition") {
    DiophantineData dd(props::golden_omega(), 0.2, 1.5);
    const Mat A = Mat::Zero(1, 1);
    const auto rep = spectrum_dc_check(A, dd, 0.2, 50, Lattice::Integer);
    CHECK(rep.pass());
    const auto base = diophantine_check(dd, 50);
    CHECK(rep.margin == doctest::Approx(2.0 * M_PI * base.margin).epsilon(1e-13));
}

TEST_CASE("spectrum DC: constructed exact resonance is caught") {
    DiophantineData dd(props::golden_omega(), 0.2, 1.5);
    const Frequency m0 = Frequency::integral({1, -1});
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = cplx(0.0, 2.0 * M_PI * m0.dot(dd.omega));
    const auto rep = spectrum_dc_check(A, dd, 0.01, 5, Lattice::Integer);
    CHECK_FALSE(rep.pass());
    bool at_m0 = false;
    for (const auto &v : rep.violations)
        if (v.m == m0 || v.m == -m0) at_m0 = at_m0 || v.value < 1e-12;
    CHECK(at_m0);
}

TEST_CASE("spectrum DC: real separated spectrum passes with a reported margin") {
    DiophantineData dd(props::golden_omega(), 0.2, 2.0);
    Mat A = Mat::Zero(2, 2);
    A(1, 1) = 1.0;
    const auto rep = spectrum_dc_check(A, dd, 1e-4, 50, Lattice::HalfInteger);
    CHECK(rep.pass());
    CHECK(rep.margin > 0.0);
    CHECK(std::isfinite(rep.margin));
}

TEST_CASE("parameter validation") {
    RVec w(2);
    w << 1.0, 0.5;
    CHECK_THROWS(DiophantineData(w, 1.5, 2.0));   // kappa out of range
    CHECK_THROWS(DiophantineData(w, 0.1, 0.5));  // tau too small
    RVec big(2);
    big << 2.0, 0.5;
    CHECK_THROWS(DiophantineData(big, 0.1, 2.0));  // sup|omega| > 1
}

TEST_CASE("arithmetic property ensembles") {
    for (const auto &p : props::arithmetic_properties(20260808, 100)) {
        INFO(p.name, " worst=", p.worst);
        CHECK(p.failures == 0);
    }
}
