#include "kamred/verify.hpp"

#include <cmath>

#include "kamred/parallel.hpp"

namespace kamred {

namespace {

RVec wrap2(const RVec &theta) {
    RVec w = theta;
    for (int i = 0; i < w.size(); ++i) {
        w[i] = std::fmod(w[i], 2.0);
        if (w[i] < 0) w[i] += 2.0;
    }
    return w;
}

}  // namespace

CocycleTrajectory integrate_cocycle(const TorusMatFn &Afn, const RVec &omega, const RVec &theta0,
                                    double T, double h) {
    if (!(h > 0)) throw std::invalid_argument("integrate_cocycle: h > 0 required");
    const auto steps = static_cast<std::int64_t>(std::llround(T / h));
    if (std::abs(steps * h - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument("integrate_cocycle: T must be a multiple of h");

    const int n = Afn.n();
    CocycleTrajectory traj;
    traj.theta0 = theta0;
    traj.h = h;
    traj.times.reserve(steps + 1);
    traj.values.reserve(steps + 1);

    Mat X = Mat::Identity(n, n);
    traj.times.push_back(0.0);
    traj.values.push_back(X);
    auto rhs = [&](double t, const Mat &Y) {
        return Mat(Afn.evaluate(wrap2(theta0 + t * omega)) * Y);
    };
    for (std::int64_t s = 0; s < steps; ++s) {
        const double t = s * h;
        const Mat k1 = rhs(t, X);
        const Mat k2 = rhs(t + 0.5 * h, X + 0.5 * h * k1);
        const Mat k3 = rhs(t + 0.5 * h, X + 0.5 * h * k2);
        const Mat k4 = rhs(t + h, X + h * k3);
        X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!X.allFinite())
            throw std::runtime_error("integrate_cocycle: overflow along the trajectory");
        traj.times.push_back(t + h);
        traj.values.push_back(X);
    }
    return traj;
}

double conjugacy_residual(const Mat &A, const TorusMatFn &F, const TorusMatFn &Z,
                          const TorusMatFn &Bbar, const RVec &omega, int grid_per_dim) {
    const int d = Z.d();
    const TorusMatFn dZ = derivative_omega(Z, omega);
    std::int64_t total = 1;
    for (int i = 0; i < d; ++i) total *= grid_per_dim;

    std::vector<double> partial(static_cast<size_t>(max_threads()) + 1, 0.0);
    parallel_chunks(total, [&](int w, std::int64_t b, std::int64_t e) {
        double worst = 0.0;
        RVec theta(d);
        for (std::int64_t g = b; g < e; ++g) {
            std::int64_t idx = g;
            for (int i = 0; i < d; ++i) {
                theta[i] = 2.0 * (idx % grid_per_dim) / grid_per_dim;
                idx /= grid_per_dim;
            }
            const Mat Zv = Z.evaluate(theta);
            const Mat res = dZ.evaluate(theta) - (A + F.evaluate(theta)) * Zv +
                            Zv * Bbar.evaluate(theta);
            worst = std::max(worst, op_norm(res));
        }
        partial[w] = worst;
    });
    double worst = 0.0;
    for (double v : partial) worst = std::max(worst, v);
    return worst;
}

double reducibility_cross_check(const Mat &A, const TorusMatFn &F, const TorusMatFn &Z,
                                const TorusMatFn &Abar, const TorusMatFn &Fbar, const RVec &omega,
                                const RVec &theta0, double T, double h) {
    const TorusMatFn upstairs = TorusMatFn::constant(A, F.d()) + F;
    const TorusMatFn downstairs = Abar + Fbar;
    const CocycleTrajectory X = integrate_cocycle(upstairs, omega, theta0, T, h);
    const CocycleTrajectory Y = integrate_cocycle(downstairs, omega, theta0, T, h);

    const Mat Z0inv = Z.evaluate(wrap2(theta0)).inverse();
    double worst = 0.0;
    for (size_t s = 0; s < X.times.size(); ++s) {
        const RVec theta_t = wrap2(theta0 + X.times[s] * omega);
        const Mat pred = Z.evaluate(theta_t) * Y.values[s] * Z0inv;
        worst = std::max(worst, op_norm(X.values[s] - pred));
    }
    return worst;
}

VerifyResult verify_artifacts(const RunArtifacts &art, const VerifyOptions &opts) {
    VerifyResult out;
    const int d = art.Z.d();

    out.conjugacy_residual =
        conjugacy_residual(art.A, art.F, art.Z, art.Abar + art.Fbar, art.omega, opts.grid);
    out.conjugacy_ok = out.conjugacy_residual <= art.budget;

    if (opts.run_cross_check) {
        const RVec theta0 = RVec::Zero(d);
        out.cross_check = reducibility_cross_check(art.A, art.F, art.Z, art.Abar, art.Fbar,
                                                   art.omega, theta0, opts.T, opts.h);
        out.cross_check_ok = out.cross_check <= opts.cross_tol;
    }

    const auto gm = group_membership(art.Z, art.group, 1.0, std::max(4, opts.grid / 2));
    out.group_violation = gm.violation;
    out.group_ok = gm.violation <= 1e-8 * (1.0 + art.Z.total_mass());

    const TorusMatFn red = derivative_omega(art.Psi, art.omega) -
                           convolve_product(art.Abar, art.Psi, {}) +
                           convolve_product(art.Psi, TorusMatFn::constant(art.A_eps, d), {});
    out.reducibility_defect = red.budgetless().total_mass();
    out.reducibility_ok = out.reducibility_defect <= art.budget;
    return out;
}

}  // namespace kamred
