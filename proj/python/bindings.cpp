// Python bindings for the main operations: Fourier algebra, small-divisor
// checks, spectral decompositions, the homological solver, renormalization,
// the KAM driver and the dynamical verification.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kamred/io.hpp"
#include "kamred/verify.hpp"

namespace py = pybind11;
using namespace kamred;

namespace {

Frequency freq_from_list(const std::vector<int> &doubled) { return Frequency(doubled); }

DiophantineData make_dd(const std::vector<double> &omega, double kappa, double tau) {
    RVec w = Eigen::Map<const RVec>(omega.data(), omega.size());
    return DiophantineData(w, kappa, tau);
}

py::dict report_to_dict(const ResonanceReport &rep) {
    py::dict d;
    d["pass"] = rep.pass();
    d["margin"] = rep.margin;
    d["margin_at"] = rep.margin_at.doubled;
    py::list viols;
    for (const auto &v : rep.violations) {
        py::dict e;
        e["doubled_freq"] = v.m.doubled;
        e["value"] = v.value;
        e["bound"] = v.bound;
        viols.append(e);
    }
    d["violations"] = viols;
    return d;
}

RVec vec_from_list(const std::vector<double> &v) {
    return Eigen::Map<const RVec>(v.data(), v.size());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "KAM almost-reducibility engine for quasi-periodic cocycles";

    py::class_<TorusMatFn>(m, "TorusMatFn")
        .def(py::init<int, int>(), py::arg("n"), py::arg("d"))
        .def_static("constant", &TorusMatFn::constant, py::arg("A"), py::arg("d"))
        .def_static("identity", &TorusMatFn::identity, py::arg("n"), py::arg("d"))
        .def_property_readonly("n", &TorusMatFn::n)
        .def_property_readonly("d", &TorusMatFn::d)
        .def("set_coeff",
             [](TorusMatFn &f, const std::vector<int> &doubled, const Mat &M) {
                 f.set_coeff(freq_from_list(doubled), M);
             })
        .def("coeff",
             [](const TorusMatFn &f, const std::vector<int> &doubled) {
                 return f.coeff(freq_from_list(doubled));
             })
        .def("coeffs",
             [](const TorusMatFn &f) {
                 py::list out;
                 for (const auto &[mm, M] : f.coeffs()) out.append(py::make_tuple(mm.doubled, M));
                 return out;
             })
        .def("evaluate",
             [](const TorusMatFn &f, const std::vector<double> &theta) {
                 return f.evaluate(vec_from_list(theta));
             })
        .def("total_mass", &TorusMatFn::total_mass)
        .def("truncation_budget", &TorusMatFn::truncation_budget)
        .def("support_size", &TorusMatFn::support_size)
        .def("is_real_valued", &TorusMatFn::is_real_valued, py::arg("tol") = 1e-12)
        .def("__add__", [](const TorusMatFn &a, const TorusMatFn &b) { return a + b; })
        .def("__sub__", [](const TorusMatFn &a, const TorusMatFn &b) { return a - b; })
        .def("__mul__", [](const TorusMatFn &a, cplx s) { return a * s; });

    m.def(
        "convolve_product",
        [](const TorusMatFn &f, const TorusMatFn &g, std::int64_t max_band) {
            OpOptions o;
            if (max_band >= 0) o.max_doubled_band = 2 * max_band;
            return convolve_product(f, g, o);
        },
        py::arg("f"), py::arg("g"), py::arg("max_band") = -1);
    m.def(
        "derivative_omega",
        [](const TorusMatFn &f, const std::vector<double> &omega) {
            return derivative_omega(f, vec_from_list(omega));
        },
        py::arg("f"), py::arg("omega"));
    m.def("gevrey_upper_bound", &gevrey_upper_bound, py::arg("f"), py::arg("r"));
    m.def("truncate_and_tail", &truncate_and_tail, py::arg("f"), py::arg("N"));
    m.def(
        "exp_of",
        [](const TorusMatFn &X, std::int64_t max_band, double tol) {
            OpOptions o;
            if (max_band >= 0) o.max_doubled_band = 2 * max_band;
            return exp_of(X, o, tol);
        },
        py::arg("X"), py::arg("max_band") = -1, py::arg("taylor_tol") = 1e-30);

    m.def(
        "algebra_membership",
        [](const TorusMatFn &f, const std::string &group, double tol) {
            const auto r = algebra_membership(f, group_tag_from_string(group), tol);
            return py::make_tuple(r.ok, r.violation, r.detail);
        },
        py::arg("f"), py::arg("group"), py::arg("tol") = 1e-9);
    m.def(
        "group_membership",
        [](const TorusMatFn &f, const std::string &group, double tol, int grid) {
            const auto r = group_membership(f, group_tag_from_string(group), tol, grid);
            return py::make_tuple(r.ok, r.violation, r.detail);
        },
        py::arg("f"), py::arg("group"), py::arg("tol") = 1e-9, py::arg("grid") = 16);

    m.def(
        "diophantine_check",
        [](const std::vector<double> &omega, double kappa, double tau, std::int64_t N) {
            return report_to_dict(diophantine_check(make_dd(omega, kappa, tau), N));
        },
        py::arg("omega"), py::arg("kappa"), py::arg("tau"), py::arg("N"));
    m.def(
        "spectrum_dc_check",
        [](const Mat &A, const std::vector<double> &omega, double kappa, double tau,
           double kappa_prime, std::int64_t N, const std::string &lattice) {
            const Lattice lat = lattice == "integer" ? Lattice::Integer : Lattice::HalfInteger;
            return report_to_dict(
                spectrum_dc_check(A, make_dd(omega, kappa, tau), kappa_prime, N, lat));
        },
        py::arg("A"), py::arg("omega"), py::arg("kappa"), py::arg("tau"), py::arg("kappa_prime"),
        py::arg("N"), py::arg("lattice") = "half-integer");

    m.def(
        "cluster_decomposition",
        [](const Mat &A, double kappa_prime) {
            Decomposition dec = cluster_decomposition(A, kappa_prime);
            classify_decomposition(dec);
            py::list subs;
            for (const auto &s : dec.subspaces)
                subs.append(py::make_tuple(s.projection, s.spectrum));
            py::dict out;
            out["subspaces"] = subs;
            out["real"] = dec.real_flag;
            out["symplectic"] = dec.symplectic_flag;
            out["unitary"] = dec.unitary_flag;
            return out;
        },
        py::arg("A"), py::arg("kappa_prime"));
    m.def("nilpotent_part", &nilpotent_part, py::arg("A"));

    m.def(
        "build_renormalization",
        [](const Mat &A, const std::vector<double> &omega, double kappa, double tau,
           std::int64_t N, const std::string &group, std::int64_t dc_order) {
            RenormOptions o;
            o.dc_order = dc_order;
            const auto ren = build_renormalization(A, make_dd(omega, kappa, tau), N,
                                                   group_tag_from_string(group), o);
            py::dict out;
            py::list labels;
            for (const auto &l : ren.phi.labels) labels.append(l.doubled);
            out["doubled_labels"] = labels;
            out["Atilde"] = ren.Atilde;
            out["dc_margin"] = ren.dc.margin;
            out["norm_change"] = ren.norm_change;
            out["kappa_dprime"] = ren.kappa_dprime;
            out["phi"] = ren.phi.to_torus_fn();
            return out;
        },
        py::arg("A"), py::arg("omega"), py::arg("kappa"), py::arg("tau"), py::arg("N"),
        py::arg("group"), py::arg("dc_order") = 0);

    m.def(
        "solve_homological",
        [](const Mat &A, const TorusMatFn &F, const std::vector<double> &omega, double kappa,
           double tau, double kappa_prime, std::int64_t N) {
            Decomposition dec = cluster_decomposition(A, 1e18);
            classify_decomposition(dec);
            const auto sol =
                solve_homological(A, dec, F, N, make_dd(omega, kappa, tau), kappa_prime, {});
            py::dict out;
            out["X"] = sol.X;
            out["residual"] = sol.residual_norm;
            out["cross_check_rel"] = sol.cross_check_rel;
            return out;
        },
        py::arg("A"), py::arg("F"), py::arg("omega"), py::arg("kappa"), py::arg("tau"),
        py::arg("kappa_prime"), py::arg("N"));

    m.def(
        "run",
        [](const std::string &config_json) {
            const ProblemConfig cfg = config_from_json(json::parse(config_json));
            const RunResult res = run(cfg.A, cfg.F, cfg.params);
            py::dict out;
            out["status"] = res.status;
            out["reached_target"] = res.reached_target;
            out["steps"] = res.steps;
            out["budget"] = res.budget;
            out["Z"] = res.Z;
            out["A_eps"] = res.A_eps;
            out["Abar"] = res.Abar;
            out["Fbar"] = res.Fbar;
            out["Psi"] = res.Psi;
            py::list rows;
            for (const auto &r : res.rows) {
                py::dict e;
                e["k"] = r.k;
                e["eps_k"] = r.eps_k;
                e["r_k"] = r.r_k;
                e["N_k"] = r.N_k;
                e["kappa_k"] = r.kappa_k;
                e["dc_margin"] = r.dc_margin;
                e["S_Fk"] = r.S_Fk;
                e["S_Zminus_id"] = r.S_Zminus_id;
                e["budget"] = r.budget;
                e["wall_time_ms"] = r.wall_time_ms;
                rows.append(e);
            }
            out["rows"] = rows;
            return out;
        },
        py::arg("config_json"),
        "Run the almost-reducibility iteration on a JSON problem configuration.");

    m.def(
        "conjugacy_residual",
        [](const Mat &A, const TorusMatFn &F, const TorusMatFn &Z, const TorusMatFn &Bbar,
           const std::vector<double> &omega, int grid) {
            return conjugacy_residual(A, F, Z, Bbar, vec_from_list(omega), grid);
        },
        py::arg("A"), py::arg("F"), py::arg("Z"), py::arg("Bbar"), py::arg("omega"),
        py::arg("grid") = 32);
    m.def(
        "reducibility_cross_check",
        [](const Mat &A, const TorusMatFn &F, const TorusMatFn &Z, const TorusMatFn &Abar,
           const TorusMatFn &Fbar, const std::vector<double> &omega,
           const std::vector<double> &theta0, double T, double h) {
            return reducibility_cross_check(A, F, Z, Abar, Fbar, vec_from_list(omega),
                                            vec_from_list(theta0), T, h);
        },
        py::arg("A"), py::arg("F"), py::arg("Z"), py::arg("Abar"), py::arg("Fbar"),
        py::arg("omega"), py::arg("theta0"), py::arg("T") = 10.0, py::arg("h") = 1e-3);
    m.def(
        "integrate_cocycle",
        [](const TorusMatFn &Afn, const std::vector<double> &omega,
           const std::vector<double> &theta0, double T, double h) {
            const auto traj = integrate_cocycle(Afn, vec_from_list(omega), vec_from_list(theta0),
                                                T, h);
            return py::make_tuple(traj.times, traj.values);
        },
        py::arg("Afn"), py::arg("omega"), py::arg("theta0"), py::arg("T"), py::arg("h"));
}
