#include "kamred/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace kamred {

json matrix_to_json(const Mat &M) {
    json re = json::array(), im = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json rrow = json::array(), irow = json::array();
        for (int j = 0; j < M.cols(); ++j) {
            rrow.push_back(M(i, j).real());
            irow.push_back(M(i, j).imag());
        }
        re.push_back(rrow);
        im.push_back(irow);
    }
    return json{{"re", re}, {"im", im}};
}

Mat matrix_from_json(const json &j) {
    const auto &re = j.at("re");
    const auto &im = j.at("im");
    const int rows = static_cast<int>(re.size());
    const int cols = rows ? static_cast<int>(re[0].size()) : 0;
    Mat M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < cols; ++c)
            M(i, c) = cplx(re[i][c].get<double>(), im[i][c].get<double>());
    return M;
}

json torus_fn_to_json(const TorusMatFn &f) {
    json records = json::array();
    for (const auto &[m, M] : f.coeffs()) {
        json rec = matrix_to_json(M);
        rec["doubled_freq"] = m.doubled;
        records.push_back(rec);
    }
    return records;
}

TorusMatFn torus_fn_from_json(const json &j, int n, int d) {
    TorusMatFn f(n, d);
    for (const auto &rec : j) {
        const auto freq = rec.at("doubled_freq").get<std::vector<int>>();
        if (static_cast<int>(freq.size()) != d)
            throw std::invalid_argument("torus_fn_from_json: frequency dimension mismatch");
        f.set_coeff(Frequency(freq), matrix_from_json(rec));
    }
    return f;
}

json torus_fn_file(const TorusMatFn &f) {
    return json{{"n", f.n()},
                {"d", f.d()},
                {"truncation_budget", f.truncation_budget()},
                {"coeffs", torus_fn_to_json(f)}};
}

TorusMatFn torus_fn_from_file(const json &j) {
    TorusMatFn f = torus_fn_from_json(j.at("coeffs"), j.at("n").get<int>(), j.at("d").get<int>());
    f.add_budget(j.value("truncation_budget", 0.0));
    return f;
}

ProblemConfig config_from_json(const json &j) {
    ProblemConfig cfg;
    cfg.n = j.at("n").get<int>();
    cfg.d = j.at("d").get<int>();
    const auto om = j.at("omega").get<std::vector<double>>();
    if (static_cast<int>(om.size()) != cfg.d)
        throw std::invalid_argument("config: omega length != d");
    cfg.omega = Eigen::Map<const RVec>(om.data(), om.size());
    cfg.kappa = j.at("kappa").get<double>();
    cfg.tau = j.at("tau").get<double>();
    cfg.group = group_tag_from_string(j.at("group").get<std::string>());
    cfg.A = matrix_from_json(j.at("A"));
    if (cfg.A.rows() != cfg.n) throw std::invalid_argument("config: A size != n");
    cfg.F = torus_fn_from_json(j.at("F"), cfg.n, cfg.d);
    cfg.r = j.value("r", 0.1);
    cfg.seed = j.value("seed", std::uint64_t{0});

    KamParams p;
    p.dd = DiophantineData(cfg.omega, cfg.kappa, cfg.tau);
    p.group = cfg.group;
    p.n = cfg.n;
    p.r0 = cfg.r;
    p.constants = ConstantsLedger::defaults(cfg.n);
    if (j.contains("params")) {
        const auto &q = j.at("params");
        const std::string mode = q.value("mode", "practical");
        p.mode = mode == "faithful" ? KamMode::Faithful : KamMode::Practical;
        p.c_N = q.value("c_N", 2.0);
        p.max_band = q.value("max_band", std::int64_t{64});
        p.taylor_tol = q.value("taylor_tol", 1e-30);
        p.target_eps = q.value("target_eps", 1e-9);
        p.max_steps = q.value("max_steps", 8);
        p.eps0_gate = q.value("eps0_gate", 0.05);
        p.decay_factor = q.value("decay_factor", 10.0);
        if (q.contains("constants"))
            for (const auto &[k, v] : q.at("constants").items())
                p.constants.set(k, v.get<double>());
    }
    cfg.params = p;
    return cfg;
}

json config_to_json(const ProblemConfig &cfg) {
    std::vector<double> om(cfg.omega.data(), cfg.omega.data() + cfg.omega.size());
    json j{{"n", cfg.n},
           {"d", cfg.d},
           {"omega", om},
           {"kappa", cfg.kappa},
           {"tau", cfg.tau},
           {"group", to_string(cfg.group)},
           {"A", matrix_to_json(cfg.A)},
           {"F", torus_fn_to_json(cfg.F)},
           {"r", cfg.r},
           {"seed", cfg.seed}};
    const auto &p = cfg.params;
    j["params"] = json{{"mode", p.mode == KamMode::Faithful ? "faithful" : "practical"},
                       {"c_N", p.c_N},
                       {"max_band", p.max_band},
                       {"taylor_tol", p.taylor_tol},
                       {"target_eps", p.target_eps},
                       {"max_steps", p.max_steps},
                       {"eps0_gate", p.eps0_gate},
                       {"decay_factor", p.decay_factor}};
    return j;
}

ProblemConfig load_config(const std::string &path) {
    return config_from_json(read_json(path));
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string report_csv(const std::vector<KamReportRow> &rows) {
    std::ostringstream os;
    os << "k,eps_k,r_k,N_k,kappa_k,dc_margin,S_Fk,S_Zminus_id,budget,wall_time_ms\n";
    for (const auto &r : rows) {
        os << r.k << ',' << format_g17(r.eps_k) << ',' << format_g17(r.r_k) << ',' << r.N_k << ','
           << format_g17(r.kappa_k) << ',' << format_g17(r.dc_margin) << ','
           << format_g17(r.S_Fk) << ',' << format_g17(r.S_Zminus_id) << ','
           << format_g17(r.budget) << ',' << format_g17(r.wall_time_ms) << '\n';
    }
    return os.str();
}

json report_json(const RunResult &res, const ProblemConfig &cfg) {
    json steps = json::array();
    for (const auto &r : res.rows) {
        json labels = json::array();
        for (size_t i = 0; i < r.renorm_doubled_labels.size(); ++i)
            labels.push_back(json{{"label", i}, {"doubled_freq", r.renorm_doubled_labels[i]}});
        steps.push_back(json{{"k", r.k},
                             {"eps_k", r.eps_k},
                             {"r_k", r.r_k},
                             {"N_k", r.N_k},
                             {"kappa_k", r.kappa_k},
                             {"dc_margin", r.dc_margin},
                             {"dc_margin_at", r.dc_margin_at},
                             {"S_Fk", r.S_Fk},
                             {"S_Zminus_id", r.S_Zminus_id},
                             {"budget", r.budget},
                             {"wall_time_ms", r.wall_time_ms},
                             {"renorm", json{{"labels", labels}}}});
    }
    json dec = json::array();
    for (size_t i = 0; i < res.final_dec.subspaces.size(); ++i) {
        const auto &sub = res.final_dec.subspaces[i];
        json spectrum = json::array();
        for (cplx l : sub.spectrum) spectrum.push_back(json{{"re", l.real()}, {"im", l.imag()}});
        json entry{{"label", sub.label},
                   {"spectrum", spectrum},
                   {"projection", matrix_to_json(sub.projection)}};
        if (i < res.final_labels.size())
            entry["doubled_freq"] = res.final_labels[i].doubled;
        dec.push_back(entry);
    }
    json consts = json::object();
    for (const auto &[k, e] : cfg.params.constants.entries)
        consts[k] = json{{"value", e.value}, {"provenance", e.provenance}, {"status", e.status}};
    return json{{"status", res.status},
                {"reached_target", res.reached_target},
                {"steps", res.steps},
                {"budget", res.budget},
                {"budget_truncation_raw", res.defect_raw},
                {"A_eps", matrix_to_json(res.A_eps)},
                {"rows", steps},
                {"final_decomposition", dec},
                {"constants", consts}};
}

void write_text(const std::string &path, const std::string &content) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << content;
}

json read_json(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    json j;
    f >> j;
    return j;
}

}  // namespace kamred
