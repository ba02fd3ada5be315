// JSON serialization of Fourier data, matrices, problem configurations and
// run reports.  Complex matrices are stored as separate re/im arrays; CSV
// floats carry 17 significant digits.

#pragma once

#include <string>

#include <json.hpp>

#include "kamred/kam.hpp"

namespace kamred {

using json = nlohmann::json;

json matrix_to_json(const Mat &M);
Mat matrix_from_json(const json &j);

// Fourier record list: [{doubled_freq, re, im}, ...].
json torus_fn_to_json(const TorusMatFn &f);
TorusMatFn torus_fn_from_json(const json &j, int n, int d);

// Full function file: {n, d, budget, coeffs: [...]}.
json torus_fn_file(const TorusMatFn &f);
TorusMatFn torus_fn_from_file(const json &j);

struct ProblemConfig {
    int n = 2;
    int d = 2;
    RVec omega;
    double kappa = 0.1;
    double tau = 2.0;
    GroupTag group = GroupTag::SLnR;
    Mat A;
    TorusMatFn F;
    double r = 0.1;
    KamParams params;  // filled from the config's params block
    std::uint64_t seed = 0;
};

ProblemConfig config_from_json(const json &j);
json config_to_json(const ProblemConfig &cfg);
ProblemConfig load_config(const std::string &path);

std::string format_g17(double v);
std::string report_csv(const std::vector<KamReportRow> &rows);
json report_json(const RunResult &res, const ProblemConfig &cfg);

void write_text(const std::string &path, const std::string &content);
json read_json(const std::string &path);

}  // namespace kamred
