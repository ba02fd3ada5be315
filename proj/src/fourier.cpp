#include "kamred/fourier.hpp"

#include <cmath>
#include <unordered_map>

namespace kamred {

double op_norm(const Mat &M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    if (M.rows() == 1 && M.cols() == 1) return std::abs(M(0, 0));
    Eigen::JacobiSVD<Mat> svd(M);
    return svd.singularValues()(0);
}

TorusMatFn TorusMatFn::constant(const Mat &A, int d) {
    if (A.rows() != A.cols()) throw std::invalid_argument("constant: square matrix expected");
    TorusMatFn f(static_cast<int>(A.rows()), d);
    if (op_norm(A) > 0) f.c_[Frequency::zero(d)] = A;
    return f;
}

TorusMatFn TorusMatFn::identity(int n, int d) {
    return constant(Mat::Identity(n, n), d);
}

TorusMatFn TorusMatFn::mode(const Frequency &m, const Mat &E) {
    TorusMatFn f(static_cast<int>(E.rows()), m.dim());
    if (op_norm(E) > 0) f.c_[m] = E;
    return f;
}

Mat TorusMatFn::coeff(const Frequency &m) const {
    auto it = c_.find(m);
    if (it == c_.end()) return Mat::Zero(n_, n_);
    return it->second;
}

void TorusMatFn::set_coeff(const Frequency &m, const Mat &M) {
    if (m.dim() != d_) throw std::invalid_argument("set_coeff: frequency dimension mismatch");
    if (M.rows() != n_ || M.cols() != n_) throw std::invalid_argument("set_coeff: matrix size mismatch");
    if (M.isZero(0.0))
        c_.erase(m);
    else
        c_[m] = M;
}

void TorusMatFn::add_coeff(const Frequency &m, const Mat &M) {
    auto it = c_.find(m);
    if (it == c_.end())
        set_coeff(m, M);
    else {
        it->second += M;
    }
}

std::int64_t TorusMatFn::doubled_bandwidth() const {
    std::int64_t b = 0;
    for (const auto &[m, M] : c_) b = std::max<std::int64_t>(b, m.doubled_order());
    return b;
}

double TorusMatFn::total_mass() const {
    double s = budget_;
    for (const auto &[m, M] : c_) s += op_norm(M);
    return s;
}

void TorusMatFn::prune(double rel_floor, DropStats *stats, double abs_floor) {
    double lead = 0.0;
    for (const auto &[m, M] : c_) lead = std::max(lead, op_norm(M));
    const double floor = std::max({1e-300, rel_floor * lead, abs_floor});
    for (auto it = c_.begin(); it != c_.end();) {
        const double nm = op_norm(it->second);
        if (nm <= floor) {
            budget_ += nm;
            if (stats) stats->add(nm, it->first.order());
            it = c_.erase(it);
        } else {
            ++it;
        }
    }
}

Mat TorusMatFn::evaluate(const RVec &theta) const {
    if (theta.size() != d_) throw std::invalid_argument("evaluate: theta dimension mismatch");
    Mat v = Mat::Zero(n_, n_);
    for (const auto &[m, M] : c_) {
        const double phase = 2.0 * M_PI * m.dot(theta);
        v += M * cplx(std::cos(phase), std::sin(phase));
    }
    return v;
}

bool TorusMatFn::is_real_valued(double tol) const {
    for (const auto &[m, M] : c_) {
        const Mat other = coeff(-m);
        if ((other - M.conjugate()).norm() > tol * (1.0 + M.norm())) return false;
    }
    return true;
}

void TorusMatFn::check_same(const TorusMatFn &o) const {
    if (n_ != o.n_ || d_ != o.d_) throw std::invalid_argument("TorusMatFn: dimension mismatch");
}

TorusMatFn TorusMatFn::operator+(const TorusMatFn &o) const {
    TorusMatFn r = *this;
    r += o;
    return r;
}

TorusMatFn TorusMatFn::operator-(const TorusMatFn &o) const {
    TorusMatFn r = *this;
    r -= o;
    return r;
}

TorusMatFn &TorusMatFn::operator+=(const TorusMatFn &o) {
    check_same(o);
    for (const auto &[m, M] : o.c_) add_coeff(m, M);
    budget_ += o.budget_;
    return *this;
}

TorusMatFn &TorusMatFn::operator-=(const TorusMatFn &o) {
    check_same(o);
    for (const auto &[m, M] : o.c_) add_coeff(m, -M);
    budget_ += o.budget_;
    return *this;
}

TorusMatFn TorusMatFn::operator*(const cplx &s) const {
    TorusMatFn r(n_, d_);
    for (const auto &[m, M] : c_) {
        Mat sM = M * s;
        if (!sM.isZero(0.0)) r.c_[m] = std::move(sM);
    }
    r.budget_ = budget_ * std::abs(s);
    return r;
}

namespace {

// Packed frequency key for fast accumulation (d <= 4, |h_i| < 2^15).
inline bool packable(const TorusMatFn &f, const TorusMatFn &g) {
    if (f.d() > 4) return false;
    const std::int64_t b = f.doubled_bandwidth() + g.doubled_bandwidth();
    return b < (1 << 14);
}

inline std::uint64_t pack_key(const Frequency &m) {
    std::uint64_t k = 0;
    for (int i = 0; i < m.dim(); ++i)
        k = (k << 16) | static_cast<std::uint16_t>(static_cast<std::int16_t>(m.doubled[i]));
    return k;
}

}  // namespace

TorusMatFn convolve_product(const TorusMatFn &f, const TorusMatFn &g, const OpOptions &opts) {
    if (f.n() != g.n() || f.d() != g.d())
        throw std::invalid_argument("convolve_product: dimension mismatch");
    TorusMatFn r(f.n(), f.d());
    const bool banded = opts.max_doubled_band >= 0;
    double drop_mass = 0.0;

    if (packable(f, g)) {
        std::unordered_map<std::uint64_t, std::pair<Frequency, Mat>> acc;
        acc.reserve(f.support_size() * 2 + g.support_size());
        for (const auto &[ma, A] : f.coeffs()) {
            for (const auto &[mb, B] : g.coeffs()) {
                const Frequency mc = ma + mb;
                auto [it, fresh] = acc.try_emplace(pack_key(mc), mc, Mat());
                if (fresh)
                    it->second.second = A * B;
                else
                    it->second.second += A * B;
            }
        }
        std::map<Frequency, double> drops;
        for (auto &[key, entry] : acc) {
            auto &[mc, M] = entry;
            if (banded && mc.doubled_order() > opts.max_doubled_band) {
                drops[mc] = op_norm(M);
            } else if (!M.isZero(0.0)) {
                r.set_coeff(mc, M);
            }
        }
        for (const auto &[mc, nm] : drops) {
            drop_mass += nm;
            if (opts.stats) opts.stats->add(nm, mc.order());
        }
    } else {
        std::map<Frequency, Mat> dropped;
        for (const auto &[ma, A] : f.coeffs()) {
            for (const auto &[mb, B] : g.coeffs()) {
                const Frequency mc = ma + mb;
                Mat P = A * B;
                if (banded && mc.doubled_order() > opts.max_doubled_band) {
                    auto it = dropped.find(mc);
                    if (it == dropped.end())
                        dropped[mc] = std::move(P);
                    else
                        it->second += P;
                } else {
                    r.add_coeff(mc, P);
                }
            }
        }
        for (const auto &[m, M] : dropped) {
            const double nm = op_norm(M);
            drop_mass += nm;
            if (opts.stats) opts.stats->add(nm, m.order());
        }
    }

    // Sound first-order error propagation: if f = f* + e_f with |e_f| <= b_f
    // (and likewise g), the product error is bounded by
    //   b_f (M_g + b_g) + (M_f + b_f) b_g  plus whatever was dropped here.
    const double mf = f.stored_mass();
    const double mg = g.stored_mass();
    r.add_budget(f.truncation_budget() * (mg + g.truncation_budget()) +
                 (mf + f.truncation_budget()) * g.truncation_budget() + drop_mass);
    if (opts.rel_floor > 0 || opts.abs_floor > 0)
        r.prune(opts.rel_floor, opts.stats, opts.abs_floor);
    return r;
}

TorusMatFn derivative_omega(const TorusMatFn &f, const RVec &omega) {
    if (omega.size() != f.d()) throw std::invalid_argument("derivative_omega: omega dimension mismatch");
    if (omega.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
        throw std::invalid_argument("derivative_omega: requires sup|omega_i| <= 1");
    TorusMatFn r(f.n(), f.d());
    for (const auto &[m, M] : f.coeffs()) {
        if (m.is_zero()) continue;
        r.set_coeff(m, M * cplx(0.0, 2.0 * M_PI * m.dot(omega)));
    }
    r.add_budget(f.truncation_budget());
    return r;
}

double gevrey_upper_bound(const TorusMatFn &f, double r) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("gevrey_upper_bound: requires 0 < r <= 1");
    double s = f.truncation_budget();
    for (const auto &[m, M] : f.coeffs())
        s += op_norm(M) * std::exp(2.0 * M_PI * m.order() * r * r);
    return s;
}

std::pair<TorusMatFn, double> truncate_and_tail(const TorusMatFn &f, std::int64_t N) {
    if (N < 0) throw std::invalid_argument("truncate_and_tail: N >= 0 required");
    TorusMatFn kept(f.n(), f.d());
    double tail = 0.0;
    for (const auto &[m, M] : f.coeffs()) {
        if (m.doubled_order() <= 2 * N)
            kept.set_coeff(m, M);
        else
            tail += op_norm(M);
    }
    kept.add_budget(f.truncation_budget());
    return {kept, tail};
}

TorusMatFn exp_of(const TorusMatFn &X, const OpOptions &opts, double taylor_tol) {
    if (taylor_tol <= 0) throw std::invalid_argument("exp_of: taylor_tol must be > 0");
    const double s0 = X.total_mass();
    if (s0 > 1.0)
        throw std::domain_error("exp_of: coefficient mass > 1, outside the perturbative regime");
    TorusMatFn acc = TorusMatFn::identity(X.n(), X.d());
    TorusMatFn term = acc;
    const int kmax = 80;
    int k = 1;
    for (; k <= kmax; ++k) {
        term = convolve_product(term, X, opts) * cplx(1.0 / k, 0.0);
        acc += term;
        if (term.total_mass() <= taylor_tol) break;
    }
    // Remainder of the series beyond the last computed term.
    double fact = 1.0;
    for (int j = 2; j <= k + 1; ++j) fact *= j;
    acc.add_budget(std::pow(s0, k + 1) / fact * std::exp(s0));
    return acc;
}

}  // namespace kamred
