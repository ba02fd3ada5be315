// Fourier-space algebra for matrix-valued trigonometric polynomials on the
// torus T^d and the double torus 2T^d.  Frequencies live on the half-integer
// lattice (1/2)Z^d and are stored as doubled integer vectors, so all frequency
// arithmetic is exact.  Norm bookkeeping uses the weighted coefficient sum
//   S_r(f) = sum_m |f_hat(m)| e^{2 pi |m| r^2} + truncation_budget,
// a computable upper bound for the Gevrey-2 norm of parameter r; |.| on
// matrices is the operator 2-norm throughout.

#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace kamred {

using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using cplx = std::complex<double>;

// Frequency m in (1/2)Z^d, stored as the doubled vector 2m in Z^d.
struct Frequency {
    std::vector<int> doubled;

    Frequency() = default;
    explicit Frequency(std::vector<int> dbl) : doubled(std::move(dbl)) {}

    static Frequency zero(int d) { return Frequency(std::vector<int>(d, 0)); }
    // From an integer lattice vector.
    static Frequency integral(const std::vector<int> &m) {
        std::vector<int> h(m.size());
        for (size_t i = 0; i < m.size(); ++i) h[i] = 2 * m[i];
        return Frequency(h);
    }

    int dim() const { return static_cast<int>(doubled.size()); }
    // Doubled order 2|m| (exact integer).
    int doubled_order() const {
        int s = 0;
        for (int h : doubled) s += h < 0 ? -h : h;
        return s;
    }
    double order() const { return doubled_order() / 2.0; }
    bool is_zero() const {
        for (int h : doubled)
            if (h != 0) return false;
        return true;
    }
    bool is_integral() const {
        for (int h : doubled)
            if (h & 1) return false;
        return true;
    }
    // <m, v> for a real vector v.
    double dot(const RVec &v) const {
        double s = 0;
        for (int i = 0; i < dim(); ++i) s += 0.5 * doubled[i] * v[i];
        return s;
    }

    Frequency operator+(const Frequency &o) const {
        Frequency r = *this;
        for (int i = 0; i < dim(); ++i) r.doubled[i] += o.doubled[i];
        return r;
    }
    Frequency operator-(const Frequency &o) const {
        Frequency r = *this;
        for (int i = 0; i < dim(); ++i) r.doubled[i] -= o.doubled[i];
        return r;
    }
    Frequency operator-() const {
        Frequency r = *this;
        for (auto &h : r.doubled) h = -h;
        return r;
    }
    auto operator<=>(const Frequency &) const = default;
};

// Operator 2-norm (largest singular value).
double op_norm(const Mat &M);

// Tracks coefficient mass discarded by band-limiting or pruning.  `plain` is
// the summed operator norm of dropped coefficients; `weighted` additionally
// carries the factor (1 + 2 pi |m|), an upper bound for the effect of one
// omega-derivative on the dropped part (valid because sup|omega_i| <= 1).
struct DropStats {
    double plain = 0.0;
    double weighted = 0.0;
    void add(double norm, double order) {
        plain += norm;
        weighted += norm * (1.0 + 2.0 * M_PI * order);
    }
    void merge(const DropStats &o) {
        plain += o.plain;
        weighted += o.weighted;
    }
};

// Options for band-limited operations.
struct OpOptions {
    std::int64_t max_doubled_band = -1;  // < 0 means unbounded
    double rel_floor = 1e-16;            // relative prune floor, 0 disables
    double abs_floor = 0.0;              // absolute prune floor, 0 disables
    DropStats *stats = nullptr;          // optional drop accounting
};

// Matrix-valued trigonometric polynomial, sparse over (1/2)Z^d.
class TorusMatFn {
  public:
    TorusMatFn() : n_(0), d_(0) {}
    TorusMatFn(int n, int d) : n_(n), d_(d) {
        if (n < 1 || d < 1) throw std::invalid_argument("TorusMatFn: n, d must be >= 1");
    }

    static TorusMatFn constant(const Mat &A, int d);
    static TorusMatFn identity(int n, int d);
    // Single mode c * e^{2 i pi <m, theta>} * E.
    static TorusMatFn mode(const Frequency &m, const Mat &E);

    int n() const { return n_; }
    int d() const { return d_; }

    const std::map<Frequency, Mat> &coeffs() const { return c_; }
    bool has(const Frequency &m) const { return c_.count(m) != 0; }
    // Coefficient at m (zero matrix if absent).
    Mat coeff(const Frequency &m) const;
    void set_coeff(const Frequency &m, const Mat &M);
    void add_coeff(const Frequency &m, const Mat &M);
    size_t support_size() const { return c_.size(); }

    double truncation_budget() const { return budget_; }
    void add_budget(double b) { budget_ += b; }

    // Largest doubled order present (0 for the empty function).
    std::int64_t doubled_bandwidth() const;
    double bandwidth() const { return doubled_bandwidth() / 2.0; }

    // Sum of coefficient operator norms (no Gevrey weight), plus budget.
    double total_mass() const;
    // Same sum without the budget term.
    double stored_mass() const { return total_mass() - budget_; }
    // Copy with the budget cleared (for defect measurements on stored data).
    TorusMatFn budgetless() const {
        TorusMatFn f = *this;
        f.budget_ = 0.0;
        return f;
    }
    // Drop coefficients below max(1e-300, rel_floor * leading, abs_floor);
    // their mass goes to the budget (and to stats when given).
    void prune(double rel_floor = 1e-16, DropStats *stats = nullptr, double abs_floor = 0.0);

    // Pointwise evaluation at theta (coordinates of the double torus).
    Mat evaluate(const RVec &theta) const;

    bool is_real_valued(double tol = 1e-12) const;

    TorusMatFn operator+(const TorusMatFn &o) const;
    TorusMatFn operator-(const TorusMatFn &o) const;
    TorusMatFn operator*(const cplx &s) const;
    TorusMatFn &operator+=(const TorusMatFn &o);
    TorusMatFn &operator-=(const TorusMatFn &o);

  private:
    int n_, d_;
    std::map<Frequency, Mat> c_;
    double budget_ = 0.0;

    void check_same(const TorusMatFn &o) const;
};

// --- torus_fn operations -----------------------------------------------

// Fourier coefficients of the product fg by convolution; frequencies with
// doubled order beyond opts.max_doubled_band are dropped and their summed
// norm is added to the result's truncation budget.
TorusMatFn convolve_product(const TorusMatFn &f, const TorusMatFn &g,
                            const OpOptions &opts = {});

// Directional derivative along omega: coefficient at m scales by
// 2 i pi <m, omega>.  Requires sup|omega_i| <= 1.
TorusMatFn derivative_omega(const TorusMatFn &f, const RVec &omega);

// Certified Gevrey-2 norm surrogate S_r(f); requires 0 < r <= 1.
double gevrey_upper_bound(const TorusMatFn &f, double r);

// Keep |m| <= N; returns the truncation f^N and the exact discarded mass.
std::pair<TorusMatFn, double> truncate_and_tail(const TorusMatFn &f, std::int64_t N);

// exp(X) by the Taylor series with repeated convolution.  Terms are added
// until the surrogate mass of the next term is <= taylor_tol; the analytic
// remainder bound goes to the budget.  Refuses when total mass > 1.
TorusMatFn exp_of(const TorusMatFn &X, const OpOptions &opts, double taylor_tol);

}  // namespace kamred
