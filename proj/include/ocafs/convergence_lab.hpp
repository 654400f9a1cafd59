#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ocafs::lab {

/// f(x) = 1/2 x'Qx - b'x with Q symmetric positive definite.
struct DescentProblem {
    Eigen::MatrixXd q;
    Eigen::VectorXd b;
    double sigma = 0.0;          // smallest eigenvalue of Q
    Eigen::VectorXd lipschitz;   // coordinate constants L_i = Q_ii
    double l_max = 0.0;
    Eigen::VectorXd x0;
    Eigen::VectorXd x_star;
    double f_star = 0.0;
    double r0 = 0.0;             // radius of the sublevel set {f <= f(x0)} around x_star

    std::size_t dim() const { return static_cast<std::size_t>(b.size()); }
    double objective(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    /// f(x) - f_star evaluated as 1/2 (x - x*)'Q(x - x*).
    double gap(const Eigen::VectorXd& x) const;
};

/// Validates Q (symmetric within 1e-10, positive definite) and derives
/// sigma, L_i, x*, f* and R0 = sqrt(2 (f(x0) - f*) / sigma).
DescentProblem make_problem(Eigen::MatrixXd q, Eigen::VectorXd b, Eigen::VectorXd x0);

/// Random orthogonal conjugation of the spectrum cond^(i/(n-1)),
/// i = 0..n-1, with x0 on the radius-10 sphere around x*.
DescentProblem make_quadratic(int n, double condition_number, std::uint64_t seed);

struct DescentTrace {
    std::vector<double> f;         // f(x_k), k = 0..n_steps
    std::vector<double> gap;       // f(x_k) - f*
    std::vector<double> distance;  // ||x_k - x*||
    std::vector<double> gap_error; // rounding-error bound of each gap value
    std::vector<int> indices;      // i_k, k = 0..n_steps-1
    std::uint64_t seed = 0;

    /// Gap never rises by more than the rounding-error bounds of the two
    /// values compared.
    bool non_increasing() const;
};

/// Randomized coordinate descent x_{k+1} = x_k - (s / L_max) [grad f(x_k)]_i e_i
/// with i uniform on {0..n-1}; s = step_scale, 1 for the analysed method.
/// Iterates are carried as x_k - x* so the gap keeps full relative
/// precision near the optimum.
DescentTrace rcd_run(const DescentProblem& p, std::size_t n_steps, std::uint64_t seed, double step_scale = 1.0);

/// E[f(x_k)] - f* <= 2 n L_max R0^2 / k.
double sublinear_bound(const DescentProblem& p, std::size_t k);
/// 1 - sigma / (n L_max).
double linear_rate_factor(const DescentProblem& p);
/// rate^k (f(x0) - f*).
double linear_bound(const DescentProblem& p, std::size_t k);

struct BoundReport {
    std::string bound;  // "sublinear" or "linear"
    std::vector<double> mean_gap;  // k = 0..n_steps
    std::vector<double> limit;     // bound value per k (k = 0 unused for the sublinear bound)
    double slack = 0.05;
    double max_ratio = 0.0;        // max over checked k of mean_gap / limit
    std::size_t worst_k = 0;
    std::size_t first_violation = 0;  // 0 when none
    bool descent = true;           // every run non-increasing
    bool contained = true;         // every iterate within R0 of x*
    bool holds = true;             // bound within slack and both flags above

    std::string summary() const;
};

/// Averages the gap over n_runs traces (seeds seed, seed+1, ...) and compares
/// with the bound for k >= 1. Throws std::invalid_argument if n_runs < 30.
BoundReport check_sublinear_bound(const DescentProblem& p, std::size_t n_steps, std::size_t n_runs,
                                  std::uint64_t seed, double slack = 0.05, double step_scale = 1.0);
BoundReport check_linear_bound(const DescentProblem& p, std::size_t n_steps, std::size_t n_runs,
                               std::uint64_t seed, double slack = 0.05, double step_scale = 1.0);

struct LemmaReport {
    double a = 0.0;
    std::vector<double> u;  // u_0..u_n_terms
    bool non_increasing = true;
    bool nonnegative = true;
    bool holds = true;      // u_n <= 1/(n a) for n >= 1
    double max_ratio = 0.0; // max of u_n * n * a
};

/// Runs the extremal recurrence u_{n+1} = u_n - a u_n^2. Requires a > 0 and
/// 0 < u0 <= 1/(4a).
LemmaReport lemma1_check(double a, double u0, std::size_t n_terms);

/// Largest relative error between grad f and central differences over
/// n_points random points.
double gradient_check(const DescentProblem& p, std::size_t n_points, std::uint64_t seed);

}  // namespace ocafs::lab
