#include "ocafs/convergence_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ocafs::lab {

double DescentProblem::objective(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(q * x) - b.dot(x);
}

Eigen::VectorXd DescentProblem::gradient(const Eigen::VectorXd& x) const { return q * x - b; }

double DescentProblem::gap(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd d = x - x_star;
    return 0.5 * d.dot(q * d);
}

DescentProblem make_problem(Eigen::MatrixXd q, Eigen::VectorXd b, Eigen::VectorXd x0) {
    const auto n = q.rows();
    if (n < 1 || q.cols() != n || b.size() != n || x0.size() != n)
        throw std::invalid_argument("problem dimensions disagree");
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("Q must be symmetric");
    q = 0.5 * (q + q.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw std::runtime_error("eigen decomposition failed");
    DescentProblem p;
    p.sigma = eig.eigenvalues().minCoeff();
    if (!(p.sigma > 0.0)) throw std::invalid_argument("Q must be positive definite");
    p.q = std::move(q);
    p.b = std::move(b);
    p.x0 = std::move(x0);
    p.x_star = p.q.ldlt().solve(p.b);
    p.lipschitz = p.q.diagonal();
    p.l_max = p.lipschitz.maxCoeff();
    p.f_star = p.objective(p.x_star);
    p.r0 = std::sqrt(2.0 * p.gap(p.x0) / p.sigma);
    return p;
}

DescentProblem make_quadratic(int n, double condition_number, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("dimension must be positive");
    if (!(condition_number >= 1.0)) throw std::invalid_argument("condition number must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
        return m;
    };

    Eigen::VectorXd spectrum(n);
    for (int i = 0; i < n; ++i)
        spectrum(i) = n == 1 ? 1.0 : std::pow(condition_number, static_cast<double>(i) / (n - 1));
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(draw(n, n));
    Eigen::MatrixXd u = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd q = u * spectrum.asDiagonal() * u.transpose();
    q = 0.5 * (q + q.transpose()).eval();

    const Eigen::VectorXd x_star = draw(n, 1);
    Eigen::VectorXd dir = draw(n, 1);
    dir /= dir.norm();
    DescentProblem p = make_problem(q, q * x_star, x_star + 10.0 * dir);
    // Keep the sampled minimizer exactly; b = Q x* holds up to rounding in b.
    p.x_star = x_star;
    p.f_star = p.objective(x_star);
    p.r0 = std::sqrt(2.0 * p.gap(p.x0) / p.sigma);
    return p;
}

bool DescentTrace::non_increasing() const {
    for (std::size_t k = 1; k < f.size(); ++k)
        if (gap[k] - gap[k - 1] > gap_error[k] + gap_error[k - 1]) return false;
    return true;
}

DescentTrace rcd_run(const DescentProblem& p, std::size_t n_steps, std::uint64_t seed, double step_scale) {
    const auto n = static_cast<Eigen::Index>(p.dim());
    DescentTrace t;
    t.seed = seed;
    t.f.reserve(n_steps + 1);
    t.gap.reserve(n_steps + 1);
    t.distance.reserve(n_steps + 1);
    t.gap_error.reserve(n_steps + 1);
    t.indices.reserve(n_steps);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    const double alpha = step_scale / p.l_max;
    Eigen::VectorXd d = p.x0 - p.x_star;
    const Eigen::MatrixXd q_abs = p.q.cwiseAbs();
    // Forward error bound of evaluating 1/2 d'Qd: gamma_{n+1} * 1/2 |d|'|Q||d|.
    const double gamma = static_cast<double>(n + 2) * std::numeric_limits<double>::epsilon();
    auto push = [&] {
        const double g = 0.5 * d.dot(p.q * d);
        const Eigen::VectorXd d_abs = d.cwiseAbs();
        t.gap_error.push_back(gamma * 0.5 * d_abs.dot(q_abs * d_abs));
        t.gap.push_back(g);
        t.f.push_back(p.f_star + g);
        t.distance.push_back(d.norm());
    };
    push();
    for (std::size_t k = 0; k < n_steps; ++k) {
        const Eigen::Index i = pick(rng);
        const double grad_i = p.q.row(i).dot(d);  // [Qx - b]_i with b = Q x*
        d(i) -= alpha * grad_i;
        t.indices.push_back(static_cast<int>(i));
        push();
    }
    return t;
}

double sublinear_bound(const DescentProblem& p, std::size_t k) {
    return 2.0 * static_cast<double>(p.dim()) * p.l_max * p.r0 * p.r0 / static_cast<double>(k);
}

double linear_rate_factor(const DescentProblem& p) {
    return 1.0 - p.sigma / (static_cast<double>(p.dim()) * p.l_max);
}

double linear_bound(const DescentProblem& p, std::size_t k) {
    return std::pow(linear_rate_factor(p), static_cast<double>(k)) * p.gap(p.x0);
}

namespace {

BoundReport check_bound(const DescentProblem& p, std::size_t n_steps, std::size_t n_runs, std::uint64_t seed,
                        double slack, double step_scale, bool linear) {
    if (n_runs < 30) throw std::invalid_argument("bound checks need at least 30 runs");
    BoundReport r;
    r.bound = linear ? "linear" : "sublinear";
    r.slack = slack;
    r.mean_gap.assign(n_steps + 1, 0.0);
    for (std::size_t run = 0; run < n_runs; ++run) {
        const auto t = rcd_run(p, n_steps, seed + run, step_scale);
        r.descent = r.descent && t.non_increasing();
        for (std::size_t k = 0; k <= n_steps; ++k) {
            r.mean_gap[k] += t.gap[k];
            if (t.distance[k] > p.r0 * (1.0 + 1e-12)) r.contained = false;
        }
    }
    for (auto& g : r.mean_gap) g /= static_cast<double>(n_runs);

    r.limit.assign(n_steps + 1, 0.0);
    bool within = true;
    for (std::size_t k = linear ? 0 : 1; k <= n_steps; ++k) {
        r.limit[k] = linear ? linear_bound(p, k) : sublinear_bound(p, k);
        const double ratio = r.limit[k] > 0.0 ? r.mean_gap[k] / r.limit[k] : (r.mean_gap[k] > 0.0 ? INFINITY : 0.0);
        if (ratio > r.max_ratio) {
            r.max_ratio = ratio;
            r.worst_k = k;
        }
        if (r.mean_gap[k] > r.limit[k] * (1.0 + slack) && within) {
            within = false;
            r.first_violation = k;
        }
    }
    r.holds = within && r.descent && r.contained;
    return r;
}

}  // namespace

std::string BoundReport::summary() const {
    std::ostringstream os;
    os << bound << " bound " << (holds ? "holds" : "FAILS") << ": max ratio " << max_ratio << " at k=" << worst_k;
    if (first_violation) os << ", first violation at k=" << first_violation;
    if (!descent) os << ", descent violated";
    if (!contained) os << ", iterate left the R0 ball";
    return os.str();
}

BoundReport check_sublinear_bound(const DescentProblem& p, std::size_t n_steps, std::size_t n_runs,
                                  std::uint64_t seed, double slack, double step_scale) {
    return check_bound(p, n_steps, n_runs, seed, slack, step_scale, false);
}

BoundReport check_linear_bound(const DescentProblem& p, std::size_t n_steps, std::size_t n_runs,
                               std::uint64_t seed, double slack, double step_scale) {
    return check_bound(p, n_steps, n_runs, seed, slack, step_scale, true);
}

LemmaReport lemma1_check(double a, double u0, std::size_t n_terms) {
    if (!(a > 0.0)) throw std::invalid_argument("a must be positive");
    if (!(u0 > 0.0 && u0 <= 1.0 / (4.0 * a))) throw std::invalid_argument("u0 must lie in (0, 1/(4a)]");
    LemmaReport r;
    r.a = a;
    r.u.reserve(n_terms + 1);
    r.u.push_back(u0);
    for (std::size_t n = 1; n <= n_terms; ++n) {
        const double prev = r.u.back();
        const double next = prev - a * prev * prev;
        r.u.push_back(next);
        r.non_increasing = r.non_increasing && next <= prev;
        r.nonnegative = r.nonnegative && next >= 0.0;
        const double ratio = next * static_cast<double>(n) * a;
        r.max_ratio = std::max(r.max_ratio, ratio);
        if (next > 1.0 / (static_cast<double>(n) * a)) r.holds = false;
    }
    return r;
}

double gradient_check(const DescentProblem& p, std::size_t n_points, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(p.dim());
    double worst = 0.0;
    for (std::size_t k = 0; k < n_points; ++k) {
        Eigen::VectorXd x(n);
        for (Eigen::Index i = 0; i < n; ++i) x(i) = p.x_star(i) + 3.0 * gauss(rng);
        const Eigen::VectorXd g = p.gradient(x);
        Eigen::VectorXd fd(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
            Eigen::VectorXd up = x, down = x;
            up(i) += h;
            down(i) -= h;
            fd(i) = (p.objective(up) - p.objective(down)) / (2.0 * h);
        }
        worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-12));
    }
    return worst;
}

}  // namespace ocafs::lab
