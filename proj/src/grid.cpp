#include "attrition/grid.hpp"

#include <stdexcept>

namespace attrition {

const Rat& BeliefGrid::point(std::size_t k) const {
    if (k >= points_.size()) throw std::out_of_range("BeliefGrid::point: index out of range");
    return points_[k];
}

std::size_t BeliefGrid::index_of(const Rat& p) const {
    for (std::size_t k = 0; k < points_.size(); ++k) {
        if (points_[k] == p) return k;
    }
    throw std::invalid_argument("BeliefGrid::index_of: not a grid point");
}

BeliefGrid build_grid(const Rat& p0, const Rat& p_lo, const Rat& p_hi, const Rat& pi) {
    if (!(0 < p_lo && p_lo < p0 && p0 < p_hi && p_hi < 1))
        throw std::invalid_argument("build_grid: need 0 < p_lo < p0 < p_hi < 1");
    if (!(pi > ratio(1, 2) && pi < 1))
        throw std::invalid_argument("build_grid: pi must lie in (1/2, 1)");

    const Rat r = pi / (1 - pi);  // odds step factor, > 1
    const Rat odds0 = p0 / (1 - p0);

    // Walk the odds ladder down from the prior until the belief leaves
    // (p_lo, .) and up until it leaves (., p_hi); the first point at or
    // beyond a cutoff becomes the boundary.
    std::vector<Rat> below;  // strictly below the prior, nearest first
    Rat odds = odds0;
    while (true) {
        odds /= r;
        const Rat p = odds / (1 + odds);
        below.push_back(p);
        if (p <= p_lo) break;
    }
    std::vector<Rat> above;
    odds = odds0;
    while (true) {
        odds *= r;
        const Rat p = odds / (1 + odds);
        above.push_back(p);
        if (p >= p_hi) break;
    }

    BeliefGrid grid;
    grid.pi_ = pi;
    for (auto it = below.rbegin(); it != below.rend(); ++it) grid.points_.push_back(*it);
    grid.prior_index_ = grid.points_.size();
    grid.points_.push_back(p0);
    for (const Rat& p : above) grid.points_.push_back(p);
    return grid;
}

std::vector<Rat> solve_tridiagonal(const std::vector<Rat>& lower, const std::vector<Rat>& diag,
                                   const std::vector<Rat>& upper, const std::vector<Rat>& rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n)
        throw std::invalid_argument("solve_tridiagonal: size mismatch");
    if (n == 0) return {};
    std::vector<Rat> d(diag), b(rhs);
    for (std::size_t i = 1; i < n; ++i) {
        if (d[i - 1] == 0) throw std::domain_error("solve_tridiagonal: zero pivot");
        const Rat w = lower[i] / d[i - 1];
        d[i] -= w * upper[i - 1];
        b[i] -= w * b[i - 1];
    }
    std::vector<Rat> x(n);
    if (d[n - 1] == 0) throw std::domain_error("solve_tridiagonal: zero pivot");
    x[n - 1] = b[n - 1] / d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = (b[i] - upper[i] * x[i + 1]) / d[i];
    }
    return x;
}

namespace {

// Hitting probabilities of one absorbing boundary for the halted walk with
// up-step probability z: x_k = kappa*(z*x_{k+1} + (1-z)*x_{k-1}) on the
// interior, with the given boundary values.
std::vector<Rat> chain_solve(std::size_t n, const Rat& z, const Rat& kappa, const Rat& at_bottom,
                             const Rat& at_top) {
    std::vector<Rat> lower(n), diag(n, Rat(1)), upper(n), rhs(n, Rat(0));
    const Rat up = kappa * z;
    const Rat down = kappa * (1 - z);
    for (std::size_t i = 0; i < n; ++i) {
        lower[i] = -down;
        upper[i] = -up;
    }
    rhs[0] += down * at_bottom;
    rhs[n - 1] += up * at_top;
    std::vector<Rat> interior = solve_tridiagonal(lower, diag, upper, rhs);
    std::vector<Rat> full;
    full.reserve(n + 2);
    full.push_back(at_bottom);
    for (auto& v : interior) full.push_back(v);
    full.push_back(at_top);
    return full;
}

}  // namespace

ExitProbabilities exit_probabilities_kappa(const BeliefGrid& grid, const Rat& kappa) {
    if (kappa <= 0 || kappa > 1)
        throw std::invalid_argument("exit_probabilities: kappa must lie in (0,1]");
    ExitProbabilities ep;
    ep.grid_points = grid.points();
    ep.pi = grid.pi();
    ep.kappa = kappa;
    const std::size_t n = grid.n();
    const Rat zh = grid.pi();      // up-step probability under H
    const Rat zl = 1 - grid.pi();  // under L
    ep.top_h = chain_solve(n, zh, kappa, 0, 1);
    ep.top_l = chain_solve(n, zl, kappa, 0, 1);
    ep.bot_h = chain_solve(n, zh, kappa, 1, 0);
    ep.bot_l = chain_solve(n, zl, kappa, 1, 0);
    return ep;
}

ExitProbabilities exit_probabilities(const BeliefGrid& grid) {
    return exit_probabilities_kappa(grid, Rat(1));
}

std::size_t ExitProbabilities::index_of(const Rat& p) const {
    for (std::size_t k = 0; k < grid_points.size(); ++k) {
        if (grid_points[k] == p) return k;
    }
    throw std::invalid_argument("ExitProbabilities::index_of: not a grid point");
}

Rat pi_mixed(const ExitProbabilities& ep, const Rat& p, const Rat& q) {
    if (p < 0 || p > 1) throw std::invalid_argument("pi_mixed: p must be a probability");
    const std::size_t k = ep.index_of(q);
    return p * ep.top_h[k] + (1 - p) * ep.top_l[k];
}

Rat pi_mixed_bottom(const ExitProbabilities& ep, const Rat& p, const Rat& q) {
    if (p < 0 || p > 1) throw std::invalid_argument("pi_mixed_bottom: p must be a probability");
    const std::size_t k = ep.index_of(q);
    return p * ep.bot_h[k] + (1 - p) * ep.bot_l[k];
}

Rat total_exit(const ExitProbabilities& ep, const Rat& p, const Rat& q) {
    return pi_mixed(ep, p, q) + pi_mixed_bottom(ep, p, q);
}

}  // namespace attrition
