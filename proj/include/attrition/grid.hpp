#ifndef ATTRITION_GRID_HPP
#define ATTRITION_GRID_HPP

#include <cstddef>
#include <vector>

#include "attrition/rational.hpp"

namespace attrition {

/**
 * Belief ladder reachable from a prior p0 under binary signals of precision
 * pi. Posterior odds move by the factor r = pi/(1-pi) per observed signal,
 * so the reachable beliefs form a two-sided geometric ladder in odds space.
 * Points are indexed 0..n()+1: index 0 is the lower absorbing point (the
 * first reachable belief <= p_lo), index n()+1 the upper one (first
 * reachable belief >= p_hi), and 1..n() are interior. A reachable point
 * equal to p_lo or p_hi exactly is classified as a boundary point.
 */
class BeliefGrid {
  public:
    std::size_t n() const { return points_.size() - 2; }
    std::size_t size() const { return points_.size(); }
    const Rat& point(std::size_t k) const;
    const std::vector<Rat>& points() const { return points_; }
    const Rat& pi() const { return pi_; }
    std::size_t prior_index() const { return prior_index_; }
    const Rat& prior() const { return points_[prior_index_]; }
    /// Index of an exact grid point; throws std::invalid_argument otherwise.
    std::size_t index_of(const Rat& p) const;

    friend BeliefGrid build_grid(const Rat& p0, const Rat& p_lo, const Rat& p_hi, const Rat& pi);

  private:
    BeliefGrid() = default;
    std::vector<Rat> points_;
    Rat pi_;
    std::size_t prior_index_ = 0;
};

BeliefGrid build_grid(const Rat& p0, const Rat& p_lo, const Rat& p_hi, const Rat& pi);

/**
 * Exit probabilities of the signal-driven random walk on a belief grid,
 * conditional on the binary state. Under state H a step is up with
 * probability pi, under L with probability 1-pi. kappa is the per-round
 * continuation probability: each interior round the walk halts forever with
 * probability 1-kappa before the step (kappa = 1 recovers the plain walk,
 * which exits with probability one).
 *
 * top_h[k] / top_l[k] give the probability of eventually exiting through the
 * upper boundary starting from grid index k, conditional on H / L; bot_*
 * likewise for the lower boundary. With kappa < 1 the two need not sum to
 * one, the deficit being the halt probability.
 */
struct ExitProbabilities {
    std::vector<Rat> grid_points;  ///< snapshot of the grid the solve ran on
    Rat pi;
    Rat kappa;
    std::vector<Rat> top_h, top_l;
    std::vector<Rat> bot_h, bot_l;

    std::size_t index_of(const Rat& p) const;
};

ExitProbabilities exit_probabilities(const BeliefGrid& grid);
ExitProbabilities exit_probabilities_kappa(const BeliefGrid& grid, const Rat& kappa);

/// Probability of exiting through the top when the walk starts at grid point
/// q while the true state is H with probability p: mixes the conditional
/// top-exit probabilities. p need not be a grid point; q must be.
Rat pi_mixed(const ExitProbabilities& ep, const Rat& p, const Rat& q);

/// Same mixture for the bottom exit.
Rat pi_mixed_bottom(const ExitProbabilities& ep, const Rat& p, const Rat& q);

/// Total exit probability (top plus bottom) of the mixed walk from q.
Rat total_exit(const ExitProbabilities& ep, const Rat& p, const Rat& q);

/**
 * Solves a tridiagonal system A x = rhs by elimination in exact rationals.
 * lower[i] multiplies x[i-1] in row i (lower[0] ignored), upper[i]
 * multiplies x[i+1] (upper[n-1] ignored). Throws on a zero pivot; the
 * diagonally dominant systems produced here never trigger it.
 */
std::vector<Rat> solve_tridiagonal(const std::vector<Rat>& lower, const std::vector<Rat>& diag,
                                   const std::vector<Rat>& upper, const std::vector<Rat>& rhs);

}  // namespace attrition

#endif
