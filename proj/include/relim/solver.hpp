#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "relim/core.hpp"
#include "relim/errors.hpp"

namespace relim {

// Distribution over an active regressor subset plus the induced smoothed
// per-context action distributions
//   P'(a|x) = (1-mu) * sum_{f in F': pi_f(x)=a} P(f) + mu/|A(F',x)|
// for a in A(F',x), and 0 elsewhere.
struct ExplorationDist {
    std::vector<int> support;   // regressor indices, ascending
    std::vector<double> probs;  // over support; sums to 1 (+-1e-12)
    double mu = 0.0;
    std::vector<std::vector<double>> cached_action_dists;  // |X| rows of K entries

    const std::vector<double>& action_dist(int x) const {
        return cached_action_dists[static_cast<std::size_t>(x)];
    }
};

struct SolveReport {
    long long iterations = 0;
    double final_violation = 0.0;
    double bound = 0.0;  // E_x[|A(F',x)|]
    bool converged = false;
    // Best violation so far, sampled every 10 iterations (plus start/end);
    // non-increasing by construction.
    std::vector<double> trace;
};

// Thrown when the iteration budget is exhausted above tolerance. Feasibility
// of the constraint is guaranteed, so this indicates a solver bug or a
// too-tight tolerance.
struct SolveFailure : ConvergenceError {
    SolveReport report;
    SolveFailure(const std::string& msg, SolveReport rep)
        : ConvergenceError(msg), report(std::move(rep)) {}
};

// Action distribution induced at context x by P over the active subset.
std::vector<double> mixed_action_dist(const std::vector<double>& P,
                                      const RegressorClass& cls,
                                      const std::vector<int>& support, int x,
                                      double mu);

// E_x[|A(F',x)|]: the constraint's right-hand side.
double constraint_bound(const RegressorClass& cls, const std::vector<int>& support,
                        const std::vector<double>& context_weights);

struct ViolationReport {
    double violation = 0.0;  // max_f E_x[1/P'(pi_f(x)|x)] - E_x[|A(F',x)|]
    int witness = -1;        // regressor index attaining the max
};

// Naive double-loop evaluation of the constraint; used for audits.
ViolationReport max_violation(const std::vector<double>& P, const RegressorClass& cls,
                              const std::vector<int>& support,
                              const std::vector<double>& context_weights, double mu);
ViolationReport max_violation(const ExplorationDist& dist, const RegressorClass& cls,
                              const std::vector<double>& context_weights);

struct SolverOptions {
    double tol_rel = 1e-6;     // relative to the bound E_x[|A|]
    long long max_iters = 0;   // 0 -> 50 * |F'| * ln(|F'|+1)
    // Wider distributions than this skip the Newton phase (its Hessian is
    // dense |F'| x |F'|); such instances must converge in the multiplicative
    // phase or at the initial point.
    int newton_size_limit = 2048;
};

// Finds P over `support` with max_violation <= tol_rel * bound. Starts from
// `warm_start` (aligned with support, already normalized) or uniform. Two
// phases: multiplicative weight updates against the violation witness, then
// a damped Newton polish on a log-sum-exp smoothing of
// max_f E_x[1/P'(pi_f(x)|x)]. Throws SolveFailure if the budget is exhausted
// above tolerance.
std::pair<ExplorationDist, SolveReport> solve_exploration_dist(
    const RegressorClass& cls, const std::vector<int>& support,
    const std::vector<double>& context_weights, double mu,
    const SolverOptions& opts = {},
    const std::optional<std::vector<double>>& warm_start = std::nullopt);

}  // namespace relim
