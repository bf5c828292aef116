#pragma once

#include <cstdint>
#include <vector>

#include "relim/instance.hpp"
#include "relim/solver.hpp"

namespace relim {

// Monte Carlo check of the excess-loss moments and the regret-transfer
// inequality. Y is the excess squared loss of f over the truth on one
// sampled (context, action, reward).
struct DiagReport {
    double mean_Y = 0.0;
    double se_Y = 0.0;
    double mean_sq_gap = 0.0;
    double se_sq_gap = 0.0;
    double var_Y = 0.0;
    double se_var_Y = 0.0;
    double regret_sq = 0.0;
    double transfer_rhs = 0.0;  // 2K * mean_Y
    bool identity_flag = false;
    bool variance_flag = false;
    bool transfer_flag = false;
    long long num_samples = 0;
};

// Estimates E[Y], E[(f - f*)^2] and Var[Y] under x ~ D, a ~ action_dists[x],
// r ~ Bernoulli(mean(x,a)). Flags when the mean of Y deviates from the mean
// squared gap by more than 3 combined standard errors, or when the variance
// of Y exceeds 4 E[Y] beyond 3 standard errors. The action distribution must
// not depend on the realized reward.
DiagReport diag_excess_loss(const Instance& inst, int f_index,
                            const std::vector<std::vector<double>>& action_dists,
                            long long num_samples, Rng& rng);

// Checks (E[r(pi_f*) - r(pi_f)])^2 <= 2K E[Y] for actions drawn from an
// exploration distribution. First audits that both f and the truth satisfy
// E_x[1/p(pi(x)|x)] <= K (within audit_tol_rel); the left side is exact from
// the tables, E[Y] is Monte Carlo.
DiagReport diag_regret_transfer(const Instance& inst, int f_index,
                                const ExplorationDist& dist, long long num_samples,
                                Rng& rng, double audit_tol_rel = 1e-6);

// A randomly generated small instance with either a raw conditional action
// distribution (for the moment checks) or a solved exploration distribution
// (for the transfer check).
struct DiagTriple {
    Instance inst;
    int f_index = 0;
    std::vector<std::vector<double>> action_dists;
    ExplorationDist dist;
};

DiagTriple gen_diag_triple(std::uint64_t master_seed, std::uint64_t index,
                           bool with_exploration_dist);

struct DiagSuiteResult {
    std::vector<DiagReport> reports;
    int identity_flags = 0;
    int variance_flags = 0;
    int transfer_flags = 0;
};

enum class DiagKind { excess_loss, regret_transfer };

DiagSuiteResult run_diag_suite(DiagKind kind, int num_triples, long long num_samples,
                               std::uint64_t master_seed);

}  // namespace relim
