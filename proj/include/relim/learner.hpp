#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "relim/instance.hpp"
#include "relim/solver.hpp"

namespace relim {

enum class DistMode { known, empirical };

struct LearnerConfig {
    double delta = 0.1;
    long long T = 1;
    DistMode dist_mode = DistMode::known;
    SolverOptions solver;
    // Run the elimination step only at rounds 1,2,4,8,... instead of every
    // round. Off by default.
    bool doubling_cadence = false;

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) throw InputError("LearnerConfig: delta must be in (0,1)");
        if (T < 1) throw InputError("LearnerConfig: T must be >= 1");
    }
};

// Exploration mass: min(1/(2K), 1/sqrt(T)).
double mu_value(int K, long long T);

// Per-round confidence: delta / (2 N t^3 log2(max(t,2))); the max keeps the
// t=1 round finite (log2(1) = 0 would divide by zero) and is conservative.
double delta_t(double delta, int N, long long t);

// Elimination threshold above the running loss minimum: 18 ln(1/delta_t)/t.
double elimination_radius(long long t, double dt);

struct LearnerState {
    std::vector<char> active;        // mask over all N regressors
    std::vector<int> active_list;    // ascending indices of active members
    std::vector<double> cum_sq_loss; // tracked for all N members
    long long t = 0;                 // rounds completed
    std::vector<int> history_contexts;     // empirical mode only
    std::vector<double> context_counts;    // per-context visit counts
    ExplorationDist current_dist;
    double mu = 0.0;

    // Logging support: iterations of the solve that produced the current
    // distribution (0 when reused) and its audited constraint violation.
    long long pending_solver_iters = 0;
    double current_violation = 0.0;

    int n_active() const { return static_cast<int>(active_list.size()); }
    bool truth_active(const Instance& inst) const {
        return active[static_cast<std::size_t>(inst.truth_index)] != 0;
    }
};

// Initializes the active set to the full class and solves the round-1
// distribution (known mode) or installs the uniform fallback (empirical
// mode, where round 1 has no history to constrain against).
LearnerState make_learner_state(const Instance& inst, const LearnerConfig& config);

// Empirical mode: re-solves the distribution against the uniform weights on
// the observed context history (warm-started; returns immediately when the
// current distribution already satisfies the updated constraint). Known
// mode: no-op. Call at the start of each round t >= 2.
void prepare_round(LearnerState& state, const Instance& inst, const LearnerConfig& config);

// Samples an action from the current distribution at context x; returns the
// action and its exact propensity.
std::pair<int, double> choose_action(const LearnerState& state, int x, Rng& rng);

// Ingests the observed reward: advances t and adds the squared prediction
// error to every member's running loss. Rejects rewards outside [0,1].
void observe(LearnerState& state, const Instance& inst, int x, int a, double reward);

struct ElimResult {
    int eliminated = 0;
    bool resolved = false;  // whether a new distribution was solved
};

// Deactivates every active member whose average loss is at least the active
// minimum plus the elimination radius, then re-solves the exploration
// distribution for the survivors (warm-started from the restriction of the
// previous solution). The minimizer always survives.
ElimResult eliminate(LearnerState& state, const Instance& inst, const LearnerConfig& config);

// One realized round as logged by run_episode.
struct RoundDetail {
    RoundLog log;
    double propensity = 0.0;
    int n_active = 0;  // survivors after this round's elimination
    long long solver_iters = 0;
    double solver_violation = 0.0;
    int eliminated = 0;
    double cum_regret = 0.0;
};

using RoundSink = std::function<void(const RoundDetail&)>;

// Runs T rounds of prepare/choose/observe/eliminate. env_rng drives the
// environment (contexts and reward vectors), act_rng the action sampling,
// so every learner configuration sees the identical environment stream for
// a given (master_seed, seed_index).
LearnerState run_episode(const Instance& inst, const LearnerConfig& config,
                         Rng env_rng, Rng act_rng, const RoundSink& sink = nullptr);

// Convenience overload returning the per-round history.
std::pair<std::vector<RoundLog>, LearnerState> run_episode_logged(
    const Instance& inst, const LearnerConfig& config, Rng env_rng, Rng act_rng);

// Max constraint violation of `dist` against the given weights, computed
// from the cached action distributions.
double audit_violation(const ExplorationDist& dist, const RegressorClass& cls,
                       const std::vector<double>& context_weights);

// Shared loss accounting used by the elimination learner and all baselines.
void accumulate_sq_loss(const RegressorClass& cls, int x, int a, double reward,
                        std::vector<double>& cum_sq_loss);

}  // namespace relim
