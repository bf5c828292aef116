#pragma once

#include <utility>
#include <vector>

#include "relim/instance.hpp"
#include "relim/learner.hpp"

namespace relim {

enum class BaselineKind { uniform, epsilon_greedy, follow_the_leader };

struct BaselineConfig {
    BaselineKind kind = BaselineKind::uniform;
    // epsilon_greedy schedule: eps_t = min(1, c * (K ln N / t)^(1/3)).
    double epsilon_c = 1.0;
    long long T = 1;
};

struct BaselineState {
    std::vector<double> cum_sq_loss;  // identical accounting to the learner's
    long long t = 0;
};

BaselineState make_baseline_state(const Instance& inst);

// Index of the running loss minimizer (lowest index on ties).
int leader_index(const BaselineState& state, int N);

double epsilon_schedule(const BaselineConfig& config, int K, int N, long long t);

// Chooses an action for round state.t + 1 and returns its exact propensity
// under the baseline's policy.
std::pair<int, double> baseline_choose(const BaselineConfig& config,
                                       const BaselineState& state, const Instance& inst,
                                       int x, Rng& rng);

// Same loss-accounting contract as the learner's observe; no elimination.
void baseline_observe(BaselineState& state, const Instance& inst, int x, int a,
                      double reward);

// Runs T rounds against the same environment-stream contract as run_episode.
BaselineState run_baseline_episode(const Instance& inst, const BaselineConfig& config,
                                   Rng env_rng, Rng act_rng,
                                   const RoundSink& sink = nullptr);

}  // namespace relim
