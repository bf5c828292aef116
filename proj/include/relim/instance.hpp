#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "relim/core.hpp"
#include "relim/rng.hpp"

namespace relim {

enum class RewardKind { bernoulli };

// A complete simulated environment. The truth member of `regressors` is the
// reward-mean table, so realizability holds by construction.
struct Instance {
    ContextSpace contexts;
    ActionSpace actions;
    RegressorClass regressors;
    int truth_index = 0;
    RewardKind reward_kind = RewardKind::bernoulli;

    const Regressor& truth() const { return regressors.members[truth_index]; }
    double mean(int x, int a) const { return truth().at(x, a); }
    int num_contexts() const { return contexts.num_contexts; }
    int K() const { return actions.K; }
    int N() const { return regressors.size(); }

    void validate() const;
};

// Parameters of the hard instance family: M uniform contexts and all K^M
// action mappings as regressors, one of which is the truth.
struct LowerBoundParams {
    long long N_target = 0;
    int K = 0;
    long long T = 0;
    double epsilon = 0.0;
    int M = 0;
};

// Computes M = floor(ln N_target / ln K) by integer arithmetic and
// epsilon = min(1/2, epsilon_scale * sqrt(K*M/T)).
LowerBoundParams lower_bound_params(long long N_target, int K, long long T,
                                    double epsilon_scale);

// N regressor tables drawn i.i.d. uniform on [0,1], uniform context weights,
// truth index drawn uniformly among members.
Instance gen_random_tabular(std::uint64_t seed, int num_contexts, int K, int N);

// Hard instance: f_g(x,a) = 1/2 + epsilon if a = g(x) else 1/2, over all K^M
// mappings g. Rejects K^M > 10^6 with CapacityError.
Instance gen_lower_bound(std::uint64_t seed, long long N_target, int K,
                         long long T, double epsilon_scale = 0.25);

// Gap instance: truth is `base_means` exactly; each non-optimal policy pi
// gets one regressor with
//   f(x,pi(x))   = 0.51 if base(x,pi(x)) > 0.75 else 1.0
//   f(x,a')      = 0    if base(x,a')    > 0.25 else 0.5   (a' != pi(x))
// so every non-truth member satisfies (f - f*)^2 >= 1/20 everywhere and its
// argmax policy equals pi (both audited). `policies` must contain the optimal
// policy of base_means; base_means must have a unique optimal action per
// context with margin >= 0.01.
Instance gen_nontrivial(const Regressor& base_means,
                        const std::vector<std::vector<int>>& policies);

// Convenience wrapper: random base means (unique-argmax margin enforced by
// rejection) plus N-1 random distinct non-optimal policies.
Instance gen_nontrivial_random(std::uint64_t seed, int num_contexts, int K, int N);

// Draws a context from the instance weights and a full Bernoulli reward
// vector over actions (the learner may only read the chosen entry).
// Consumes exactly 1 + K draws from rng.
std::pair<int, std::vector<double>> sample_round(const Instance& inst, Rng& rng);

// E_x[ f*(x, pi_{f*}(x)) - f*(x, pi_f(x)) ], exact from the tables.
double expected_instant_regret(const Instance& inst, const Regressor& f);

// Minimum over non-truth members and all (x,a) of (f(x,a) - f*(x,a))^2.
double min_squared_gap(const Instance& inst);

std::string serialize_instance(const Instance& inst);
Instance deserialize_instance(const std::string& text);
void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

}  // namespace relim
