#include "relim/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace relim {

BaselineState make_baseline_state(const Instance& inst) {
    BaselineState s;
    s.cum_sq_loss.assign(static_cast<std::size_t>(inst.N()), 0.0);
    return s;
}

int leader_index(const BaselineState& state, int N) {
    int best = 0;
    double best_loss = state.cum_sq_loss[0];
    for (int i = 1; i < N; ++i) {
        if (state.cum_sq_loss[static_cast<std::size_t>(i)] < best_loss) {
            best_loss = state.cum_sq_loss[static_cast<std::size_t>(i)];
            best = i;
        }
    }
    return best;
}

double epsilon_schedule(const BaselineConfig& config, int K, int N, long long t) {
    if (t < 1) throw InputError("epsilon_schedule: t must be >= 1");
    double raw = config.epsilon_c *
                 std::cbrt(static_cast<double>(K) * std::log(static_cast<double>(N)) /
                           static_cast<double>(t));
    return std::min(1.0, raw);
}

std::pair<int, double> baseline_choose(const BaselineConfig& config,
                                       const BaselineState& state, const Instance& inst,
                                       int x, Rng& rng) {
    const int K = inst.K();
    switch (config.kind) {
        case BaselineKind::uniform: {
            int a = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(K)));
            return {a, 1.0 / K};
        }
        case BaselineKind::follow_the_leader: {
            int f = leader_index(state, inst.N());
            int a = inst.regressors.argmax_policy[static_cast<std::size_t>(f)]
                                                 [static_cast<std::size_t>(x)];
            return {a, 1.0};
        }
        case BaselineKind::epsilon_greedy: {
            double eps = epsilon_schedule(config, K, inst.N(), state.t + 1);
            int greedy = inst.regressors.argmax_policy[static_cast<std::size_t>(
                leader_index(state, inst.N()))][static_cast<std::size_t>(x)];
            int a = greedy;
            if (rng.bernoulli(eps))
                a = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(K)));
            double prop = eps / K + (a == greedy ? 1.0 - eps : 0.0);
            return {a, prop};
        }
    }
    throw InternalError("baseline_choose: unknown baseline kind");
}

void baseline_observe(BaselineState& state, const Instance& inst, int x, int a,
                      double reward) {
    if (!(reward >= 0.0 && reward <= 1.0))
        throw InputError("baseline_observe: reward outside [0,1]");
    if (x < 0 || x >= inst.num_contexts())
        throw InputError("baseline_observe: context out of range");
    if (a < 0 || a >= inst.K()) throw InputError("baseline_observe: action out of range");
    accumulate_sq_loss(inst.regressors, x, a, reward, state.cum_sq_loss);
    state.t += 1;
}

BaselineState run_baseline_episode(const Instance& inst, const BaselineConfig& config,
                                   Rng env_rng, Rng act_rng, const RoundSink& sink) {
    if (config.T < 1) throw InputError("run_baseline_episode: T must be >= 1");
    BaselineState state = make_baseline_state(inst);
    double cum_regret = 0.0;
    for (long long t = 1; t <= config.T; ++t) {
        auto [x, rewards] = sample_round(inst, env_rng);
        auto [a, propensity] = baseline_choose(config, state, inst, x, act_rng);
        double reward = rewards[static_cast<std::size_t>(a)];
        int a_star = argmax_action(inst.truth(), x);
        double instant_regret = inst.mean(x, a_star) - inst.mean(x, a);
        cum_regret += instant_regret;
        baseline_observe(state, inst, x, a, reward);
        if (sink) {
            RoundDetail d;
            d.log = RoundLog{t, x, a, reward, instant_regret};
            d.propensity = propensity;
            d.n_active = inst.N();
            d.solver_iters = 0;
            d.solver_violation = 0.0;
            d.eliminated = 0;
            d.cum_regret = cum_regret;
            sink(d);
        }
    }
    return state;
}

}  // namespace relim
