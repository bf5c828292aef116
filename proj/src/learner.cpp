#include "relim/learner.hpp"

#include <algorithm>
#include <cmath>

namespace relim {

double mu_value(int K, long long T) {
    if (K < 2) throw InputError("mu_value: K must be >= 2");
    if (T < 1) throw InputError("mu_value: T must be >= 1");
    return std::min(1.0 / (2.0 * K), 1.0 / std::sqrt(static_cast<double>(T)));
}

double delta_t(double delta, int N, long long t) {
    if (t < 1) throw InputError("delta_t: t must be >= 1");
    double td = static_cast<double>(t);
    double l2 = std::log2(static_cast<double>(std::max<long long>(t, 2)));
    return delta / (2.0 * N * td * td * td * l2);
}

double elimination_radius(long long t, double dt) {
    if (t < 1) throw InputError("elimination_radius: t must be >= 1");
    if (!(dt > 0.0 && dt < 1.0)) throw InputError("elimination_radius: delta_t must be in (0,1)");
    return 18.0 * std::log(1.0 / dt) / static_cast<double>(t);
}

double audit_violation(const ExplorationDist& dist, const RegressorClass& cls,
                       const std::vector<double>& context_weights) {
    double bound = 0.0;
    double worst = -1e300;
    std::vector<double> expect(dist.support.size(), 0.0);
    for (int x = 0; x < static_cast<int>(context_weights.size()); ++x) {
        double wx = context_weights[static_cast<std::size_t>(x)];
        if (!(wx > 0.0)) continue;
        bound += wx * static_cast<double>(active_actions(cls, dist.support, x).size());
        const auto& row = dist.action_dist(x);
        for (std::size_t j = 0; j < dist.support.size(); ++j) {
            int a = cls.argmax_policy[static_cast<std::size_t>(dist.support[j])]
                                     [static_cast<std::size_t>(x)];
            double prop = row[static_cast<std::size_t>(a)];
            if (!(prop > 0.0))
                throw InternalError("audit_violation: zero propensity for an active policy");
            expect[j] += wx / prop;
        }
    }
    for (double e : expect) worst = std::max(worst, e - bound);
    return worst;
}

void accumulate_sq_loss(const RegressorClass& cls, int x, int a, double reward,
                        std::vector<double>& cum_sq_loss) {
    const int N = cls.size();
    for (int i = 0; i < N; ++i) {
        double err = cls.members[static_cast<std::size_t>(i)].at(x, a) - reward;
        cum_sq_loss[static_cast<std::size_t>(i)] += err * err;
    }
}

namespace {

// Uniform distribution over the full class with cached action rows; used as
// the round-1 fallback in empirical mode (no history to constrain against).
ExplorationDist uniform_dist(const Instance& inst, const std::vector<int>& support,
                             double mu) {
    ExplorationDist d;
    d.support = support;
    d.probs.assign(support.size(), 1.0 / static_cast<double>(support.size()));
    d.mu = mu;
    d.cached_action_dists.reserve(static_cast<std::size_t>(inst.num_contexts()));
    for (int x = 0; x < inst.num_contexts(); ++x)
        d.cached_action_dists.push_back(
            mixed_action_dist(d.probs, inst.regressors, support, x, mu));
    return d;
}

std::vector<double> empirical_weights(const LearnerState& state) {
    std::vector<double> w(state.context_counts.size(), 0.0);
    double total = 0.0;
    for (double v : state.context_counts) total += v;
    if (total > 0.0)
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = state.context_counts[i] / total;
    return w;
}

void solve_current(LearnerState& state, const Instance& inst, const LearnerConfig& config,
                   const std::vector<double>& weights,
                   const std::optional<std::vector<double>>& warm) {
    auto [dist, rep] = solve_exploration_dist(inst.regressors, state.active_list, weights,
                                              state.mu, config.solver, warm);
    state.current_dist = std::move(dist);
    state.pending_solver_iters += rep.iterations;
    state.current_violation = rep.final_violation;
}

}  // namespace

LearnerState make_learner_state(const Instance& inst, const LearnerConfig& config) {
    config.validate();
    LearnerState state;
    const int N = inst.N();
    state.active.assign(static_cast<std::size_t>(N), 1);
    state.active_list.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) state.active_list[static_cast<std::size_t>(i)] = i;
    state.cum_sq_loss.assign(static_cast<std::size_t>(N), 0.0);
    state.context_counts.assign(static_cast<std::size_t>(inst.num_contexts()), 0.0);
    state.mu = mu_value(inst.K(), config.T);
    if (config.dist_mode == DistMode::known) {
        solve_current(state, inst, config, inst.contexts.weights, std::nullopt);
    } else {
        state.current_dist = uniform_dist(inst, state.active_list, state.mu);
        state.current_violation = 0.0;
    }
    return state;
}

void prepare_round(LearnerState& state, const Instance& inst, const LearnerConfig& config) {
    if (config.dist_mode != DistMode::empirical) return;
    if (state.t == 0) return;  // round 1 keeps the uniform fallback
    // Warm start from the current probabilities; the solve returns in zero
    // iterations when they already satisfy the updated history constraint.
    solve_current(state, inst, config, empirical_weights(state), state.current_dist.probs);
}

std::pair<int, double> choose_action(const LearnerState& state, int x, Rng& rng) {
    const auto& row = state.current_dist.action_dist(x);
    int a = static_cast<int>(rng.sample_discrete(row));
    return {a, row[static_cast<std::size_t>(a)]};
}

void observe(LearnerState& state, const Instance& inst, int x, int a, double reward) {
    if (!(reward >= 0.0 && reward <= 1.0))
        throw InputError("observe: reward outside [0,1]");
    if (x < 0 || x >= inst.num_contexts()) throw InputError("observe: context out of range");
    if (a < 0 || a >= inst.K()) throw InputError("observe: action out of range");
    accumulate_sq_loss(inst.regressors, x, a, reward, state.cum_sq_loss);
    state.t += 1;
    if (state.context_counts.size() == static_cast<std::size_t>(inst.num_contexts()))
        state.context_counts[static_cast<std::size_t>(x)] += 1.0;
    state.history_contexts.push_back(x);
}

ElimResult eliminate(LearnerState& state, const Instance& inst, const LearnerConfig& config) {
    if (state.t < 1) throw InputError("eliminate: no rounds observed yet");
    ElimResult res;
    const double td = static_cast<double>(state.t);
    double min_loss = 1e300;
    for (int i : state.active_list)
        min_loss = std::min(min_loss, state.cum_sq_loss[static_cast<std::size_t>(i)] / td);
    const double radius =
        elimination_radius(state.t, delta_t(config.delta, inst.N(), state.t));
    const double threshold = min_loss + radius;

    std::vector<int> survivors;
    std::vector<double> warm;
    survivors.reserve(state.active_list.size());
    warm.reserve(state.active_list.size());
    for (std::size_t j = 0; j < state.active_list.size(); ++j) {
        int i = state.active_list[j];
        if (state.cum_sq_loss[static_cast<std::size_t>(i)] / td < threshold) {
            survivors.push_back(i);
            warm.push_back(state.current_dist.probs[j]);
        } else {
            state.active[static_cast<std::size_t>(i)] = 0;
            ++res.eliminated;
        }
    }
    if (survivors.empty())
        throw InternalError("eliminate: all regressors eliminated (the minimizer "
                            "must survive)");
    if (res.eliminated == 0) return res;

    state.active_list = std::move(survivors);
    if (config.dist_mode == DistMode::known) {
        solve_current(state, inst, config, inst.contexts.weights, warm);
        res.resolved = true;
    } else {
        // Restrict and renormalize; the next prepare_round re-solves against
        // the updated history.
        double total = 0.0;
        for (double v : warm) total += v;
        if (!(total > 0.0)) {
            warm.assign(state.active_list.size(),
                        1.0 / static_cast<double>(state.active_list.size()));
            total = 1.0;
        }
        for (double& v : warm) v /= total;
        ExplorationDist d;
        d.support = state.active_list;
        d.probs = std::move(warm);
        d.mu = state.mu;
        d.cached_action_dists.reserve(static_cast<std::size_t>(inst.num_contexts()));
        for (int x = 0; x < inst.num_contexts(); ++x)
            d.cached_action_dists.push_back(
                mixed_action_dist(d.probs, inst.regressors, state.active_list, x, state.mu));
        state.current_dist = std::move(d);
    }
    return res;
}

LearnerState run_episode(const Instance& inst, const LearnerConfig& config, Rng env_rng,
                         Rng act_rng, const RoundSink& sink) {
    config.validate();
    LearnerState state = make_learner_state(inst, config);
    double cum_regret = 0.0;
    long long next_elim = 1;
    const bool known = config.dist_mode == DistMode::known;
    double known_violation = state.current_violation;
    for (long long t = 1; t <= config.T; ++t) {
        prepare_round(state, inst, config);
        long long solver_iters = state.pending_solver_iters;
        state.pending_solver_iters = 0;
        double violation = known ? known_violation : state.current_violation;

        auto [x, rewards] = sample_round(inst, env_rng);
        auto [a, propensity] = choose_action(state, x, act_rng);
        double reward = rewards[static_cast<std::size_t>(a)];
        int a_star = argmax_action(inst.truth(), x);
        double instant_regret = inst.mean(x, a_star) - inst.mean(x, a);
        cum_regret += instant_regret;

        observe(state, inst, x, a, reward);

        ElimResult elim;
        bool do_elim = !config.doubling_cadence || t == next_elim;
        if (do_elim) {
            if (config.doubling_cadence) next_elim *= 2;
            elim = eliminate(state, inst, config);
            if (known && elim.resolved) known_violation = state.current_violation;
        }

        if (sink) {
            RoundDetail d;
            d.log = RoundLog{t, x, a, reward, instant_regret};
            d.propensity = propensity;
            d.n_active = state.n_active();
            d.solver_iters = solver_iters;
            d.solver_violation = violation;
            d.eliminated = elim.eliminated;
            d.cum_regret = cum_regret;
            sink(d);
        }
    }
    return state;
}

std::pair<std::vector<RoundLog>, LearnerState> run_episode_logged(
    const Instance& inst, const LearnerConfig& config, Rng env_rng, Rng act_rng) {
    std::vector<RoundLog> logs;
    logs.reserve(static_cast<std::size_t>(config.T));
    LearnerState state = run_episode(inst, config, env_rng, act_rng,
                                     [&](const RoundDetail& d) { logs.push_back(d.log); });
    return {std::move(logs), std::move(state)};
}

}  // namespace relim
