#include "doctest.h"

#include <cmath>
#include <vector>

#include "relim/baselines.hpp"
#include "relim/errors.hpp"
#include "relim/learner.hpp"

using namespace relim;

TEST_CASE("epsilon schedule clamps to one and decays as t^(-1/3)") {
    BaselineConfig cfg;
    cfg.kind = BaselineKind::epsilon_greedy;
    CHECK(epsilon_schedule(cfg, 4, 20, 1) == 1.0);
    const double expected = std::cbrt(4.0 * std::log(20.0) / 1000.0);
    CHECK(epsilon_schedule(cfg, 4, 20, 1000) == doctest::Approx(expected).epsilon(1e-12));
    cfg.epsilon_c = 0.5;
    CHECK(epsilon_schedule(cfg, 4, 20, 1000) == doctest::Approx(0.5 * expected).epsilon(1e-12));
}

TEST_CASE("leader takes the lowest index on ties") {
    BaselineState st;
    st.cum_sq_loss = {3.0, 1.0, 1.0, 2.0};
    st.t = 10;
    CHECK(leader_index(st, 4) == 1);
    st.cum_sq_loss = {0.0, 0.0};
    CHECK(leader_index(st, 2) == 0);
}

TEST_CASE("uniform baseline has propensity 1/K and near-uniform frequencies") {
    const Instance inst = gen_random_tabular(6, 2, 4, 5);
    BaselineConfig cfg;
    cfg.kind = BaselineKind::uniform;
    BaselineState st = make_baseline_state(inst);
    Rng rng = Rng::stream(3, 0, stream_tag::actions);
    std::vector<double> freq(4, 0.0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        auto [a, prop] = baseline_choose(cfg, st, inst, 0, rng);
        CHECK(prop == 0.25);
        freq[static_cast<std::size_t>(a)] += 1.0 / n;
    }
    for (double f : freq) CHECK(f == doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("follow-the-leader with one member always plays its argmax") {
    std::vector<Regressor> members{Regressor(2, 3, {0.9, 0.1, 0.0, 0.1, 0.2, 0.7})};
    Instance inst{ContextSpace(2, {0.5, 0.5}), ActionSpace(3), RegressorClass(members), 0};
    BaselineConfig cfg;
    cfg.kind = BaselineKind::follow_the_leader;
    cfg.T = 30;
    double regret = 0.0;
    run_baseline_episode(inst, cfg, Rng::stream(2, 0, stream_tag::environment),
                         Rng::stream(2, 0, stream_tag::actions), [&](const RoundDetail& d) {
                             CHECK(d.propensity == 1.0);
                             CHECK(d.log.action ==
                                   inst.regressors.argmax_policy[0][d.log.context]);
                             regret += d.log.instant_regret;
                             CHECK(d.n_active == 1);
                             CHECK(d.solver_iters == 0);
                             CHECK(d.solver_violation == 0.0);
                         });
    CHECK(regret == 0.0);
}

TEST_CASE("fully exploring epsilon-greedy matches the uniform propensity") {
    const Instance inst = gen_random_tabular(6, 2, 4, 5);
    BaselineConfig cfg;
    cfg.kind = BaselineKind::epsilon_greedy;
    BaselineState st = make_baseline_state(inst);  // t = 0 -> eps_1 = 1
    Rng rng = Rng::stream(9, 0, stream_tag::actions);
    for (int i = 0; i < 200; ++i) {
        auto [a, prop] = baseline_choose(cfg, st, inst, 1, rng);
        CHECK(prop == doctest::Approx(0.25).epsilon(1e-15));
    }
}

TEST_CASE("epsilon-greedy propensity splits between exploration and the leader") {
    const Instance inst = gen_random_tabular(6, 2, 4, 5);
    BaselineConfig cfg;
    cfg.kind = BaselineKind::epsilon_greedy;
    BaselineState st = make_baseline_state(inst);
    st.t = 100000;  // eps small
    const double eps = epsilon_schedule(cfg, 4, 5, st.t + 1);
    const int greedy = inst.regressors.argmax_policy[leader_index(st, 5)][0];
    Rng rng = Rng::stream(10, 0, stream_tag::actions);
    for (int i = 0; i < 500; ++i) {
        auto [a, prop] = baseline_choose(cfg, st, inst, 0, rng);
        if (a == greedy)
            CHECK(prop == doctest::Approx(1.0 - eps + eps / 4).epsilon(1e-12));
        else
            CHECK(prop == doctest::Approx(eps / 4).epsilon(1e-12));
    }
}

TEST_CASE("baseline loss accounting is bit-identical to the learner's") {
    const Instance inst = gen_random_tabular(17, 3, 3, 7);
    LearnerConfig lcfg;
    lcfg.T = 100;
    LearnerState ls = make_learner_state(inst, lcfg);
    BaselineState bs = make_baseline_state(inst);
    Rng env = Rng::stream(6, 0, stream_tag::environment);
    Rng pick = Rng::stream(6, 0, stream_tag::actions);
    for (int t = 0; t < 100; ++t) {
        auto [x, rewards] = sample_round(inst, env);
        const int a = static_cast<int>(pick.next_below(3));
        observe(ls, inst, x, a, rewards[static_cast<std::size_t>(a)]);
        baseline_observe(bs, inst, x, a, rewards[static_cast<std::size_t>(a)]);
    }
    for (int i = 0; i < 7; ++i) CHECK(ls.cum_sq_loss[i] == bs.cum_sq_loss[i]);
    CHECK_THROWS_AS(baseline_observe(bs, inst, 0, 0, 1.0001), InputError);
}

TEST_CASE("all learners see the same context stream for a seed") {
    const Instance inst = gen_random_tabular(30, 4, 3, 6);
    std::vector<int> ctx_relim, ctx_uni, ctx_ftl;
    LearnerConfig lcfg;
    lcfg.T = 50;
    run_episode(inst, lcfg, Rng::stream(11, 3, stream_tag::environment),
                Rng::stream(11, 3, stream_tag::actions),
                [&](const RoundDetail& d) { ctx_relim.push_back(d.log.context); });
    const std::vector<std::pair<BaselineKind, std::vector<int>*>> cases{
        {BaselineKind::uniform, &ctx_uni}, {BaselineKind::follow_the_leader, &ctx_ftl}};
    for (const auto& [kind, sink] : cases) {
        BaselineConfig bcfg;
        bcfg.kind = kind;
        bcfg.T = 50;
        run_baseline_episode(inst, bcfg, Rng::stream(11, 3, stream_tag::environment),
                             Rng::stream(11, 3, stream_tag::actions),
                             [&](const RoundDetail& d) { sink->push_back(d.log.context); });
    }
    CHECK(ctx_relim == ctx_uni);
    CHECK(ctx_relim == ctx_ftl);
}
