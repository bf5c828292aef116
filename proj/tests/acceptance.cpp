// Acceptance gate: nine end-to-end criteria at full scale, one verdict line
// each. Exits nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "relim/baselines.hpp"
#include "relim/diagnostics.hpp"
#include "relim/harness.hpp"
#include "relim/learner.hpp"
#include "relim/textio.hpp"

using namespace relim;
namespace fs = std::filesystem;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

int g_failures = 0;

void verdict(int criterion, bool pass, const std::string& detail, double secs) {
    if (!pass) ++g_failures;
    std::printf("criterion %d: %s (%s, %.1fs)\n", criterion, pass ? "PASS" : "FAIL",
                detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(double v) { return format_double(v); }

// ---- criterion 1: solver feasibility on 1000 random supports ----
void criterion_1() {
    Timer timer;
    Rng meta = Rng::stream(20260815, 0, 1);
    int solved = 0;
    double worst_rel = 0.0;
    long long worst_iters = 0;
    std::string failure;
    for (int i = 0; i < 1000 && failure.empty(); ++i) {
        const int n = 1 + static_cast<int>(meta.next_below(20));
        const int k = 2 + static_cast<int>(meta.next_below(9));
        const int m = 1 + static_cast<int>(meta.next_below(50));
        const Instance inst = gen_random_tabular(meta.next_u64(), n, k, std::max(m, 2));
        std::vector<int> support;
        for (int j = 0; j < m && j < inst.N(); ++j) support.push_back(j);
        std::vector<double> w(static_cast<std::size_t>(n));
        double tot = 0.0;
        for (double& v : w) {
            v = 0.01 + meta.next_double();
            tot += v;
        }
        for (double& v : w) v /= tot;
        const double mu = 0.5 * meta.next_double();
        try {
            auto [dist, rep] = solve_exploration_dist(inst.regressors, support, w, mu);
            const double viol = max_violation(dist, inst.regressors, w).violation;
            const double rel = viol / rep.bound;
            worst_rel = std::max(worst_rel, rel);
            worst_iters = std::max(worst_iters, rep.iterations);
            if (rel > 1e-6) {
                failure = "case " + std::to_string(i) + " rel violation " + fmt(rel);
            } else {
                ++solved;
            }
        } catch (const std::exception& e) {
            failure = "case " + std::to_string(i) + " threw: " + e.what();
        }
    }
    const double secs = timer.seconds();
    const bool pass = solved == 1000 && secs <= 120.0;
    std::string detail = std::to_string(solved) + "/1000 within 1e-6, worst rel " +
                         fmt(worst_rel) + ", max iters " + std::to_string(worst_iters);
    if (!failure.empty()) detail += "; " + failure;
    verdict(1, pass, detail, secs);
}

// ---- criterion 2: truth survives 2000 rounds in >= 170 of 200 runs ----
void criterion_2() {
    Timer timer;
    const Instance inst = gen_random_tabular(1, 10, 4, 20);
    LearnerConfig cfg;
    cfg.delta = 0.1;
    cfg.T = 2000;
    int survived = 0;
    for (int seed = 0; seed < 200; ++seed) {
        const LearnerState end =
            run_episode(inst, cfg, Rng::stream(1, static_cast<std::uint64_t>(seed),
                                               stream_tag::environment),
                        Rng::stream(1, static_cast<std::uint64_t>(seed), stream_tag::actions));
        if (end.truth_active(inst)) ++survived;
    }
    const double secs = timer.seconds();
    verdict(2, survived >= 170 && secs <= 600.0,
            "truth survived " + std::to_string(survived) + "/200 runs", secs);
}

ExperimentConfig scaling_config() {
    ExperimentConfig cfg;
    cfg.instance.kind = "random_tabular";
    cfg.instance.seed = 1;
    cfg.instance.num_contexts = 10;
    cfg.instance.K = 5;
    cfg.instance.N = 50;
    cfg.delta = 0.1;
    cfg.T = 10000;
    cfg.num_seeds = 50;
    cfg.master_seed = 1;
    return cfg;
}

// ---- criterion 3: sub-linear growth, cum(10000)/cum(2500) <= 2.5 ----
void criterion_3() {
    Timer timer;
    const ExperimentResult res = run_experiment(scaling_config(), 1);
    const double at_quarter = res.mean_at[1];
    const double at_full = res.mean_at[3];
    const double ratio = at_full / at_quarter;
    const double secs = timer.seconds();
    verdict(3, res.failures == 0 && ratio <= 2.5 && secs <= 1800.0,
            "mean cum regret " + fmt(at_full) + " / " + fmt(at_quarter) + " = " +
                fmt(ratio) + " (need <= 2.5), failures " + std::to_string(res.failures),
            secs);
}

// ---- criterion 4: gap instance, full elimination and horizon stability ----
void criterion_4() {
    Timer timer;
    const Instance inst = gen_nontrivial_random(11, 10, 2, 20);
    const int seeds = 30;
    bool all_collapsed = true;
    double mean_tail = 0.0;   // cum(T) - cum(last elimination)
    double mean_final_50k = 0.0;
    double mean_final_100k = 0.0;
    for (int seed = 0; seed < seeds; ++seed) {
        for (long long T : {50000LL, 100000LL}) {
            LearnerConfig cfg;
            cfg.delta = 0.1;
            cfg.T = T;
            double last_elim_cum = 0.0;
            long long last_elim_t = 0;
            double final_cum = 0.0;
            int n_active = 0;
            run_episode(inst, cfg,
                        Rng::stream(1, static_cast<std::uint64_t>(seed),
                                    stream_tag::environment),
                        Rng::stream(1, static_cast<std::uint64_t>(seed), stream_tag::actions),
                        [&](const RoundDetail& d) {
                            if (d.eliminated > 0) {
                                last_elim_t = d.log.t;
                                last_elim_cum = d.cum_regret;
                            }
                            final_cum = d.cum_regret;
                            n_active = d.n_active;
                        });
            if (T == 50000) {
                all_collapsed = all_collapsed && n_active == 1 && last_elim_t > 0;
                mean_tail += (final_cum - last_elim_cum) / seeds;
                mean_final_50k += final_cum / seeds;
            } else {
                mean_final_100k += final_cum / seeds;
            }
        }
    }
    const double drift =
        std::abs(mean_final_100k - mean_final_50k) / std::max(mean_final_50k, 1e-12);
    const double secs = timer.seconds();
    const bool pass = all_collapsed && mean_tail <= 1.0 && drift <= 0.05 && secs <= 1200.0;
    verdict(4, pass,
            std::string("all collapsed: ") + (all_collapsed ? "yes" : "no") +
                ", mean post-elimination regret " + fmt(mean_tail) +
                " (need <= 1), horizon drift " + fmt(drift) + " (need <= 0.05)",
            secs);
}

// ---- criterion 5: hard-family scaling and follow-the-leader comparison ----
void criterion_5() {
    Timer timer;
    const int seeds = 30;
    auto run_tier = [&](long long T, Algo algo) {
        ExperimentConfig cfg;
        cfg.instance.kind = "lower_bound";
        cfg.instance.seed = 5;
        cfg.instance.N = 64;
        cfg.instance.K = 4;
        cfg.algo = algo;
        cfg.delta = 0.1;
        cfg.T = T;
        cfg.num_seeds = seeds;
        cfg.master_seed = 9;
        return run_experiment(cfg, 1);
    };
    const ExperimentResult re4 = run_tier(4000, Algo::relim);
    const ExperimentResult re16 = run_tier(16000, Algo::relim);
    const ExperimentResult ftl16 = run_tier(16000, Algo::follow_the_leader);
    const double ratio = re16.mean_at.back() / re4.mean_at.back();
    int ftl_worse = 0;
    for (int i = 0; i < seeds; ++i) {
        if (ftl16.seeds[i].final_cum_regret > re16.seeds[i].final_cum_regret) ++ftl_worse;
    }
    const bool ratio_ok = ratio >= 1.3 && ratio <= 3.0;
    const bool ftl_ok = ftl_worse >= (seeds * 6 + 9) / 10;
    const double secs = timer.seconds();
    verdict(5, ratio_ok && ftl_ok && secs <= 1800.0,
            "regret ratio 16k/4k = " + fmt(ratio) + " (need in [1.3,3]), ftl worse in " +
                std::to_string(ftl_worse) + "/30 seeds (need >= 18)",
            secs);
}

// ---- criterion 6: excess-loss moment identities on random triples ----
void criterion_6() {
    Timer timer;
    const DiagSuiteResult suite = run_diag_suite(DiagKind::excess_loss, 100, 100000, 2026);
    // exact case: truth (0.5, 0.5) vs challenger (1.0, 0.5), uniform actions
    std::vector<Regressor> members{Regressor(1, 2, {0.5, 0.5}), Regressor(1, 2, {1.0, 0.5})};
    Instance inst{ContextSpace(1, {1.0}), ActionSpace(2), RegressorClass(members), 0};
    Rng rng = Rng::stream(2026, 1000, stream_tag::diagnostics);
    const DiagReport exact = diag_excess_loss(inst, 1, {{0.5, 0.5}}, 100000, rng);
    const bool exact_ok = std::abs(exact.mean_Y - 0.125) <= 3.0 * exact.se_Y;
    const double secs = timer.seconds();
    const bool pass =
        suite.identity_flags == 0 && suite.variance_flags == 0 && exact_ok && secs <= 300.0;
    verdict(6, pass,
            "identity flags " + std::to_string(suite.identity_flags) + ", variance flags " +
                std::to_string(suite.variance_flags) + ", exact case mean_Y " +
                fmt(exact.mean_Y) + " vs 0.125 +- " + fmt(3.0 * exact.se_Y),
            secs);
}

// ---- criterion 7: regret transfer bound on random triples ----
void criterion_7() {
    Timer timer;
    std::string err;
    int flags = -1;
    try {
        const DiagSuiteResult suite =
            run_diag_suite(DiagKind::regret_transfer, 100, 100000, 2026);
        flags = suite.transfer_flags;
    } catch (const std::exception& e) {
        err = e.what();
    }
    const double secs = timer.seconds();
    verdict(7, flags == 0 && secs <= 300.0,
            err.empty() ? "transfer flags " + std::to_string(flags) : "threw: " + err, secs);
}

// ---- criterion 8: empirical mode audits and known-mode agreement ----
void criterion_8() {
    Timer timer;
    const Instance inst = gen_random_tabular(1, 10, 4, 20);
    const int seeds = 20;
    const long long T = 2000;
    long long audit_rounds = 0, audit_failures = 0;
    double mean_emp = 0.0, mean_known = 0.0;
    double cross_check_manual = -1.0, cross_check_episode = -2.0;
    for (int seed = 0; seed < seeds; ++seed) {
        LearnerConfig cfg;
        cfg.delta = 0.1;
        cfg.T = T;
        cfg.dist_mode = DistMode::empirical;
        Rng env = Rng::stream(1, static_cast<std::uint64_t>(seed), stream_tag::environment);
        Rng act = Rng::stream(1, static_cast<std::uint64_t>(seed), stream_tag::actions);
        LearnerState st = make_learner_state(inst, cfg);
        std::vector<long long> counts(static_cast<std::size_t>(inst.num_contexts()), 0);
        double cum = 0.0;
        for (long long t = 1; t <= T; ++t) {
            prepare_round(st, inst, cfg);
            if (t > 1) {
                std::vector<double> hw(counts.size());
                for (std::size_t x = 0; x < counts.size(); ++x)
                    hw[x] = static_cast<double>(counts[x]) / static_cast<double>(t - 1);
                const double bound =
                    constraint_bound(inst.regressors, st.current_dist.support, hw);
                const double viol =
                    max_violation(st.current_dist, inst.regressors, hw).violation;
                ++audit_rounds;
                if (viol > 1e-6 * bound + 1e-9) ++audit_failures;
            }
            auto [x, rewards] = sample_round(inst, env);
            counts[static_cast<std::size_t>(x)] += 1;
            auto [a, prop] = choose_action(st, x, act);
            const int best = inst.regressors.argmax_policy[inst.truth_index][x];
            cum += inst.mean(x, best) - inst.mean(x, a);
            observe(st, inst, x, a, rewards[static_cast<std::size_t>(a)]);
            eliminate(st, inst, cfg);
        }
        mean_emp += cum / seeds;
        if (seed == 0) cross_check_manual = cum;

        LearnerConfig kcfg = cfg;
        kcfg.dist_mode = DistMode::known;
        double kcum = 0.0;
        run_episode(inst, kcfg,
                    Rng::stream(1, static_cast<std::uint64_t>(seed), stream_tag::environment),
                    Rng::stream(1, static_cast<std::uint64_t>(seed), stream_tag::actions),
                    [&](const RoundDetail& d) { kcum = d.cum_regret; });
        mean_known += kcum / seeds;
    }
    {
        // the manual loop above must reproduce the library episode exactly
        LearnerConfig cfg;
        cfg.delta = 0.1;
        cfg.T = T;
        cfg.dist_mode = DistMode::empirical;
        run_episode(inst, cfg, Rng::stream(1, 0, stream_tag::environment),
                    Rng::stream(1, 0, stream_tag::actions),
                    [&](const RoundDetail& d) { cross_check_episode = d.cum_regret; });
    }
    const double rel_gap = std::abs(mean_emp - mean_known) / std::max(mean_known, 1e-12);
    const double secs = timer.seconds();
    const bool pass = audit_failures == 0 && audit_rounds == seeds * (T - 1) &&
                      rel_gap <= 0.25 && cross_check_manual == cross_check_episode &&
                      secs <= 600.0;
    verdict(8, pass,
            "audited " + std::to_string(audit_rounds) + " rounds, failures " +
                std::to_string(audit_failures) + "; mean regret empirical " + fmt(mean_emp) +
                " vs known " + fmt(mean_known) + " (rel gap " + fmt(rel_gap) +
                ", need <= 0.25)",
            secs);
}

// ---- criterion 9: byte-identical output across thread counts ----
void criterion_9(const char* argv0) {
    Timer timer;
    const fs::path tmp = fs::temp_directory_path() / "relim_acceptance_c9";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const std::string dir1 = (tmp / "jobs1").string();
    const std::string dir8 = (tmp / "jobs8").string();

    bool used_cli = false;
    const fs::path cli = fs::path(argv0).parent_path() / "relim";
    if (fs::exists(cli)) {
        const std::string cfg_path = (tmp / "c9.ini").string();
        write_text_file(cfg_path,
                        "[instance]\nkind = random_tabular\nseed = 1\nnum_contexts = 10\n"
                        "K = 5\nN = 50\n\n[learner]\nalgo = relim\ndelta = 0.1\n\n"
                        "[run]\nT = 10000\nseeds = 50\nmaster_seed = 1\n");
        const std::string base = "\"" + cli.string() + "\" run --config \"" + cfg_path +
                                 "\" >/dev/null";
        used_cli = std::system((base + " --out \"" + dir1 + "\" --jobs 1").c_str()) == 0 &&
                   std::system((base + " --out \"" + dir8 + "\" --jobs 8").c_str()) == 0;
    }
    if (!used_cli) {
        ExperimentConfig cfg = scaling_config();
        cfg.out_dir = dir1;
        run_experiment(cfg, 1);
        cfg.out_dir = dir8;
        run_experiment(cfg, 8);
    }

    int compared = 0, mismatched = 0;
    for (int i = 0; i < 50; ++i) {
        const std::string name = "/seed_" + std::to_string(i) + ".csv";
        const std::string a = read_text_file(dir1 + name);
        const std::string b = read_text_file(dir8 + name);
        ++compared;
        if (a != b) ++mismatched;
    }
    if (read_text_file(dir1 + "/summary.txt") != read_text_file(dir8 + "/summary.txt"))
        ++mismatched;
    fs::remove_all(tmp);
    const double secs = timer.seconds();
    verdict(9, mismatched == 0,
            std::to_string(compared) + " csv pairs compared via " +
                (used_cli ? "cli" : "library") + ", mismatches " +
                std::to_string(mismatched),
            secs);
}

}  // namespace

int main(int, char** argv) {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9(argv[0]);
    std::printf("acceptance: %d/9 criteria passed\n", 9 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
