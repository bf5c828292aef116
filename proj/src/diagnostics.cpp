#include "relim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relim/errors.hpp"

namespace relim {

namespace {

void check_sample_count(long long num_samples) {
    if (num_samples < 1000) {
        throw InputError("diagnostics require num_samples >= 1000, got " +
                         std::to_string(num_samples));
    }
}

void check_f_index(const Instance& inst, int f_index) {
    if (f_index < 0 || f_index >= inst.N()) {
        throw InputError("diagnostic regressor index out of range");
    }
}

struct MomentStats {
    double mean_Y = 0.0;
    double var_Y = 0.0;   // sample variance, n-1 denominator
    double m4 = 0.0;      // fourth central moment
    double se_Y = 0.0;
    double se_var_Y = 0.0;
};

MomentStats moments(const std::vector<double>& ys) {
    MomentStats s;
    const double n = static_cast<double>(ys.size());
    double sum = 0.0;
    for (double y : ys) sum += y;
    s.mean_Y = sum / n;
    double m2 = 0.0, m4 = 0.0;
    for (double y : ys) {
        const double d = y - s.mean_Y;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    s.var_Y = m2 / (n - 1.0);
    s.m4 = m4 / n;
    s.se_Y = std::sqrt(s.var_Y / n);
    // Var(s^2) ~= (m4 - s^4) / n
    s.se_var_Y = std::sqrt(std::max(0.0, s.m4 - s.var_Y * s.var_Y) / n);
    return s;
}

// One sampled excess squared loss Y and squared gap g for (f, f*).
struct Draw {
    double y;
    double g;
};

Draw draw_pair(const Instance& inst, const Regressor& f, const Regressor& truth,
               int x, int a, Rng& rng) {
    const double mean = truth.at(x, a);
    const double r = rng.bernoulli(mean) ? 1.0 : 0.0;
    const double df = f.at(x, a) - r;
    const double dt = mean - r;
    const double gap = f.at(x, a) - mean;
    return {df * df - dt * dt, gap * gap};
}

}  // namespace

DiagReport diag_excess_loss(const Instance& inst, int f_index,
                            const std::vector<std::vector<double>>& action_dists,
                            long long num_samples, Rng& rng) {
    check_sample_count(num_samples);
    check_f_index(inst, f_index);
    const int n_ctx = inst.num_contexts();
    const int k = inst.K();
    if (static_cast<int>(action_dists.size()) != n_ctx) {
        throw InputError("action_dists must have one row per context");
    }
    for (const auto& row : action_dists) {
        if (static_cast<int>(row.size()) != k) {
            throw InputError("action_dists rows must have K entries");
        }
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0)) throw InputError("action probabilities must be >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw InputError("action_dists rows must sum to 1");
        }
    }

    const Regressor& f = inst.regressors.members[static_cast<std::size_t>(f_index)];
    const Regressor& truth = inst.truth();

    std::vector<double> ys(static_cast<std::size_t>(num_samples));
    double sum_g = 0.0, sum_g2 = 0.0;
    for (long long i = 0; i < num_samples; ++i) {
        const int x = rng.sample_discrete(inst.contexts.weights);
        const int a = rng.sample_discrete(action_dists[static_cast<std::size_t>(x)]);
        const Draw d = draw_pair(inst, f, truth, x, a, rng);
        ys[static_cast<std::size_t>(i)] = d.y;
        sum_g += d.g;
        sum_g2 += d.g * d.g;
    }

    const double n = static_cast<double>(num_samples);
    DiagReport rep;
    rep.num_samples = num_samples;
    const MomentStats s = moments(ys);
    rep.mean_Y = s.mean_Y;
    rep.se_Y = s.se_Y;
    rep.var_Y = s.var_Y;
    rep.se_var_Y = s.se_var_Y;
    rep.mean_sq_gap = sum_g / n;
    const double var_g =
        std::max(0.0, (sum_g2 - n * rep.mean_sq_gap * rep.mean_sq_gap) / (n - 1.0));
    rep.se_sq_gap = std::sqrt(var_g / n);

    const double id_se = std::sqrt(rep.se_Y * rep.se_Y + rep.se_sq_gap * rep.se_sq_gap);
    rep.identity_flag = std::abs(rep.mean_Y - rep.mean_sq_gap) > 3.0 * id_se;
    const double var_se =
        std::sqrt(16.0 * rep.se_Y * rep.se_Y + rep.se_var_Y * rep.se_var_Y);
    rep.variance_flag = rep.var_Y > 4.0 * rep.mean_Y + 3.0 * var_se;
    return rep;
}

DiagReport diag_regret_transfer(const Instance& inst, int f_index,
                                const ExplorationDist& dist, long long num_samples,
                                Rng& rng, double audit_tol_rel) {
    check_sample_count(num_samples);
    check_f_index(inst, f_index);
    const int n_ctx = inst.num_contexts();
    const int k = inst.K();
    const Regressor& f = inst.regressors.members[static_cast<std::size_t>(f_index)];
    const Regressor& truth = inst.truth();

    // Both policies must be sufficiently explored: E_x[1/p(pi(x)|x)] <= K.
    const int audited[2] = {f_index, inst.truth_index};
    for (int fi : audited) {
        const auto& policy =
            inst.regressors.argmax_policy[static_cast<std::size_t>(fi)];
        double expected_inv = 0.0;
        bool unreachable = false;
        for (int x = 0; x < n_ctx; ++x) {
            const double w = inst.contexts.weights[static_cast<std::size_t>(x)];
            if (w == 0.0) continue;
            const double p =
                dist.action_dist(x)[static_cast<std::size_t>(policy[static_cast<std::size_t>(x)])];
            if (p <= 0.0) {
                unreachable = true;
                break;
            }
            expected_inv += w / p;
        }
        if (unreachable || expected_inv > k * (1.0 + audit_tol_rel)) {
            throw InputError(
                "regressor " + std::to_string(fi) +
                " violates the exploration audit E_x[1/p(pi_f(x)|x)] <= K");
        }
    }

    std::vector<double> ys(static_cast<std::size_t>(num_samples));
    for (long long i = 0; i < num_samples; ++i) {
        const int x = rng.sample_discrete(inst.contexts.weights);
        const int a = rng.sample_discrete(dist.action_dist(x));
        ys[static_cast<std::size_t>(i)] = draw_pair(inst, f, truth, x, a, rng).y;
    }

    DiagReport rep;
    rep.num_samples = num_samples;
    const MomentStats s = moments(ys);
    rep.mean_Y = s.mean_Y;
    rep.se_Y = s.se_Y;
    rep.var_Y = s.var_Y;
    rep.se_var_Y = s.se_var_Y;

    const double regret = expected_instant_regret(inst, f);
    rep.regret_sq = regret * regret;
    rep.transfer_rhs = 2.0 * k * rep.mean_Y;
    rep.transfer_flag = rep.regret_sq > rep.transfer_rhs + 3.0 * (2.0 * k * rep.se_Y);
    return rep;
}

DiagTriple gen_diag_triple(std::uint64_t master_seed, std::uint64_t index,
                           bool with_exploration_dist) {
    Rng rng = Rng::stream(master_seed, index, stream_tag::diagnostics);
    const int n_ctx = 1 + static_cast<int>(rng.next_below(5));
    const int k = 2 + static_cast<int>(rng.next_below(4));
    const int n_reg = 2 + static_cast<int>(rng.next_below(9));
    const std::uint64_t inst_seed = rng.next_u64();

    DiagTriple triple;
    triple.inst = gen_random_tabular(inst_seed, n_ctx, k, n_reg);
    triple.f_index = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_reg)));

    if (with_exploration_dist) {
        const double mu = 0.05 + 0.45 * rng.next_double();
        std::vector<int> support(static_cast<std::size_t>(n_reg));
        for (int i = 0; i < n_reg; ++i) support[static_cast<std::size_t>(i)] = i;
        triple.dist = solve_exploration_dist(triple.inst.regressors, support,
                                             triple.inst.contexts.weights, mu)
                          .first;
    } else {
        triple.action_dists.assign(static_cast<std::size_t>(n_ctx),
                                   std::vector<double>(static_cast<std::size_t>(k)));
        for (auto& row : triple.action_dists) {
            double sum = 0.0;
            for (double& p : row) {
                p = 0.01 + rng.next_double();
                sum += p;
            }
            for (double& p : row) p /= sum;
        }
    }
    return triple;
}

DiagSuiteResult run_diag_suite(DiagKind kind, int num_triples, long long num_samples,
                               std::uint64_t master_seed) {
    if (num_triples < 1) throw InputError("num_triples must be >= 1");
    DiagSuiteResult result;
    result.reports.reserve(static_cast<std::size_t>(num_triples));
    for (int i = 0; i < num_triples; ++i) {
        const bool with_dist = kind == DiagKind::regret_transfer;
        DiagTriple triple =
            gen_diag_triple(master_seed, static_cast<std::uint64_t>(i), with_dist);
        Rng rng = Rng::stream(master_seed, static_cast<std::uint64_t>(i) + 0x10000,
                              stream_tag::diagnostics);
        DiagReport rep;
        if (kind == DiagKind::excess_loss) {
            rep = diag_excess_loss(triple.inst, triple.f_index, triple.action_dists,
                                   num_samples, rng);
        } else {
            rep = diag_regret_transfer(triple.inst, triple.f_index, triple.dist,
                                       num_samples, rng);
        }
        result.identity_flags += rep.identity_flag ? 1 : 0;
        result.variance_flags += rep.variance_flag ? 1 : 0;
        result.transfer_flags += rep.transfer_flag ? 1 : 0;
        result.reports.push_back(rep);
    }
    return result;
}

}  // namespace relim
