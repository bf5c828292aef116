#include "relim/instance.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "relim/textio.hpp"

namespace relim {

void Instance::validate() const {
    if (truth_index < 0 || truth_index >= regressors.size())
        throw InputError("Instance: truth_index out of range");
    if (regressors.num_contexts() != contexts.num_contexts ||
        regressors.num_actions() != actions.K)
        throw InputError("Instance: regressor shape mismatch");
}

LowerBoundParams lower_bound_params(long long N_target, int K, long long T,
                                    double epsilon_scale) {
    if (K < 2) throw InputError("lower_bound_params: K must be >= 2");
    if (N_target < K) throw InputError("lower_bound_params: N_target must be >= K");
    if (T < 1) throw InputError("lower_bound_params: T must be >= 1");
    if (!(epsilon_scale > 0.0)) throw InputError("lower_bound_params: epsilon_scale must be > 0");
    // Integer loop, not floor(log) in floating point: exact powers such as
    // N_target = K^M would otherwise round down.
    long long count = 1;
    int M = 0;
    while (count <= N_target / K && count * K <= N_target) {
        count *= K;
        ++M;
        if (count > 1000000)
            throw CapacityError("lower_bound_params: K^M exceeds 10^6 regressors");
    }
    if (M > T) throw InputError("lower_bound_params: require M <= T");
    LowerBoundParams p;
    p.N_target = N_target;
    p.K = K;
    p.T = T;
    p.M = M;
    p.epsilon = std::min(0.5, epsilon_scale * std::sqrt(static_cast<double>(K) * M /
                                                        static_cast<double>(T)));
    return p;
}

Instance gen_random_tabular(std::uint64_t seed, int num_contexts, int K, int N) {
    if (N < 2) throw InputError("gen_random_tabular: N must be >= 2");
    if (K < 2) throw InputError("gen_random_tabular: K must be >= 2");
    if (num_contexts < 1) throw InputError("gen_random_tabular: need at least one context");
    Rng rng = Rng::stream(seed, 0, stream_tag::instance);
    std::vector<Regressor> members;
    members.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        std::vector<double> vals(static_cast<std::size_t>(num_contexts) * K);
        for (double& v : vals) v = rng.next_double();
        members.emplace_back(num_contexts, K, std::move(vals));
    }
    Instance inst;
    inst.contexts = ContextSpace(num_contexts,
                                 std::vector<double>(num_contexts, 1.0 / num_contexts));
    inst.actions = ActionSpace(K);
    inst.regressors = RegressorClass(std::move(members));
    inst.truth_index = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(N)));
    inst.validate();
    return inst;
}

Instance gen_lower_bound(std::uint64_t seed, long long N_target, int K,
                         long long T, double epsilon_scale) {
    LowerBoundParams p = lower_bound_params(N_target, K, T, epsilon_scale);
    long long count = 1;
    for (int i = 0; i < p.M; ++i) count *= K;
    std::vector<Regressor> members;
    members.reserve(static_cast<std::size_t>(count));
    for (long long g = 0; g < count; ++g) {
        std::vector<double> vals(static_cast<std::size_t>(p.M) * K, 0.5);
        long long rem = g;
        for (int x = 0; x < p.M; ++x) {
            int ax = static_cast<int>(rem % K);
            rem /= K;
            vals[static_cast<std::size_t>(x) * K + ax] = 0.5 + p.epsilon;
        }
        members.emplace_back(p.M, K, std::move(vals));
    }
    Rng rng = Rng::stream(seed, 0, stream_tag::instance);
    Instance inst;
    inst.contexts = ContextSpace(p.M, std::vector<double>(p.M, 1.0 / p.M));
    inst.actions = ActionSpace(K);
    inst.regressors = RegressorClass(std::move(members));
    inst.truth_index = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(count)));
    inst.validate();
    return inst;
}

Instance gen_nontrivial(const Regressor& base_means,
                        const std::vector<std::vector<int>>& policies) {
    const int n = base_means.num_contexts;
    const int K = base_means.K;
    std::vector<int> optimal(n);
    for (int x = 0; x < n; ++x) {
        optimal[x] = argmax_action(base_means, x);
        double best = base_means.at(x, optimal[x]);
        double second = -1.0;
        for (int a = 0; a < K; ++a)
            if (a != optimal[x]) second = std::max(second, base_means.at(x, a));
        if (best - second < 0.01)
            throw InputError("gen_nontrivial: base means need a unique optimal action "
                             "with margin >= 0.01 per context");
    }
    int truth_pos = -1;
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < policies.size(); ++i) {
        if (static_cast<int>(policies[i].size()) != n)
            throw InputError("gen_nontrivial: policy length mismatch");
        for (int a : policies[i])
            if (a < 0 || a >= K) throw InputError("gen_nontrivial: policy action out of range");
        if (!seen.insert(policies[i]).second)
            throw InputError("gen_nontrivial: duplicate policy");
        if (policies[i] == optimal) truth_pos = static_cast<int>(i);
    }
    if (truth_pos < 0)
        throw InputError("gen_nontrivial: policy set must contain the optimal policy");

    std::vector<Regressor> members;
    members.reserve(policies.size());
    for (std::size_t i = 0; i < policies.size(); ++i) {
        if (static_cast<int>(i) == truth_pos) {
            members.push_back(base_means);
            continue;
        }
        const std::vector<int>& pi = policies[i];
        std::vector<double> vals(static_cast<std::size_t>(n) * K);
        for (int x = 0; x < n; ++x) {
            for (int a = 0; a < K; ++a) {
                double m = base_means.at(x, a);
                if (a == pi[x])
                    vals[static_cast<std::size_t>(x) * K + a] = (m > 0.75) ? 0.51 : 1.0;
                else
                    vals[static_cast<std::size_t>(x) * K + a] = (m > 0.25) ? 0.0 : 0.5;
            }
        }
        members.emplace_back(n, K, std::move(vals));
    }

    Instance inst;
    inst.contexts = ContextSpace(n, std::vector<double>(n, 1.0 / n));
    inst.actions = ActionSpace(K);
    inst.regressors = RegressorClass(std::move(members));
    inst.truth_index = truth_pos;
    inst.validate();

    // Audit: each constructed member's argmax policy must equal its target
    // policy, and the squared prediction gap must be at least 1/20 everywhere.
    for (std::size_t i = 0; i < policies.size(); ++i) {
        if (static_cast<int>(i) == truth_pos) continue;
        if (inst.regressors.argmax_policy[i] != policies[i])
            throw InternalError("gen_nontrivial: constructed regressor's argmax "
                                "deviates from its policy");
    }
    if (inst.N() > 1 && min_squared_gap(inst) < 0.05)
        throw InternalError("gen_nontrivial: squared gap below 1/20");
    return inst;
}

Instance gen_nontrivial_random(std::uint64_t seed, int num_contexts, int K, int N) {
    if (N < 1) throw InputError("gen_nontrivial_random: N must be >= 1");
    if (K < 2) throw InputError("gen_nontrivial_random: K must be >= 2");
    if (num_contexts < 1) throw InputError("gen_nontrivial_random: need a context");
    long long policy_count = 1;
    for (int x = 0; x < num_contexts && policy_count < N; ++x) policy_count *= K;
    if (policy_count < N)
        throw InputError("gen_nontrivial_random: fewer than N distinct policies exist");
    Rng rng = Rng::stream(seed, 0, stream_tag::instance);
    std::vector<double> base(static_cast<std::size_t>(num_contexts) * K);
    for (int x = 0; x < num_contexts; ++x) {
        while (true) {
            for (int a = 0; a < K; ++a)
                base[static_cast<std::size_t>(x) * K + a] = rng.next_double();
            double best = -1.0, second = -1.0;
            for (int a = 0; a < K; ++a) {
                double v = base[static_cast<std::size_t>(x) * K + a];
                if (v > best) {
                    second = best;
                    best = v;
                } else if (v > second) {
                    second = v;
                }
            }
            if (best - second >= 0.01) break;
        }
    }
    Regressor base_means(num_contexts, K, base);
    std::vector<int> optimal(num_contexts);
    for (int x = 0; x < num_contexts; ++x) optimal[x] = argmax_action(base_means, x);

    std::set<std::vector<int>> chosen;
    chosen.insert(optimal);
    std::vector<std::vector<int>> policies;
    policies.push_back(optimal);
    while (static_cast<int>(policies.size()) < N) {
        std::vector<int> pi(num_contexts);
        for (int x = 0; x < num_contexts; ++x)
            pi[x] = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(K)));
        if (chosen.insert(pi).second) policies.push_back(std::move(pi));
    }
    return gen_nontrivial(base_means, policies);
}

std::pair<int, std::vector<double>> sample_round(const Instance& inst, Rng& rng) {
    int x = static_cast<int>(rng.sample_discrete(inst.contexts.weights));
    std::vector<double> rewards(static_cast<std::size_t>(inst.K()));
    for (int a = 0; a < inst.K(); ++a)
        rewards[static_cast<std::size_t>(a)] = rng.bernoulli(inst.mean(x, a)) ? 1.0 : 0.0;
    return {x, std::move(rewards)};
}

double expected_instant_regret(const Instance& inst, const Regressor& f) {
    const Regressor& star = inst.truth();
    double total = 0.0;
    for (int x = 0; x < inst.num_contexts(); ++x) {
        int a_star = argmax_action(star, x);
        int a_f = argmax_action(f, x);
        total += inst.contexts.weights[static_cast<std::size_t>(x)] *
                 (star.at(x, a_star) - star.at(x, a_f));
    }
    return total;
}

double min_squared_gap(const Instance& inst) {
    if (inst.N() < 2) throw InputError("min_squared_gap: need a non-truth member");
    const Regressor& star = inst.truth();
    double lo = 1.0;
    for (int i = 0; i < inst.N(); ++i) {
        if (i == inst.truth_index) continue;
        const Regressor& f = inst.regressors.members[static_cast<std::size_t>(i)];
        for (int x = 0; x < inst.num_contexts(); ++x)
            for (int a = 0; a < inst.K(); ++a) {
                double d = f.at(x, a) - star.at(x, a);
                lo = std::min(lo, d * d);
            }
    }
    return lo;
}

std::string serialize_instance(const Instance& inst) {
    std::ostringstream out;
    out << "relim-instance v1\n";
    out << "num_contexts " << inst.num_contexts() << "\n";
    out << "K " << inst.K() << "\n";
    out << "N " << inst.N() << "\n";
    out << "truth_index " << inst.truth_index << "\n";
    out << "reward_kind bernoulli\n";
    out << "weights";
    for (double w : inst.contexts.weights) out << " " << format_double(w);
    out << "\n";
    for (int i = 0; i < inst.N(); ++i) {
        out << "table " << i << "\n";
        const Regressor& f = inst.regressors.members[static_cast<std::size_t>(i)];
        for (int x = 0; x < inst.num_contexts(); ++x) {
            for (int a = 0; a < inst.K(); ++a) {
                if (a) out << " ";
                out << format_double(f.at(x, a));
            }
            out << "\n";
        }
    }
    out << "end\n";
    return out.str();
}

namespace {

struct LineReader {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;

    std::string_view next(const char* what) {
        while (pos < lines.size() && trim(lines[pos]).empty()) ++pos;
        if (pos >= lines.size())
            throw InputError(std::string("instance file: unexpected end, expected ") + what);
        return trim(lines[pos++]);
    }
};

long long field_int(std::string_view line, std::string_view key) {
    auto parts = split(line, ' ');
    if (parts.size() != 2 || parts[0] != key)
        throw InputError("instance file: expected '" + std::string(key) + " <value>'");
    return parse_int(parts[1], key);
}

}  // namespace

Instance deserialize_instance(const std::string& text) {
    LineReader r;
    r.lines = split(text, '\n');
    if (r.next("magic header") != "relim-instance v1")
        throw InputError("instance file: bad magic header");
    const int n = static_cast<int>(field_int(r.next("num_contexts"), "num_contexts"));
    const int K = static_cast<int>(field_int(r.next("K"), "K"));
    const int N = static_cast<int>(field_int(r.next("N"), "N"));
    const int truth = static_cast<int>(field_int(r.next("truth_index"), "truth_index"));
    auto kind_parts = split(r.next("reward_kind"), ' ');
    if (kind_parts.size() != 2 || kind_parts[0] != "reward_kind" ||
        kind_parts[1] != "bernoulli")
        throw InputError("instance file: unsupported reward_kind");
    auto weight_parts = split(r.next("weights"), ' ');
    if (weight_parts.empty() || weight_parts[0] != "weights")
        throw InputError("instance file: expected weights line");
    if (static_cast<int>(weight_parts.size()) != n + 1)
        throw InputError("instance file: weight count mismatch");
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x)
        weights.push_back(parse_double(weight_parts[static_cast<std::size_t>(x) + 1], "weight"));

    std::vector<Regressor> members;
    members.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        auto head = split(r.next("table header"), ' ');
        if (head.size() != 2 || head[0] != "table" ||
            parse_int(head[1], "table index") != i)
            throw InputError("instance file: expected 'table " + std::to_string(i) + "'");
        std::vector<double> vals;
        vals.reserve(static_cast<std::size_t>(n) * K);
        for (int x = 0; x < n; ++x) {
            auto row = split(r.next("table row"), ' ');
            if (static_cast<int>(row.size()) != K)
                throw InputError("instance file: row width mismatch");
            for (int a = 0; a < K; ++a) vals.push_back(parse_double(row[static_cast<std::size_t>(a)], "table value"));
        }
        members.emplace_back(n, K, std::move(vals));
    }
    if (r.next("end marker") != "end") throw InputError("instance file: missing end marker");

    Instance inst;
    inst.contexts = ContextSpace(n, std::move(weights));
    inst.actions = ActionSpace(K);
    inst.regressors = RegressorClass(std::move(members));
    inst.truth_index = truth;
    inst.reward_kind = RewardKind::bernoulli;
    inst.validate();
    return inst;
}

void save_instance(const Instance& inst, const std::string& path) {
    write_text_file(path, serialize_instance(inst));
}

Instance load_instance(const std::string& path) {
    return deserialize_instance(read_text_file(path));
}

}  // namespace relim
