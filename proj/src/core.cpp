#include "relim/core.hpp"

#include <cmath>

namespace relim {

ContextSpace::ContextSpace(int n, std::vector<double> w)
    : num_contexts(n), weights(std::move(w)) {
    if (num_contexts < 1) throw InputError("ContextSpace: need at least one context");
    if (static_cast<int>(weights.size()) != num_contexts)
        throw InputError("ContextSpace: weight count mismatch");
    double total = 0.0;
    for (double v : weights) {
        if (!(v >= 0.0)) throw InputError("ContextSpace: negative weight");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw InputError("ContextSpace: weights must sum to 1");
}

Regressor::Regressor(int n, int k, std::vector<double> vals)
    : num_contexts(n), K(k), values(std::move(vals)) {
    if (num_contexts < 1 || K < 2) throw InputError("Regressor: invalid table shape");
    if (values.size() != static_cast<std::size_t>(num_contexts) * K)
        throw InputError("Regressor: value count mismatch");
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0)) throw InputError("Regressor: entry outside [0,1]");
}

int argmax_action(const Regressor& f, int x) {
    if (x < 0 || x >= f.num_contexts) throw InputError("argmax_action: context out of range");
    int best = 0;
    double best_val = f.at(x, 0);
    for (int a = 1; a < f.K; ++a) {
        double v = f.at(x, a);
        if (v > best_val) {
            best_val = v;
            best = a;
        }
    }
    return best;
}

RegressorClass::RegressorClass(std::vector<Regressor> m) : members(std::move(m)) {
    if (members.empty()) throw InputError("RegressorClass: need at least one member");
    const int n = members.front().num_contexts;
    const int k = members.front().K;
    argmax_policy.reserve(members.size());
    for (const Regressor& f : members) {
        if (f.num_contexts != n || f.K != k)
            throw InputError("RegressorClass: inconsistent member shapes");
        std::vector<int> pol(n);
        for (int x = 0; x < n; ++x) pol[x] = argmax_action(f, x);
        argmax_policy.push_back(std::move(pol));
    }
}

std::vector<int> active_actions(const RegressorClass& cls,
                                const std::vector<int>& active, int x) {
    if (active.empty()) throw InputError("active_actions: empty regressor subset");
    if (x < 0 || x >= cls.num_contexts())
        throw InputError("active_actions: context out of range");
    std::vector<char> seen(static_cast<std::size_t>(cls.num_actions()), 0);
    for (int i : active) {
        if (i < 0 || i >= cls.size())
            throw InputError("active_actions: regressor index out of range");
        seen[static_cast<std::size_t>(cls.argmax_policy[i][x])] = 1;
    }
    std::vector<int> out;
    for (int a = 0; a < cls.num_actions(); ++a)
        if (seen[a]) out.push_back(a);
    return out;
}

double avg_squared_loss(const std::vector<RoundLog>& history, const Regressor& f) {
    if (history.empty()) throw InputError("avg_squared_loss: empty history");
    double sum = 0.0;
    for (const RoundLog& rl : history) {
        double err = f.at(rl.context, rl.action) - rl.reward;
        sum += err * err;
    }
    return sum / static_cast<double>(history.size());
}

}  // namespace relim
