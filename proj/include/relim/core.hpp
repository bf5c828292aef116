#pragma once

#include <cstddef>
#include <vector>

#include "relim/errors.hpp"

namespace relim {

// Actions are dense indices 0..K-1.
struct ActionSpace {
    int K = 0;

    ActionSpace() = default;
    explicit ActionSpace(int k) : K(k) {
        if (K < 2) throw InputError("ActionSpace: K must be >= 2");
    }
};

// Contexts are dense indices 0..num_contexts-1 with a known sampling
// distribution over them.
struct ContextSpace {
    int num_contexts = 0;
    std::vector<double> weights;

    ContextSpace() = default;
    ContextSpace(int n, std::vector<double> w);
};

// A predicted-mean table over (context, action), entries in [0,1].
struct Regressor {
    int num_contexts = 0;
    int K = 0;
    std::vector<double> values;  // row-major [x*K + a]

    Regressor() = default;
    Regressor(int n, int k, std::vector<double> vals);

    double at(int x, int a) const {
        if (x < 0 || x >= num_contexts || a < 0 || a >= K)
            throw InputError("Regressor::at: index out of range");
        return values[static_cast<std::size_t>(x) * K + a];
    }
};

// Smallest action index maximizing f(x,.) (deterministic tie-break).
int argmax_action(const Regressor& f, int x);

// Ordered list of N regressors with their induced argmax policies
// precomputed (policy[i][x] = argmax_action(members[i], x)).
struct RegressorClass {
    std::vector<Regressor> members;
    std::vector<std::vector<int>> argmax_policy;

    RegressorClass() = default;
    explicit RegressorClass(std::vector<Regressor> m);

    int size() const { return static_cast<int>(members.size()); }
    int num_contexts() const { return members.empty() ? 0 : members.front().num_contexts; }
    int num_actions() const { return members.empty() ? 0 : members.front().K; }
};

// One observed round. reward is the realized value of the chosen action.
struct RoundLog {
    long long t = 0;  // 1-based round index
    int context = 0;
    int action = 0;
    double reward = 0.0;
    double instant_regret = 0.0;
};

// Sorted distinct actions {argmax_action(f,x) : f in the active subset}.
std::vector<int> active_actions(const RegressorClass& cls,
                                const std::vector<int>& active, int x);

// Arithmetic mean of (f(x,a) - r)^2 over the history.
double avg_squared_loss(const std::vector<RoundLog>& history, const Regressor& f);

}  // namespace relim
