#include "doctest.h"

#include <algorithm>
#include <vector>

#include "relim/core.hpp"
#include "relim/errors.hpp"
#include "relim/rng.hpp"

using namespace relim;

namespace {

Regressor table(int n, int k, std::vector<double> vals) {
    return Regressor(n, k, std::move(vals));
}

}  // namespace

TEST_CASE("action space requires at least two actions") {
    CHECK_THROWS_AS(ActionSpace(1), InputError);
    CHECK_THROWS_AS(ActionSpace(0), InputError);
    CHECK(ActionSpace(2).K == 2);
}

TEST_CASE("context weights must be a distribution") {
    CHECK_NOTHROW(ContextSpace(2, {0.25, 0.75}));
    CHECK_THROWS_AS(ContextSpace(2, {0.5, 0.4}), InputError);
    CHECK_THROWS_AS(ContextSpace(2, {1.5, -0.5}), InputError);
    CHECK_THROWS_AS(ContextSpace(3, {0.5, 0.5}), InputError);
    CHECK_THROWS_AS(ContextSpace(0, {}), InputError);
    // within the 1e-12 sum tolerance
    CHECK_NOTHROW(ContextSpace(2, {0.5 + 4e-13, 0.5}));
}

TEST_CASE("regressor values live in [0,1] with row-major indexing") {
    CHECK_THROWS_AS(table(1, 2, {0.5, 1.5}), InputError);
    CHECK_THROWS_AS(table(1, 2, {-0.1, 0.5}), InputError);
    CHECK_THROWS_AS(table(2, 2, {0.1, 0.2, 0.3}), InputError);
    const Regressor f = table(2, 3, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
    CHECK(f.at(0, 2) == 0.2);
    CHECK(f.at(1, 0) == 0.3);
    CHECK_THROWS_AS(f.at(2, 0), InputError);
    CHECK_THROWS_AS(f.at(0, 3), InputError);
}

TEST_CASE("argmax takes the lowest index on ties") {
    const Regressor f = table(2, 3, {0.2, 0.9, 0.9, 0.4, 0.4, 0.1});
    CHECK(argmax_action(f, 0) == 1);
    CHECK(argmax_action(f, 1) == 0);
    const Regressor flat = table(1, 4, {0.3, 0.3, 0.3, 0.3});
    CHECK(argmax_action(flat, 0) == 0);
}

TEST_CASE("regressor class precomputes argmax policies") {
    RegressorClass cls({table(2, 2, {0.9, 0.1, 0.2, 0.8}),
                        table(2, 2, {0.1, 0.9, 0.7, 0.3})});
    CHECK(cls.argmax_policy[0] == std::vector<int>{0, 1});
    CHECK(cls.argmax_policy[1] == std::vector<int>{1, 0});
    CHECK_THROWS_AS(RegressorClass(std::vector<Regressor>{}), InputError);
    CHECK_THROWS_AS(RegressorClass({table(1, 2, {0.1, 0.2}), table(2, 2, {0.1, 0.2, 0.3, 0.4})}),
                    InputError);
}

TEST_CASE("active actions are the sorted distinct argmaxes of the active set") {
    RegressorClass cls({table(1, 4, {0.9, 0.0, 0.0, 0.0}),
                        table(1, 4, {0.0, 0.0, 0.9, 0.0}),
                        table(1, 4, {0.8, 0.1, 0.0, 0.0})});
    CHECK(active_actions(cls, {0, 1, 2}, 0) == std::vector<int>{0, 2});
    CHECK(active_actions(cls, {1}, 0) == std::vector<int>{2});
    CHECK_THROWS_AS(active_actions(cls, {}, 0), InputError);
    CHECK_THROWS_AS(active_actions(cls, {3}, 0), InputError);
    CHECK_THROWS_AS(active_actions(cls, {0}, 1), InputError);
}

TEST_CASE("active actions grow monotonically with the active set") {
    Rng rng = Rng::stream(313, 0, 99);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 1 + static_cast<int>(rng.next_below(4));
        const int k = 2 + static_cast<int>(rng.next_below(5));
        std::vector<Regressor> members;
        for (int i = 0; i < 6; ++i) {
            std::vector<double> vals;
            for (int j = 0; j < n * k; ++j) vals.push_back(rng.next_double());
            members.emplace_back(n, k, std::move(vals));
        }
        RegressorClass cls(std::move(members));
        for (int x = 0; x < n; ++x) {
            const auto small = active_actions(cls, {0, 1, 2}, x);
            const auto big = active_actions(cls, {0, 1, 2, 3, 4, 5}, x);
            CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
            CHECK(std::is_sorted(big.begin(), big.end()));
        }
    }
}

TEST_CASE("average squared loss over a history") {
    const Regressor f = table(2, 2, {0.5, 0.0, 0.1, 0.0});
    // losses (0.5-0)^2 and (0.1-0)^2 -> mean 0.13
    std::vector<RoundLog> hist;
    hist.push_back({1, 0, 0, 0.0, 0.0});
    hist.push_back({2, 1, 0, 0.0, 0.0});
    CHECK(avg_squared_loss(hist, f) == doctest::Approx(0.13).epsilon(1e-12));
    CHECK_THROWS_AS(avg_squared_loss({}, f), InputError);
}

TEST_CASE("average squared loss is permutation invariant") {
    const Regressor f = table(3, 2, {0.2, 0.8, 0.4, 0.6, 0.9, 0.1});
    Rng rng = Rng::stream(7, 1, 99);
    std::vector<RoundLog> hist;
    for (int t = 1; t <= 50; ++t) {
        hist.push_back({static_cast<long long>(t), static_cast<int>(rng.next_below(3)),
                        static_cast<int>(rng.next_below(2)), rng.next_double(), 0.0});
    }
    auto shuffled = hist;
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.next_below(i)]);
    CHECK(avg_squared_loss(hist, f) == doctest::Approx(avg_squared_loss(shuffled, f)).epsilon(1e-12));
}
