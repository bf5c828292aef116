#include "relim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace relim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-solve precomputation restricted to positive-weight contexts.
struct Layout {
    int m = 0;
    double mu = 0.0;
    double one_minus_mu = 0.0;
    std::vector<double> w;                               // positive weights
    std::vector<int> kx;                                 // |A(F',x)| per kept context
    std::vector<std::vector<int>> amap;                  // [ctx][j] dense active-action id
    std::vector<std::vector<std::vector<int>>> members_at;  // [ctx][dense a] member ids
    double bound = 0.0;

    Layout(const RegressorClass& cls, const std::vector<int>& support,
           const std::vector<double>& weights, double mu_in) {
        m = static_cast<int>(support.size());
        mu = mu_in;
        one_minus_mu = 1.0 - mu;
        const int K = cls.num_actions();
        std::vector<int> dense(static_cast<std::size_t>(K));
        for (int x = 0; x < static_cast<int>(weights.size()); ++x) {
            double wx = weights[static_cast<std::size_t>(x)];
            if (!(wx > 0.0)) continue;
            std::fill(dense.begin(), dense.end(), -1);
            std::vector<int> am(static_cast<std::size_t>(m));
            std::vector<std::vector<int>> mem;
            for (int j = 0; j < m; ++j) {
                int a = cls.argmax_policy[static_cast<std::size_t>(support[static_cast<std::size_t>(j)])]
                                        [static_cast<std::size_t>(x)];
                if (dense[static_cast<std::size_t>(a)] < 0) {
                    dense[static_cast<std::size_t>(a)] = static_cast<int>(mem.size());
                    mem.emplace_back();
                }
                int id = dense[static_cast<std::size_t>(a)];
                am[static_cast<std::size_t>(j)] = id;
                mem[static_cast<std::size_t>(id)].push_back(j);
            }
            w.push_back(wx);
            kx.push_back(static_cast<int>(mem.size()));
            amap.push_back(std::move(am));
            members_at.push_back(std::move(mem));
            bound += wx * kx.back();
        }
    }

    int num_ctx() const { return static_cast<int>(w.size()); }

    // Fills c (violated objective per member) and inv (1/propensity per
    // context and dense active action). Returns max_j c_j - bound.
    double eval(const std::vector<double>& P, std::vector<double>& c,
                std::vector<std::vector<double>>& inv, int* witness = nullptr) const {
        std::fill(c.begin(), c.end(), 0.0);
        for (int cx = 0; cx < num_ctx(); ++cx) {
            const auto& mem = members_at[static_cast<std::size_t>(cx)];
            auto& row = inv[static_cast<std::size_t>(cx)];
            row.assign(mem.size(), 0.0);
            const double floor_mass = mu / kx[static_cast<std::size_t>(cx)];
            for (std::size_t a = 0; a < mem.size(); ++a) {
                double q = 0.0;
                for (int j : mem[a]) q += P[static_cast<std::size_t>(j)];
                double prop = one_minus_mu * q + floor_mass;
                row[a] = (prop > 0.0) ? 1.0 / prop : kInf;
            }
            const double wx = w[static_cast<std::size_t>(cx)];
            const auto& am = amap[static_cast<std::size_t>(cx)];
            for (int j = 0; j < m; ++j)
                c[static_cast<std::size_t>(j)] += wx * row[static_cast<std::size_t>(am[static_cast<std::size_t>(j)])];
        }
        double best = -kInf;
        int arg = 0;
        for (int j = 0; j < m; ++j)
            if (c[static_cast<std::size_t>(j)] > best) {
                best = c[static_cast<std::size_t>(j)];
                arg = j;
            }
        if (witness) *witness = arg;
        return best - bound;
    }

    // Accumulates the gradient of c_target into g (not cleared):
    // g_i -= (1-mu) * w_x * inv(x, a_target(x))^2 for members agreeing with
    // the target's action.
    void add_grad(int target, double scale, const std::vector<std::vector<double>>& inv,
                  std::vector<double>& g) const {
        for (int cx = 0; cx < num_ctx(); ++cx) {
            int a = amap[static_cast<std::size_t>(cx)][static_cast<std::size_t>(target)];
            double r = inv[static_cast<std::size_t>(cx)][static_cast<std::size_t>(a)];
            double v = -scale * one_minus_mu * w[static_cast<std::size_t>(cx)] * r * r;
            for (int i : members_at[static_cast<std::size_t>(cx)][static_cast<std::size_t>(a)])
                g[static_cast<std::size_t>(i)] += v;
        }
    }
};

// In-place Gaussian elimination with partial pivoting on an n x n system.
bool solve_linear(std::vector<double>& A, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(A[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::abs(A[static_cast<std::size_t>(r) * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (!(best > 0.0) || !std::isfinite(best)) return false;
        if (piv != col) {
            for (int k = col; k < n; ++k)
                std::swap(A[static_cast<std::size_t>(piv) * n + k],
                          A[static_cast<std::size_t>(col) * n + k]);
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
        }
        double d = A[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            double factor = A[static_cast<std::size_t>(r) * n + col] / d;
            if (factor == 0.0) continue;
            for (int k = col; k < n; ++k)
                A[static_cast<std::size_t>(r) * n + k] -= factor * A[static_cast<std::size_t>(col) * n + k];
            b[static_cast<std::size_t>(r)] -= factor * b[static_cast<std::size_t>(col)];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[static_cast<std::size_t>(r)];
        for (int k = r + 1; k < n; ++k)
            acc -= A[static_cast<std::size_t>(r) * n + k] * b[static_cast<std::size_t>(k)];
        b[static_cast<std::size_t>(r)] = acc / A[static_cast<std::size_t>(r) * n + r];
        if (!std::isfinite(b[static_cast<std::size_t>(r)])) return false;
    }
    return true;
}

double log_sum_exp_value(const std::vector<double>& c, double bound, double beta,
                         double nu, const std::vector<double>& P) {
    double mx = -kInf;
    for (double v : c) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return kInf;
    double acc = 0.0;
    for (double v : c) acc += std::exp(beta * (v - mx));
    double val = (beta * (mx - bound) + std::log(acc)) / beta;
    if (nu > 0.0) {
        double barrier = 0.0;
        for (double p : P) {
            if (!(p > 0.0)) return kInf;
            barrier += std::log(p);
        }
        val -= nu * barrier;
    }
    return val;
}

}  // namespace

std::vector<double> mixed_action_dist(const std::vector<double>& P,
                                      const RegressorClass& cls,
                                      const std::vector<int>& support, int x,
                                      double mu) {
    if (support.empty()) throw InputError("mixed_action_dist: empty support");
    if (P.size() != support.size())
        throw InputError("mixed_action_dist: P size mismatch");
    const int K = cls.num_actions();
    std::vector<double> out(static_cast<std::size_t>(K), 0.0);
    std::vector<char> active(static_cast<std::size_t>(K), 0);
    int kx = 0;
    for (std::size_t j = 0; j < support.size(); ++j) {
        int a = cls.argmax_policy[static_cast<std::size_t>(support[j])][static_cast<std::size_t>(x)];
        if (!active[static_cast<std::size_t>(a)]) {
            active[static_cast<std::size_t>(a)] = 1;
            ++kx;
        }
        out[static_cast<std::size_t>(a)] += (1.0 - mu) * P[j];
    }
    const double floor_mass = mu / kx;
    for (int a = 0; a < K; ++a)
        if (active[static_cast<std::size_t>(a)]) out[static_cast<std::size_t>(a)] += floor_mass;
    return out;
}

double constraint_bound(const RegressorClass& cls, const std::vector<int>& support,
                        const std::vector<double>& context_weights) {
    if (support.empty()) throw InputError("constraint_bound: empty support");
    double total = 0.0;
    for (int x = 0; x < static_cast<int>(context_weights.size()); ++x) {
        double wx = context_weights[static_cast<std::size_t>(x)];
        if (!(wx > 0.0)) continue;
        total += wx * static_cast<double>(active_actions(cls, support, x).size());
    }
    return total;
}

ViolationReport max_violation(const std::vector<double>& P, const RegressorClass& cls,
                              const std::vector<int>& support,
                              const std::vector<double>& context_weights, double mu) {
    if (support.empty()) throw InputError("max_violation: empty support");
    if (P.size() != support.size()) throw InputError("max_violation: P size mismatch");
    const double bound = constraint_bound(cls, support, context_weights);
    ViolationReport rep;
    rep.violation = -kInf;
    for (std::size_t j = 0; j < support.size(); ++j) {
        double expect = 0.0;
        for (int x = 0; x < static_cast<int>(context_weights.size()); ++x) {
            double wx = context_weights[static_cast<std::size_t>(x)];
            if (!(wx > 0.0)) continue;
            auto dist = mixed_action_dist(P, cls, support, x, mu);
            int a = cls.argmax_policy[static_cast<std::size_t>(support[j])][static_cast<std::size_t>(x)];
            double prop = dist[static_cast<std::size_t>(a)];
            if (!(prop > 0.0))
                throw InternalError("max_violation: zero propensity for a surviving "
                                    "policy's action under positive context weight");
            expect += wx / prop;
        }
        if (expect - bound > rep.violation) {
            rep.violation = expect - bound;
            rep.witness = support[j];
        }
    }
    return rep;
}

ViolationReport max_violation(const ExplorationDist& dist, const RegressorClass& cls,
                              const std::vector<double>& context_weights) {
    return max_violation(dist.probs, cls, dist.support, context_weights, dist.mu);
}

std::pair<ExplorationDist, SolveReport> solve_exploration_dist(
    const RegressorClass& cls, const std::vector<int>& support,
    const std::vector<double>& context_weights, double mu, const SolverOptions& opts,
    const std::optional<std::vector<double>>& warm_start) {
    if (support.empty()) throw InputError("solve_exploration_dist: empty support");
    for (std::size_t j = 0; j < support.size(); ++j) {
        if (support[j] < 0 || support[j] >= cls.size())
            throw InputError("solve_exploration_dist: support index out of range");
        if (j > 0 && support[j] <= support[j - 1])
            throw InputError("solve_exploration_dist: support must be strictly ascending");
    }
    if (!(mu >= 0.0 && mu <= 0.5))
        throw InputError("solve_exploration_dist: mu must lie in [0, 1/2]");
    if (!(opts.tol_rel > 0.0)) throw InputError("solve_exploration_dist: tol must be > 0");
    if (cls.num_contexts() != static_cast<int>(context_weights.size()))
        throw InputError("solve_exploration_dist: weight vector length mismatch");

    const int m = static_cast<int>(support.size());
    const Layout lay(cls, support, context_weights, mu);
    const double tol = opts.tol_rel * lay.bound;
    long long max_iters = opts.max_iters;
    if (max_iters <= 0)
        max_iters = static_cast<long long>(50.0 * m * std::log(static_cast<double>(m) + 1.0));
    max_iters = std::max<long long>(max_iters, 1);

    std::vector<double> P;
    if (warm_start) {
        if (warm_start->size() != static_cast<std::size_t>(m))
            throw InputError("solve_exploration_dist: warm start size mismatch");
        P = *warm_start;
        double total = 0.0;
        for (double v : P) {
            if (!(v >= 0.0)) throw InputError("solve_exploration_dist: negative warm start");
            total += v;
        }
        if (!(total > 0.0)) throw InputError("solve_exploration_dist: zero warm start");
        for (double& v : P) v /= total;
    } else {
        P.assign(static_cast<std::size_t>(m), 1.0 / m);
    }

    std::vector<double> c(static_cast<std::size_t>(m));
    std::vector<std::vector<double>> inv(static_cast<std::size_t>(lay.num_ctx()));
    SolveReport rep;
    rep.bound = lay.bound;

    int witness = 0;
    double viol = lay.eval(P, c, inv, &witness);
    std::vector<double> best_P = P;
    double best_v = viol;
    rep.trace.push_back(best_v);

    auto finish = [&](bool ok) {
        rep.final_violation = best_v;
        rep.converged = ok;
        if (rep.trace.empty() || rep.trace.back() != best_v) rep.trace.push_back(best_v);
        double total = 0.0;
        for (double v : best_P) total += v;
        for (double& v : best_P) v /= total;
        ExplorationDist dist;
        dist.support = support;
        dist.probs = best_P;
        dist.mu = mu;
        dist.cached_action_dists.reserve(static_cast<std::size_t>(cls.num_contexts()));
        for (int x = 0; x < cls.num_contexts(); ++x)
            dist.cached_action_dists.push_back(mixed_action_dist(best_P, cls, support, x, mu));
        return std::make_pair(std::move(dist), rep);
    };

    auto tick = [&]() {
        ++rep.iterations;
        if (rep.iterations % 10 == 0) rep.trace.push_back(best_v);
    };

    if (best_v <= tol || m == 1) {
        if (best_v > tol)
            throw InternalError("solve_exploration_dist: singleton support above tolerance");
        return finish(true);
    }

    // Phase A: multiplicative updates against the violation witness with a
    // Polyak-style step (the target value equals the bound, which is always
    // attainable). Stops early on stalled progress.
    {
        std::vector<double> g(static_cast<std::size_t>(m));
        double window = best_v;
        for (int k = 1; k <= 40 && rep.iterations < max_iters; ++k) {
            tick();
            std::fill(g.begin(), g.end(), 0.0);
            lay.add_grad(witness, 1.0, inv, g);
            double gmax = 0.0;
            for (double v : g) gmax = std::max(gmax, std::abs(v));
            if (!(gmax > 0.0)) break;
            double eta = viol / (gmax * gmax);
            double total = 0.0;
            for (int i = 0; i < m; ++i) {
                double z = std::clamp(-eta * g[static_cast<std::size_t>(i)], -40.0, 40.0);
                P[static_cast<std::size_t>(i)] *= std::exp(z);
                total += P[static_cast<std::size_t>(i)];
            }
            for (double& v : P) v /= total;
            viol = lay.eval(P, c, inv, &witness);
            if (viol < best_v) {
                best_v = viol;
                best_P = P;
                if (best_v <= tol) return finish(true);
            }
            if (k % 10 == 0) {
                if (best_v > 0.8 * window) break;
                window = best_v;
            }
        }
    }

    if (m > opts.newton_size_limit)
        throw SolveFailure("solve_exploration_dist: above tolerance and support too "
                           "large for the Newton phase",
                           rep);

    // Phase B: damped Newton on the log-sum-exp smoothing
    //   G(P) = (1/beta) ln sum_f exp(beta (c_f(P) - bound)) - nu sum_i ln P_i
    // over the simplex (equality handled by a bordered KKT system), with the
    // smoothing sharpened until its error ln(m)/beta is below tolerance.
    const double log_m = std::log(static_cast<double>(std::max(m, 2)));
    const double beta_cap = 16.0 * log_m / tol;
    double beta = std::min(beta_cap, std::max(16.0, log_m / std::max(best_v, tol)));
    const double nu = 0.01 * tol / m;

    P = best_P;
    for (double& v : P) v = std::max(v, 1e-12);
    {
        double total = 0.0;
        for (double v : P) total += v;
        for (double& v : P) v /= total;
    }

    std::vector<double> lam(static_cast<std::size_t>(m));
    std::vector<double> gbar(static_cast<std::size_t>(m));
    std::vector<double> grad(static_cast<std::size_t>(m));
    std::vector<double> H(static_cast<std::size_t>(m) * m);
    std::vector<double> grow(static_cast<std::size_t>(m));
    std::vector<double> kkt(static_cast<std::size_t>(m + 1) * (m + 1));
    std::vector<double> rhs(static_cast<std::size_t>(m + 1));
    std::vector<double> cand(static_cast<std::size_t>(m));
    std::vector<double> c_cand(static_cast<std::size_t>(m));

    while (rep.iterations < max_iters) {
        int fail_streak = 0;
        double ridge = 1e-10;
        bool escalate = false;
        while (rep.iterations < max_iters && !escalate) {
            tick();
            viol = lay.eval(P, c, inv, &witness);
            if (viol < best_v) {
                best_v = viol;
                best_P = P;
                if (best_v <= tol) return finish(true);
            }

            // Softmax weights over constraints at sharpness beta.
            double cmax = -kInf;
            for (double v : c) cmax = std::max(cmax, v);
            double lam_total = 0.0;
            for (int j = 0; j < m; ++j) {
                lam[static_cast<std::size_t>(j)] =
                    std::exp(std::max(beta * (c[static_cast<std::size_t>(j)] - cmax), -745.0));
                lam_total += lam[static_cast<std::size_t>(j)];
            }
            for (double& v : lam) v /= lam_total;
            const double lam_cut = 1e-16 / m;

            std::fill(gbar.begin(), gbar.end(), 0.0);
            for (int j = 0; j < m; ++j)
                if (lam[static_cast<std::size_t>(j)] > lam_cut)
                    lay.add_grad(j, lam[static_cast<std::size_t>(j)], inv, gbar);
            for (int i = 0; i < m; ++i)
                grad[static_cast<std::size_t>(i)] =
                    gbar[static_cast<std::size_t>(i)] - nu / P[static_cast<std::size_t>(i)];

            // Hessian: curvature of the constraints plus the softmax
            // covariance term and the barrier diagonal.
            std::fill(H.begin(), H.end(), 0.0);
            for (int cx = 0; cx < lay.num_ctx(); ++cx) {
                const auto& mem = lay.members_at[static_cast<std::size_t>(cx)];
                const auto& am = lay.amap[static_cast<std::size_t>(cx)];
                const auto& row = inv[static_cast<std::size_t>(cx)];
                std::vector<double> lam_a(mem.size(), 0.0);
                for (int j = 0; j < m; ++j)
                    lam_a[static_cast<std::size_t>(am[static_cast<std::size_t>(j)])] +=
                        lam[static_cast<std::size_t>(j)];
                const double base =
                    2.0 * lay.one_minus_mu * lay.one_minus_mu * lay.w[static_cast<std::size_t>(cx)];
                for (std::size_t a = 0; a < mem.size(); ++a) {
                    if (!(lam_a[a] > 0.0)) continue;
                    double r = row[a];
                    double scale = base * lam_a[a] * r * r * r;
                    for (int i1 : mem[a])
                        for (int i2 : mem[a])
                            H[static_cast<std::size_t>(i1) * m + i2] += scale;
                }
            }
            for (int j = 0; j < m; ++j) {
                if (lam[static_cast<std::size_t>(j)] <= lam_cut) continue;
                std::fill(grow.begin(), grow.end(), 0.0);
                lay.add_grad(j, 1.0, inv, grow);
                const double lj = beta * lam[static_cast<std::size_t>(j)];
                for (int i1 = 0; i1 < m; ++i1) {
                    double v1 = grow[static_cast<std::size_t>(i1)];
                    if (v1 == 0.0) continue;
                    double scale = lj * v1;
                    for (int i2 = 0; i2 < m; ++i2)
                        H[static_cast<std::size_t>(i1) * m + i2] +=
                            scale * grow[static_cast<std::size_t>(i2)];
                }
            }
            for (int i1 = 0; i1 < m; ++i1) {
                double v1 = beta * gbar[static_cast<std::size_t>(i1)];
                for (int i2 = 0; i2 < m; ++i2)
                    H[static_cast<std::size_t>(i1) * m + i2] -=
                        v1 * gbar[static_cast<std::size_t>(i2)];
            }
            for (int i = 0; i < m; ++i)
                H[static_cast<std::size_t>(i) * m + i] +=
                    nu / (P[static_cast<std::size_t>(i)] * P[static_cast<std::size_t>(i)]);

            double hscale = 1e-30;
            for (int i = 0; i < m; ++i)
                hscale = std::max(hscale, std::abs(H[static_cast<std::size_t>(i) * m + i]));

            const double f0 = log_sum_exp_value(c, lay.bound, beta, nu, P);
            bool accepted = false;
            while (ridge < 1e8) {
                const int n = m + 1;
                for (int r = 0; r < m; ++r) {
                    for (int k2 = 0; k2 < m; ++k2)
                        kkt[static_cast<std::size_t>(r) * n + k2] =
                            H[static_cast<std::size_t>(r) * m + k2];
                    kkt[static_cast<std::size_t>(r) * n + r] += ridge * hscale;
                    kkt[static_cast<std::size_t>(r) * n + m] = 1.0;
                    rhs[static_cast<std::size_t>(r)] = -grad[static_cast<std::size_t>(r)];
                }
                for (int k2 = 0; k2 < m; ++k2)
                    kkt[static_cast<std::size_t>(m) * n + k2] = 1.0;
                kkt[static_cast<std::size_t>(m) * n + m] = 0.0;
                rhs[static_cast<std::size_t>(m)] = 0.0;
                if (!solve_linear(kkt, rhs, n)) {
                    ridge *= 100.0;
                    continue;
                }
                double amax = 1.0;
                for (int i = 0; i < m; ++i) {
                    double d = rhs[static_cast<std::size_t>(i)];
                    if (d < 0.0)
                        amax = std::min(amax, 0.995 * P[static_cast<std::size_t>(i)] / (-d));
                }
                double alpha = amax;
                bool ls_ok = false;
                for (int half = 0; half < 30 && alpha > 0.0; ++half) {
                    bool positive = true;
                    for (int i = 0; i < m; ++i) {
                        cand[static_cast<std::size_t>(i)] =
                            P[static_cast<std::size_t>(i)] + alpha * rhs[static_cast<std::size_t>(i)];
                        if (!(cand[static_cast<std::size_t>(i)] > 0.0)) positive = false;
                    }
                    if (positive) {
                        double vn = lay.eval(cand, c_cand, inv, nullptr);
                        if (vn < best_v) {
                            best_v = vn;
                            best_P = cand;
                            if (best_v <= tol) return finish(true);
                        }
                        double fn = log_sum_exp_value(c_cand, lay.bound, beta, nu, cand);
                        if (fn < f0) {
                            P = cand;
                            ridge = std::max(ridge / 10.0, 1e-12);
                            accepted = true;
                            ls_ok = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                if (ls_ok) break;
                ridge *= 100.0;
            }

            if (accepted) {
                fail_streak = 0;
            } else {
                ++fail_streak;
                if (fail_streak >= 2) escalate = true;
            }
            if (beta < beta_cap && viol > 0.0 && log_m / beta > 0.25 * std::max(viol, tol))
                escalate = true;
        }
        if (beta >= beta_cap) break;
        beta = std::min(beta * 16.0, beta_cap);
        double total = 0.0;
        for (double& v : P) {
            v = std::max(v, 1e-14);
            total += v;
        }
        for (double& v : P) v /= total;
    }

    rep.final_violation = best_v;
    rep.converged = false;
    rep.trace.push_back(best_v);
    throw SolveFailure("solve_exploration_dist: iteration budget exhausted with relative "
                       "violation " +
                           std::to_string(best_v / lay.bound),
                       rep);
}

}  // namespace relim
