#include "relim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "relim/errors.hpp"
#include "relim/textio.hpp"

namespace relim {

const char* const kCsvHeader =
    "seed,t,context,action,propensity,reward,instant_regret,cum_regret,"
    "n_active,solver_iters,solver_violation";

namespace {

bool parse_bool(std::string_view v, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw InputError("config key '" + key + "' expects true or false, got '" +
                     std::string(v) + "'");
}

std::uint64_t parse_seed(std::string_view v, const std::string& key) {
    const long long n = parse_int(v);
    if (n < 0) throw InputError("config key '" + key + "' must be >= 0");
    return static_cast<std::uint64_t>(n);
}

Algo parse_algo(std::string_view v) {
    if (v == "relim") return Algo::relim;
    if (v == "uniform") return Algo::uniform;
    if (v == "epsilon_greedy") return Algo::epsilon_greedy;
    if (v == "follow_the_leader") return Algo::follow_the_leader;
    throw InputError("unknown algo '" + std::string(v) + "'");
}

std::string algo_name(Algo a) {
    switch (a) {
        case Algo::relim: return "relim";
        case Algo::uniform: return "uniform";
        case Algo::epsilon_greedy: return "epsilon_greedy";
        case Algo::follow_the_leader: return "follow_the_leader";
    }
    return "?";
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::string section;
    int line_no = 0;
    for (std::string_view raw : split(text, '\n')) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw InputError("config line " + std::to_string(line_no) +
                                 ": malformed section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section != "instance" && section != "learner" && section != "solver" &&
                section != "run" && section != "diag") {
                throw InputError("unknown config section [" + section + "]");
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InputError("config line " + std::to_string(line_no) +
                             ": expected key = value");
        }
        if (section.empty()) {
            throw InputError("config line " + std::to_string(line_no) +
                             ": key outside any section");
        }
        const std::string key{trim(line.substr(0, eq))};
        const std::string_view value = trim(line.substr(eq + 1));

        if (section == "instance") {
            if (key == "kind") {
                cfg.instance.kind = std::string(value);
                if (value != "random_tabular" && value != "lower_bound" &&
                    value != "nontrivial" && value != "file") {
                    throw InputError("unknown instance kind '" + cfg.instance.kind + "'");
                }
            } else if (key == "seed") {
                cfg.instance.seed = parse_seed(value, key);
            } else if (key == "num_contexts") {
                cfg.instance.num_contexts = static_cast<int>(parse_int(value));
            } else if (key == "K") {
                cfg.instance.K = static_cast<int>(parse_int(value));
            } else if (key == "N") {
                cfg.instance.N = static_cast<int>(parse_int(value));
            } else if (key == "epsilon_scale") {
                cfg.instance.epsilon_scale = parse_double(value);
            } else if (key == "path") {
                cfg.instance.path = std::string(value);
            } else {
                throw InputError("unknown key '" + key + "' in [instance]");
            }
        } else if (section == "learner") {
            if (key == "algo") {
                cfg.algo = parse_algo(value);
            } else if (key == "delta") {
                cfg.delta = parse_double(value);
            } else if (key == "dist_mode") {
                if (value == "known") cfg.dist_mode = DistMode::known;
                else if (value == "empirical") cfg.dist_mode = DistMode::empirical;
                else throw InputError("unknown dist_mode '" + std::string(value) + "'");
            } else if (key == "doubling_cadence") {
                cfg.doubling_cadence = parse_bool(value, key);
            } else if (key == "epsilon_c") {
                cfg.epsilon_c = parse_double(value);
                if (!(cfg.epsilon_c > 0.0)) throw InputError("epsilon_c must be > 0");
            } else {
                throw InputError("unknown key '" + key + "' in [learner]");
            }
        } else if (section == "solver") {
            if (key == "tol_rel") {
                cfg.solver.tol_rel = parse_double(value);
                if (!(cfg.solver.tol_rel > 0.0)) throw InputError("tol_rel must be > 0");
            } else if (key == "max_iters") {
                cfg.solver.max_iters = parse_int(value);
                if (cfg.solver.max_iters < 0) throw InputError("max_iters must be >= 0");
            } else {
                throw InputError("unknown key '" + key + "' in [solver]");
            }
        } else if (section == "run") {
            if (key == "T") {
                cfg.T = parse_int(value);
                if (cfg.T < 1) throw InputError("T must be >= 1");
            } else if (key == "seeds") {
                cfg.num_seeds = static_cast<int>(parse_int(value));
                if (cfg.num_seeds < 1) throw InputError("seeds must be >= 1");
            } else if (key == "master_seed") {
                cfg.master_seed = parse_seed(value, key);
            } else if (key == "out") {
                cfg.out_dir = std::string(value);
            } else {
                throw InputError("unknown key '" + key + "' in [run]");
            }
        } else {  // diag
            if (key == "check") {
                if (value == "excess_loss") cfg.diag.check = DiagKind::excess_loss;
                else if (value == "regret_transfer") cfg.diag.check = DiagKind::regret_transfer;
                else throw InputError("unknown diag check '" + std::string(value) + "'");
            } else if (key == "num_triples") {
                cfg.diag.num_triples = static_cast<int>(parse_int(value));
            } else if (key == "num_samples") {
                cfg.diag.num_samples = parse_int(value);
            } else if (key == "seed") {
                cfg.diag.seed = parse_seed(value, key);
            } else {
                throw InputError("unknown key '" + key + "' in [diag]");
            }
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config(read_text_file(path));
}

Instance materialize_instance(const InstanceSpec& spec, long long T) {
    if (spec.kind == "random_tabular") {
        return gen_random_tabular(spec.seed, spec.num_contexts, spec.K, spec.N);
    }
    if (spec.kind == "lower_bound") {
        return gen_lower_bound(spec.seed, spec.N, spec.K, T, spec.epsilon_scale);
    }
    if (spec.kind == "nontrivial") {
        return gen_nontrivial_random(spec.seed, spec.num_contexts, spec.K, spec.N);
    }
    if (spec.kind == "file") {
        if (spec.path.empty()) throw InputError("instance kind 'file' requires path");
        return load_instance(spec.path);
    }
    throw InputError("unknown instance kind '" + spec.kind + "'");
}

std::vector<long long> regret_checkpoints(long long T) {
    std::vector<long long> cps{T / 8, T / 4, T / 2, T};
    std::vector<long long> out;
    for (long long c : cps) {
        if (c >= 1 && (out.empty() || out.back() != c)) out.push_back(c);
    }
    return out;
}

namespace {

struct SeedRun {
    SeedSummary summary;
    std::string csv;
};

SeedRun run_one_seed(const Instance& inst, const ExperimentConfig& cfg, int seed) {
    SeedRun out;
    SeedSummary& s = out.summary;
    s.seed = seed;
    const std::vector<long long> cps = regret_checkpoints(cfg.T);
    s.cum_at_checkpoints.assign(cps.size(), 0.0);
    s.n_active_final = inst.N();

    std::string& csv = out.csv;
    csv.reserve(static_cast<std::size_t>(std::min<long long>(cfg.T, 1 << 20)) * 64);
    csv += kCsvHeader;
    csv += '\n';

    std::size_t next_cp = 0;
    const std::string seed_prefix = std::to_string(seed) + ',';
    auto sink = [&](const RoundDetail& d) {
        csv += seed_prefix;
        csv += std::to_string(d.log.t);
        csv += ',';
        csv += std::to_string(d.log.context);
        csv += ',';
        csv += std::to_string(d.log.action);
        csv += ',';
        csv += format_double(d.propensity);
        csv += ',';
        csv += format_double(d.log.reward);
        csv += ',';
        csv += format_double(d.log.instant_regret);
        csv += ',';
        csv += format_double(d.cum_regret);
        csv += ',';
        csv += std::to_string(d.n_active);
        csv += ',';
        csv += std::to_string(d.solver_iters);
        csv += ',';
        csv += format_double(d.solver_violation);
        csv += '\n';
        if (next_cp < cps.size() && d.log.t == cps[next_cp]) {
            s.cum_at_checkpoints[next_cp] = d.cum_regret;
            ++next_cp;
        }
        if (d.eliminated > 0) {
            s.last_elim_t = d.log.t;
            s.cum_at_last_elim = d.cum_regret;
        }
        s.final_cum_regret = d.cum_regret;
        s.n_active_final = d.n_active;
    };

    Rng env = Rng::stream(cfg.master_seed, static_cast<std::uint64_t>(seed),
                          stream_tag::environment);
    Rng act = Rng::stream(cfg.master_seed, static_cast<std::uint64_t>(seed),
                          stream_tag::actions);
    try {
        if (cfg.algo == Algo::relim) {
            LearnerConfig lc;
            lc.delta = cfg.delta;
            lc.T = cfg.T;
            lc.dist_mode = cfg.dist_mode;
            lc.solver = cfg.solver;
            lc.doubling_cadence = cfg.doubling_cadence;
            run_episode(inst, lc, env, act, sink);
        } else {
            BaselineConfig bc;
            bc.kind = cfg.algo == Algo::uniform ? BaselineKind::uniform
                      : cfg.algo == Algo::epsilon_greedy
                          ? BaselineKind::epsilon_greedy
                          : BaselineKind::follow_the_leader;
            bc.epsilon_c = cfg.epsilon_c;
            bc.T = cfg.T;
            run_baseline_episode(inst, bc, env, act, sink);
        }
        s.ok = true;
    } catch (const std::exception& e) {
        s.ok = false;
        s.error = e.what();
    }
    return out;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, int jobs) {
    if (config.num_seeds < 1) throw InputError("num_seeds must be >= 1");
    if (jobs < 1) throw InputError("jobs must be >= 1");
    const Instance inst = materialize_instance(config.instance, config.T);

    const bool writing = !config.out_dir.empty();
    if (writing) std::filesystem::create_directories(config.out_dir);

    const int n = config.num_seeds;
    std::vector<SeedRun> runs(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            SeedRun r = run_one_seed(inst, config, i);
            if (writing) {
                const std::string path =
                    config.out_dir + "/seed_" + std::to_string(i) + ".csv";
                try {
                    write_text_file(path, r.csv);
                } catch (const std::exception& e) {
                    r.summary.ok = false;
                    r.summary.error = e.what();
                }
            }
            runs[static_cast<std::size_t>(i)] = std::move(r);
        }
    };

    const int threads = std::min(jobs, n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ExperimentResult result;
    result.checkpoints = regret_checkpoints(config.T);
    result.seeds.reserve(static_cast<std::size_t>(n));
    for (auto& r : runs) result.seeds.push_back(std::move(r.summary));
    for (const auto& s : result.seeds) {
        if (!s.ok) ++result.failures;
    }
    for (std::size_t c = 0; c < result.checkpoints.size(); ++c) {
        std::vector<double> vals;
        vals.reserve(result.seeds.size());
        for (const auto& s : result.seeds) {
            if (s.ok) vals.push_back(s.cum_at_checkpoints[c]);
        }
        double mean = std::numeric_limits<double>::quiet_NaN();
        if (!vals.empty()) {
            double sum = 0.0;
            for (double v : vals) sum += v;
            mean = sum / static_cast<double>(vals.size());
        }
        result.mean_at.push_back(mean);
        result.median_at.push_back(median_of(vals));
    }

    if (writing) {
        write_text_file(config.out_dir + "/summary.txt",
                        format_summary(config, result));
    }
    return result;
}

std::string format_summary(const ExperimentConfig& config, const ExperimentResult& result) {
    std::string out;
    out += "relim-summary v1\n";
    out += "algo " + algo_name(config.algo) + '\n';
    out += "instance " + config.instance.kind + '\n';
    out += "T " + std::to_string(config.T) + '\n';
    out += "num_seeds " + std::to_string(config.num_seeds) + '\n';
    out += "failures " + std::to_string(result.failures) + '\n';
    out += "checkpoints";
    for (long long c : result.checkpoints) out += ' ' + std::to_string(c);
    out += '\n';
    out += "mean_cum_regret";
    for (double v : result.mean_at) out += ' ' + format_double(v);
    out += '\n';
    out += "median_cum_regret";
    for (double v : result.median_at) out += ' ' + format_double(v);
    out += '\n';
    for (const auto& s : result.seeds) {
        out += "seed " + std::to_string(s.seed);
        if (s.ok) {
            out += " ok final " + format_double(s.final_cum_regret);
            out += " last_elim " + std::to_string(s.last_elim_t);
            out += " cum_at_last_elim " + format_double(s.cum_at_last_elim);
            out += " n_active " + std::to_string(s.n_active_final);
        } else {
            out += " error " + s.error;
        }
        out += '\n';
    }
    return out;
}

PlotTable plot_table_from_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw InputError("plot data directory not found: " + dir);
    }
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.starts_with("seed_") && name.ends_with(".csv")) {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());

    std::map<long long, std::vector<double>> by_t;
    for (const auto& path : files) {
        const std::string text = read_text_file(path);
        int t_col = -1, cum_col = -1;
        bool header = true;
        for (std::string_view raw : split(text, '\n')) {
            const std::string_view line = trim(raw);
            if (line.empty()) continue;
            const std::vector<std::string_view> cols = split(line, ',');
            if (header) {
                for (std::size_t i = 0; i < cols.size(); ++i) {
                    if (cols[i] == "t") t_col = static_cast<int>(i);
                    if (cols[i] == "cum_regret") cum_col = static_cast<int>(i);
                }
                if (t_col < 0 || cum_col < 0) {
                    throw InputError("csv missing t/cum_regret columns: " + path);
                }
                header = false;
                continue;
            }
            if (static_cast<int>(cols.size()) <= std::max(t_col, cum_col)) {
                throw InputError("short csv row in " + path);
            }
            by_t[parse_int(cols[static_cast<std::size_t>(t_col)])].push_back(
                parse_double(cols[static_cast<std::size_t>(cum_col)]));
        }
    }
    if (by_t.empty()) {
        throw InputError("no per-round rows found under " + dir);
    }

    PlotTable table;
    for (auto& [t, vals] : by_t) {
        std::sort(vals.begin(), vals.end());
        const std::size_t n = vals.size();
        double sum = 0.0;
        for (double v : vals) sum += v;
        auto rank = [n](double q) {
            const auto r = static_cast<std::size_t>(
                std::ceil(q * static_cast<double>(n)));
            return r == 0 ? std::size_t{0} : r - 1;
        };
        table.t.push_back(t);
        table.mean.push_back(sum / static_cast<double>(n));
        table.p10.push_back(vals[rank(0.10)]);
        table.p90.push_back(vals[rank(0.90)]);
    }
    return table;
}

std::string format_plot_table(const PlotTable& table) {
    std::string out = "t mean p10 p90\n";
    for (std::size_t i = 0; i < table.t.size(); ++i) {
        out += std::to_string(table.t[i]);
        out += ' ';
        out += format_double(table.mean[i]);
        out += ' ';
        out += format_double(table.p10[i]);
        out += ' ';
        out += format_double(table.p90[i]);
        out += '\n';
    }
    return out;
}

}  // namespace relim
