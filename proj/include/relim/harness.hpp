#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relim/baselines.hpp"
#include "relim/diagnostics.hpp"
#include "relim/instance.hpp"
#include "relim/learner.hpp"

namespace relim {

enum class Algo { relim, uniform, epsilon_greedy, follow_the_leader };

// [instance] section: which environment to build.
struct InstanceSpec {
    std::string kind = "random_tabular";  // random_tabular|lower_bound|nontrivial|file
    std::uint64_t seed = 1;
    int num_contexts = 10;
    int K = 4;
    int N = 20;
    double epsilon_scale = 0.25;  // lower_bound only; epsilon uses the run's T
    std::string path;             // file only
};

// [diag] section.
struct DiagSpec {
    DiagKind check = DiagKind::excess_loss;
    int num_triples = 100;
    long long num_samples = 100000;
    std::uint64_t seed = 1;
};

struct ExperimentConfig {
    InstanceSpec instance;
    Algo algo = Algo::relim;
    double delta = 0.1;
    DistMode dist_mode = DistMode::known;
    bool doubling_cadence = false;
    double epsilon_c = 1.0;
    long long T = 1000;
    int num_seeds = 1;
    std::uint64_t master_seed = 1;
    std::string out_dir;
    SolverOptions solver;
    DiagSpec diag;
};

// Sectioned key = value text. Unknown sections or keys are hard errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

Instance materialize_instance(const InstanceSpec& spec, long long T);

struct SeedSummary {
    int seed = 0;
    bool ok = false;
    std::string error;
    double final_cum_regret = 0.0;
    std::vector<double> cum_at_checkpoints;
    long long last_elim_t = 0;      // 0 when nothing was ever eliminated
    double cum_at_last_elim = 0.0;  // cumulative regret at that round
    int n_active_final = 0;
};

struct ExperimentResult {
    std::vector<long long> checkpoints;  // T/8, T/4, T/2, T (deduped, no 0)
    std::vector<SeedSummary> seeds;
    std::vector<double> mean_at;    // over seeds that completed
    std::vector<double> median_at;
    int failures = 0;
};

extern const char* const kCsvHeader;

// Runs num_seeds independent episodes of the configured learner on one shared
// instance. Seed i uses streams derived from (master_seed, i), so results do
// not depend on jobs. When out_dir is non-empty, writes seed_<i>.csv per seed
// plus summary.txt; a seed that throws is recorded in the summary and the
// remaining seeds still run.
ExperimentResult run_experiment(const ExperimentConfig& config, int jobs = 1);

std::string format_summary(const ExperimentConfig& config, const ExperimentResult& result);

std::vector<long long> regret_checkpoints(long long T);

struct PlotTable {
    std::vector<long long> t;
    std::vector<double> mean;
    std::vector<double> p10;
    std::vector<double> p90;
};

// Aggregates cum_regret across every seed_*.csv in dir. Throws InputError if
// the directory holds no rows. Percentiles are nearest-rank.
PlotTable plot_table_from_dir(const std::string& dir);
std::string format_plot_table(const PlotTable& table);

}  // namespace relim
