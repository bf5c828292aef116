#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "relim/errors.hpp"
#include "relim/harness.hpp"
#include "relim/textio.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out;
    int seeds = -1;
    int jobs = 1;
};

int cmd_gen(const CommonOpts& opts) {
    const relim::ExperimentConfig cfg = relim::load_config(opts.config_path);
    const relim::Instance inst = relim::materialize_instance(cfg.instance, cfg.T);
    const std::string text = relim::serialize_instance(inst);
    if (opts.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        relim::write_text_file(opts.out, text);
        std::printf("wrote %s (contexts=%d K=%d N=%d)\n", opts.out.c_str(),
                    inst.num_contexts(), inst.K(), inst.N());
    }
    return 0;
}

int cmd_run(const CommonOpts& opts) {
    relim::ExperimentConfig cfg = relim::load_config(opts.config_path);
    if (!opts.out.empty()) cfg.out_dir = opts.out;
    if (opts.seeds > 0) cfg.num_seeds = opts.seeds;
    const relim::ExperimentResult result = relim::run_experiment(cfg, opts.jobs);
    std::fputs(relim::format_summary(cfg, result).c_str(), stdout);
    return 0;
}

int cmd_diag(const CommonOpts& opts) {
    const relim::ExperimentConfig cfg = relim::load_config(opts.config_path);
    const relim::DiagSpec& d = cfg.diag;
    const relim::DiagSuiteResult suite =
        relim::run_diag_suite(d.check, d.num_triples, d.num_samples, d.seed);
    std::string out;
    out += d.check == relim::DiagKind::excess_loss
               ? "check excess_loss\n"
               : "check regret_transfer\n";
    for (std::size_t i = 0; i < suite.reports.size(); ++i) {
        const relim::DiagReport& r = suite.reports[i];
        out += "triple " + std::to_string(i);
        out += " mean_Y " + relim::format_double(r.mean_Y);
        out += " se_Y " + relim::format_double(r.se_Y);
        if (d.check == relim::DiagKind::excess_loss) {
            out += " mean_sq_gap " + relim::format_double(r.mean_sq_gap);
            out += " var_Y " + relim::format_double(r.var_Y);
            out += r.identity_flag ? " identity FLAG" : " identity ok";
            out += r.variance_flag ? " variance FLAG" : " variance ok";
        } else {
            out += " regret_sq " + relim::format_double(r.regret_sq);
            out += " transfer_rhs " + relim::format_double(r.transfer_rhs);
            out += r.transfer_flag ? " transfer FLAG" : " transfer ok";
        }
        out += '\n';
    }
    out += "flags identity " + std::to_string(suite.identity_flags);
    out += " variance " + std::to_string(suite.variance_flags);
    out += " transfer " + std::to_string(suite.transfer_flags);
    out += '\n';
    if (opts.out.empty()) {
        std::fputs(out.c_str(), stdout);
    } else {
        relim::write_text_file(opts.out, out);
    }
    return 0;
}

int cmd_plot_data(const CommonOpts& opts) {
    const relim::ExperimentConfig cfg = relim::load_config(opts.config_path);
    if (cfg.out_dir.empty()) {
        throw relim::InputError("plot-data needs [run] out in the config");
    }
    const relim::PlotTable table = relim::plot_table_from_dir(cfg.out_dir);
    const std::string text = relim::format_plot_table(table);
    if (opts.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        relim::write_text_file(opts.out, text);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regressor-elimination contextual bandit simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto add_common = [&](CLI::App* sub, bool with_run_flags) {
        sub->add_option("--config", opts.config_path, "configuration file")
            ->required();
        sub->add_option("--out", opts.out, "output path override");
        if (with_run_flags) {
            sub->add_option("--seeds", opts.seeds, "override number of seeds");
            sub->add_option("--jobs", opts.jobs, "worker threads")
                ->check(CLI::PositiveNumber);
        }
    };

    CLI::App* gen = app.add_subcommand("gen", "generate an instance file");
    add_common(gen, false);
    CLI::App* run = app.add_subcommand("run", "run a learning experiment");
    add_common(run, true);
    CLI::App* diag = app.add_subcommand("diag", "Monte Carlo moment/transfer checks");
    add_common(diag, false);
    CLI::App* plot = app.add_subcommand("plot-data", "aggregate per-seed csvs");
    add_common(plot, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen(opts);
        if (run->parsed()) return cmd_run(opts);
        if (diag->parsed()) return cmd_diag(opts);
        if (plot->parsed()) return cmd_plot_data(opts);
        return 1;
    } catch (const relim::InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
}
