#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapeopt/config.hpp"
#include "shapeopt/errors.hpp"
#include "shapeopt/experiment.hpp"
#include "shapeopt/export.hpp"

namespace {

namespace fs = std::filesystem;
using namespace shapeopt;

enum ExitCode { ok = 0, other = 1, bad_config = 2, integrity = 3, evaluation_failure = 4, missing = 5 };

struct CommonArgs {
    std::string config;
    std::string dir;
    std::vector<std::string> overrides;
};

ExperimentConfig load(const CommonArgs& a)
{
    std::string path = a.config;
    if (path.empty()) {
        path = (fs::path(a.dir) / "config.json").string();
        if (!fs::exists(path))
            throw config_error("no --config given and '" + path + "' does not exist");
    }
    return load_config(path, a.overrides);
}

void add_common(CLI::App* cmd, CommonArgs& a, bool config_required)
{
    auto* c = cmd->add_option("-c,--config", a.config, "experiment config (JSON)");
    if (config_required)
        c->required();
    cmd->add_option("-d,--dir", a.dir, "experiment directory")->required();
    cmd->add_option("--set", a.overrides, "override a config value, e.g. optimizer.total_budget=20");
}

void print_run(std::size_t run, const RunResult& r)
{
    std::cout << "seed " << run << ": " << r.evaluations << " evaluations (" << r.replayed << " replayed), "
              << r.steps << " steps, " << (r.complete ? "complete" : "incomplete");
    if (r.incumbent)
        std::cout << ", incumbent fitness " << r.incumbent->fitness;
    else
        std::cout << ", no incumbent";
    std::cout << '\n';
}

void print_aggregate(const char* title, const ExperimentAggregate& a)
{
    std::printf("  %-22s median %10.3f   median CV %7.2f%%\n", title, a.median_performance, a.median_cv);
}

int run_cli(int argc, char** argv)
{
    CLI::App app{"Joint hyperparameter and reward-shaping optimization for a toy lander"};
    app.require_subcommand(1);

    CommonArgs opt_args;
    std::optional<std::size_t> opt_seed;
    auto* optimize = app.add_subcommand("optimize", "run DEHB for every optimization seed (or one with --seed)");
    add_common(optimize, opt_args, true);
    optimize->add_option("--seed", opt_seed, "only this optimization seed index");

    CommonArgs res_args;
    std::optional<std::size_t> res_seed;
    auto* resume_cmd = app.add_subcommand("resume", "continue interrupted optimization runs from their journals");
    add_common(resume_cmd, res_args, false);
    resume_cmd->add_option("--seed", res_seed, "only this optimization seed index");

    CommonArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "retrain every incumbent on fresh evaluation seeds");
    add_common(evaluate, eval_args, false);

    CommonArgs sweep_args;
    std::string param_a, param_b;
    std::size_t resolution = 10, sweep_seeds = 3;
    auto* sweep_cmd = app.add_subcommand("sweep", "two-parameter landscape with other parameters at baseline");
    add_common(sweep_cmd, sweep_args, false);
    sweep_cmd->add_option("-a,--param-a", param_a, "first parameter")->required();
    sweep_cmd->add_option("-b,--param-b", param_b, "second parameter")->required();
    sweep_cmd->add_option("-r,--resolution", resolution, "grid points per axis")->capture_default_str();
    sweep_cmd->add_option("-s,--seeds", sweep_seeds, "trainings per cell")->capture_default_str();

    std::string export_dir;
    std::string what = "all";
    auto* export_cmd = app.add_subcommand("export", "write CSV exports under <dir>/exports");
    export_cmd->add_option("-d,--dir", export_dir, "experiment directory")->required();
    export_cmd->add_option("-w,--what", what, "incumbent-curve, landscape, report or all")
        ->check(CLI::IsMember({"incumbent-curve", "landscape", "report", "all"}))
        ->capture_default_str();

    std::vector<std::string> report_dirs;
    std::size_t resamples = 10000;
    auto* report_cmd = app.add_subcommand("report", "print aggregates; compare arms against the first directory");
    report_cmd->add_option("dirs", report_dirs, "evaluated experiment directories")->required();
    report_cmd->add_option("--resamples", resamples, "bootstrap resamples")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : other;
    }

    try {
        if (*optimize) {
            const auto cfg = load(opt_args);
            save_config(cfg, opt_args.dir);
            for (std::size_t run = 0; run < cfg.protocol.optimization_seeds; ++run) {
                if (opt_seed && *opt_seed != run)
                    continue;
                print_run(run, run_optimization(cfg, run, run_directory(opt_args.dir, run)));
            }
        } else if (*resume_cmd) {
            const auto cfg = load(res_args);
            for (std::size_t run = 0; run < cfg.protocol.optimization_seeds; ++run) {
                if (res_seed && *res_seed != run)
                    continue;
                RunOptions o;
                o.resume = true;
                print_run(run, run_optimization(cfg, run, run_directory(res_args.dir, run), o));
            }
        } else if (*evaluate) {
            const auto cfg = load(eval_args);
            const auto report = evaluate_incumbents(cfg, eval_args.dir);
            std::size_t n = 0;
            for (const auto& inc : report.incumbents)
                n += inc.evaluations.size();
            std::cout << report.arm << ": " << n << " evaluation trainings\n";
            print_aggregate("task score", report.task);
            if (report.shaped)
                print_aggregate("default shaped return", *report.shaped);
        } else if (*sweep_cmd) {
            const auto cfg = load(sweep_args);
            const auto grid = run_sweep(cfg, param_a, param_b, resolution, sweep_seeds, sweep_args.dir);
            std::cout << "swept " << grid.cells.size() << " cells x " << sweep_seeds << " seeds\n";
        } else if (*export_cmd) {
            std::vector<fs::path> written;
            if (what == "incumbent-curve" || what == "all") {
                const auto cfg = load_config((fs::path(export_dir) / "config.json").string());
                written.push_back(export_incumbent_curve(cfg, export_dir));
            }
            if (what == "report" || what == "all") {
                const auto r = export_report(export_dir);
                written.insert(written.end(), r.begin(), r.end());
            }
            if (what == "landscape" || (what == "all" && fs::exists(fs::path(export_dir) / "landscape"))) {
                const auto l = export_landscapes(export_dir);
                written.insert(written.end(), l.begin(), l.end());
            }
            for (const auto& p : written)
                std::cout << p.string() << '\n';
        } else if (*report_cmd) {
            std::vector<ExperimentReport> reports;
            for (const auto& d : report_dirs)
                reports.push_back(load_report(d));
            for (std::size_t i = 0; i < reports.size(); ++i) {
                std::cout << report_dirs[i] << " (" << reports[i].arm << ")\n";
                print_aggregate("task score", reports[i].task);
                if (reports[i].shaped)
                    print_aggregate("default shaped return", *reports[i].shaped);
                if (i > 0) {
                    const auto a = reports[i].pooled_task_scores();
                    const auto b = reports[0].pooled_task_scores();
                    if (a.size() < bootstrap_min_samples || b.size() < bootstrap_min_samples) {
                        std::printf("  vs %s: too few evaluations for a bootstrap comparison\n",
                                    report_dirs[0].c_str());
                        continue;
                    }
                    const auto cmp = bootstrap_compare(a, b, resamples, 0);
                    std::printf("  vs %s: median difference %.3f, bootstrap p = %.4f\n", report_dirs[0].c_str(),
                                cmp.median_difference, cmp.p_value);
                }
            }
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return bad_config;
    } catch (const integrity_error& e) {
        std::cerr << "integrity error: " << e.what() << '\n';
        return integrity;
    } catch (const evaluation_error& e) {
        std::cerr << "evaluation error: " << e.what() << '\n';
        return evaluation_failure;
    } catch (const missing_data& e) {
        std::cerr << "missing data: " << e.what() << '\n';
        return missing;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return other;
    }
    return ok;
}

} // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
