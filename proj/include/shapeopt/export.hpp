#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "experiment.hpp"
#include "journal.hpp"
#include "landscape.hpp"
#include "metrics.hpp"

namespace shapeopt {

/// Incumbent trajectory recomputed from journal records: a point whenever a
/// full-budget fitness beats the best so far, plus a closing point.
inline std::vector<TrajectoryPoint> trajectory_from_records(const std::vector<EvalRecord>& records, Budget max_budget)
{
    std::vector<TrajectoryPoint> out;
    Budget steps = 0;
    double best = failed_fitness;
    std::uint64_t n = 0;
    for (const auto& r : records) {
        ++n;
        steps += r.budget;
        if (r.budget == max_budget && r.status == EvalStatus::ok && r.fitness > best) {
            best = r.fitness;
            out.push_back({n, steps, best});
        }
    }
    if (!out.empty() && n > out.back().evaluation)
        out.push_back({n, steps, best});
    return out;
}

inline std::vector<EvalRecord> load_records(const fs::path& journal)
{
    if (!fs::exists(journal))
        throw missing_data("journal '" + journal.string() + "' does not exist");
    const auto contents = read_journal(journal);
    std::vector<EvalRecord> out;
    for (std::size_t i = 0; i < contents.entries.size(); ++i)
        out.push_back(EvalRecord::from_json(contents.entries[i], contents.lines[i]));
    return out;
}

struct CurvePoint {
    Budget steps = 0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Median, min and max across runs at every step coordinate where any run
/// changed; each run holds its last value until its next point.
inline std::vector<CurvePoint> incumbent_curve(const std::vector<std::vector<TrajectoryPoint>>& runs)
{
    std::vector<Budget> coords;
    for (const auto& r : runs)
        for (const auto& p : r)
            coords.push_back(p.cumulative_steps);
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    std::vector<CurvePoint> out;
    for (const auto c : coords) {
        std::vector<double> vals;
        for (const auto& r : runs) {
            const TrajectoryPoint* last = nullptr;
            for (const auto& p : r)
                if (p.cumulative_steps <= c)
                    last = &p;
            if (last)
                vals.push_back(last->fitness);
        }
        if (vals.empty())
            continue;
        out.push_back({c, median_of(vals), *std::min_element(vals.begin(), vals.end()),
                       *std::max_element(vals.begin(), vals.end())});
    }
    return out;
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve)
{
    os << "steps,median,min,max\n";
    for (const auto& p : curve)
        os << p.steps << ',' << format_number(p.median) << ',' << format_number(p.min) << ',' << format_number(p.max)
           << '\n';
}

inline fs::path export_directory(const fs::path& exp_dir) { return exp_dir / "exports"; }

namespace detail {

inline void write_stream(const fs::path& path, const std::function<void(std::ostream&)>& body)
{
    std::ostringstream os;
    body(os);
    write_text(path, os.str());
}

} // namespace detail

/// exports/incumbent_curve.csv from every optimization seed's journal.
inline fs::path export_incumbent_curve(const ExperimentConfig& cfg, const fs::path& exp_dir)
{
    std::vector<std::vector<TrajectoryPoint>> runs;
    for (std::size_t run = 0; run < cfg.protocol.optimization_seeds; ++run) {
        const auto records = load_records(run_directory(exp_dir, run) / "journal.jsonl");
        runs.push_back(trajectory_from_records(records, cfg.ladder().max_budget()));
    }
    const auto path = export_directory(exp_dir) / "incumbent_curve.csv";
    const auto curve = incumbent_curve(runs);
    detail::write_stream(path, [&](std::ostream& os) { write_curve_csv(os, curve); });
    return path;
}

/// One grid CSV and one best-response CSV per saved landscape.
inline std::vector<fs::path> export_landscapes(const fs::path& exp_dir)
{
    const auto dir = exp_dir / "landscape";
    if (!fs::exists(dir))
        throw missing_data("no landscapes in '" + exp_dir.string() + "' (run sweep first)");
    std::vector<fs::path> grids;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json")
            grids.push_back(entry.path());
    if (grids.empty())
        throw missing_data("no landscapes in '" + dir.string() + "'");
    std::sort(grids.begin(), grids.end());
    std::vector<fs::path> out;
    for (const auto& g : grids) {
        std::ifstream in(g);
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded())
            throw integrity_error("'" + g.string() + "' is not valid JSON");
        const auto grid = grid_from_json(j);
        const auto stem = g.stem().string();
        const auto grid_csv = export_directory(exp_dir) / ("landscape_" + stem + ".csv");
        const auto br_csv = export_directory(exp_dir) / ("landscape_" + stem + "_best_response.csv");
        detail::write_stream(grid_csv, [&](std::ostream& os) { write_grid_csv(os, grid); });
        detail::write_stream(br_csv, [&](std::ostream& os) { write_best_response_csv(os, grid); });
        out.push_back(grid_csv);
        out.push_back(br_csv);
    }
    return out;
}

inline ExperimentReport load_report(const fs::path& exp_dir)
{
    const auto path = exp_dir / "report.json";
    if (!fs::exists(path))
        throw missing_data("'" + path.string() + "' does not exist (run evaluate first)");
    std::ifstream in(path);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw integrity_error("'" + path.string() + "' is not valid JSON");
    return report_from_json(j);
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<std::size_t>& runs, const ExperimentAggregate& a)
{
    os << "run,median,cv\n";
    for (std::size_t i = 0; i < a.run_medians.size(); ++i)
        os << runs[i] << ',' << format_number(a.run_medians[i]) << ',' << format_number(a.run_cvs[i]) << '\n';
    os << "all," << format_number(a.median_performance) << ',' << format_number(a.median_cv) << '\n';
}

/// report_task_score.csv, report_default_shaped_return.csv and evaluations.csv.
inline std::vector<fs::path> export_report(const fs::path& exp_dir)
{
    const auto report = load_report(exp_dir);
    const auto dir = export_directory(exp_dir);
    std::vector<std::size_t> runs;
    std::vector<std::size_t> shaped_runs;
    for (const auto& inc : report.incumbents) {
        runs.push_back(inc.run);
        if (std::any_of(inc.evaluations.begin(), inc.evaluations.end(),
                        [](const EvaluationRun& e) { return e.shaped_return.has_value(); }))
            shaped_runs.push_back(inc.run);
    }
    std::vector<fs::path> out{dir / "report_task_score.csv", dir / "evaluations.csv"};
    detail::write_stream(out[0], [&](std::ostream& os) { write_aggregate_csv(os, runs, report.task); });
    detail::write_stream(out[1], [&](std::ostream& os) {
        os << "run,index,seed,task_score,default_shaped_return,failed\n";
        for (const auto& inc : report.incumbents)
            for (const auto& e : inc.evaluations)
                os << e.run << ',' << e.index << ',' << e.seed << ',' << format_number(e.task_score) << ','
                   << (e.shaped_return ? format_number(*e.shaped_return) : std::string()) << ','
                   << (e.failed ? 1 : 0) << '\n';
    });
    if (report.shaped) {
        out.push_back(dir / "report_default_shaped_return.csv");
        detail::write_stream(out.back(),
                             [&](std::ostream& os) { write_aggregate_csv(os, shaped_runs, *report.shaped); });
    }
    return out;
}

} // namespace shapeopt
