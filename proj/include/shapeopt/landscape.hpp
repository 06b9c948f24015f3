#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "environment.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "space.hpp"

namespace shapeopt {

struct GridAxis {
    ParamSpec spec;
    std::vector<double> values;

    std::size_t resolution() const { return values.size(); }
    const std::string& name() const { return spec.name(); }
    const char* scale() const
    {
        if (spec.kind() == ParamKind::categorical)
            return "categorical";
        return spec.log_scale() ? "log" : "linear";
    }
};

/// Inclusive grid over a parameter: geometric for log-scaled specs,
/// arithmetic otherwise, the declared choices for categoricals.
inline GridAxis make_axis(const ParamSpec& spec, std::size_t resolution)
{
    if (spec.kind() == ParamKind::categorical)
        return {spec, spec.choices()};
    if (resolution < 2)
        throw domain_error("make_axis: resolution must be >= 2");
    if (spec.log_scale() && !(spec.lo() > 0.0))
        throw domain_error("make_axis: log axis needs a positive lower bound");
    GridAxis axis{spec, std::vector<double>(resolution)};
    const double last = static_cast<double>(resolution - 1);
    if (spec.log_scale()) {
        const double llo = std::log(spec.lo());
        const double step = (std::log(spec.hi()) - llo) / last;
        for (std::size_t i = 0; i < resolution; ++i)
            axis.values[i] = std::exp(llo + static_cast<double>(i) * step);
    } else {
        const double step = (spec.hi() - spec.lo()) / last;
        for (std::size_t i = 0; i < resolution; ++i)
            axis.values[i] = spec.lo() + static_cast<double>(i) * step;
    }
    axis.values.front() = spec.lo();
    axis.values.back() = spec.hi();
    return axis;
}

struct GridCell {
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;
    bool failed = false;
};

struct LandscapeGrid {
    GridAxis axis_a;
    GridAxis axis_b;
    Direction direction = Direction::maximize;
    ValueMap frozen;
    std::vector<GridCell> cells; ///< row-major, rows follow axis_a

    GridCell& at(std::size_t i, std::size_t j) { return cells[i * axis_b.resolution() + j]; }
    const GridCell& at(std::size_t i, std::size_t j) const { return cells[i * axis_b.resolution() + j]; }
};

/// Outcome of one training inside a sweep cell.
struct CellRun {
    std::size_t row = 0;
    std::size_t col = 0;
    std::uint64_t seed = 0;
    ValueMap values;
    double score = 0.0;
    bool failed = false;
};

/// Trains every (a, b, seed) combination with the pair substituted into
/// the frozen baseline values. `run_cell` returns the mean task score of one
/// training and throws `training_diverged` on failure; `on_run` observes
/// every training in order.
inline LandscapeGrid sweep(const GridAxis& axis_a, const GridAxis& axis_b, const ValueMap& frozen,
                           std::span<const std::uint64_t> seeds, Direction direction,
                           const std::function<double(const ValueMap&, std::uint64_t)>& run_cell,
                           const std::function<void(const CellRun&)>& on_run = {})
{
    if (axis_a.name() == axis_b.name())
        throw domain_error("sweep: both axes refer to '" + axis_a.name() + "'");
    if (seeds.empty())
        throw domain_error("sweep: need at least one seed");
    LandscapeGrid grid{axis_a, axis_b, direction, frozen, {}};
    grid.cells.resize(axis_a.resolution() * axis_b.resolution());
    for (std::size_t i = 0; i < axis_a.resolution(); ++i) {
        for (std::size_t j = 0; j < axis_b.resolution(); ++j) {
            ValueMap values = frozen;
            values[axis_a.name()] = axis_a.values[i];
            values[axis_b.name()] = axis_b.values[j];
            std::vector<double> scores;
            bool failed = false;
            for (const auto seed : seeds) {
                CellRun run{i, j, seed, values, 0.0, false};
                try {
                    run.score = run_cell(values, seed);
                    if (!std::isfinite(run.score))
                        run.failed = true;
                } catch (const training_diverged&) {
                    run.failed = true;
                } catch (const degenerate_weights&) {
                    run.failed = true;
                }
                if (run.failed) {
                    failed = true;
                    run.score = std::numeric_limits<double>::quiet_NaN();
                } else {
                    scores.push_back(run.score);
                }
                if (on_run)
                    on_run(run);
            }
            GridCell& cell = grid.at(i, j);
            cell.failed = failed;
            cell.n = scores.size();
            if (!scores.empty()) {
                cell.mean = mean_of(scores);
                cell.std = stddev_of(scores);
            }
        }
    }
    return grid;
}

enum class Along { axis_a, axis_b };

/// For each line of the grid, the index of the best cell on the other axis.
/// Along::axis_b scans each row (fixed axis_a value) over axis_b; failed
/// cells rank last and ties resolve to the lower index.
inline std::vector<std::size_t> best_response(const LandscapeGrid& grid, Along along)
{
    const std::size_t rows = grid.axis_a.resolution();
    const std::size_t cols = grid.axis_b.resolution();
    const std::size_t lines = along == Along::axis_b ? rows : cols;
    const std::size_t span = along == Along::axis_b ? cols : rows;
    auto score = [&](const GridCell& c) {
        if (c.failed)
            return -std::numeric_limits<double>::infinity();
        return oriented(c.mean, grid.direction);
    };
    std::vector<std::size_t> out(lines, 0);
    for (std::size_t l = 0; l < lines; ++l) {
        double best = -std::numeric_limits<double>::infinity();
        bool any = false;
        for (std::size_t k = 0; k < span; ++k) {
            const GridCell& c = along == Along::axis_b ? grid.at(l, k) : grid.at(k, l);
            const double s = score(c);
            if (!any || s > best) {
                best = s;
                out[l] = k;
                any = true;
            }
        }
    }
    return out;
}

inline std::string format_number(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// Columns: <a>:<scale>, <b>:<scale>, mean, std, n, failed.
inline void write_grid_csv(std::ostream& os, const LandscapeGrid& grid)
{
    os << grid.axis_a.name() << ':' << grid.axis_a.scale() << ',' << grid.axis_b.name() << ':' << grid.axis_b.scale()
       << ",mean,std,n,failed\n";
    for (std::size_t i = 0; i < grid.axis_a.resolution(); ++i)
        for (std::size_t j = 0; j < grid.axis_b.resolution(); ++j) {
            const auto& c = grid.at(i, j);
            os << format_number(grid.axis_a.values[i]) << ',' << format_number(grid.axis_b.values[j]) << ','
               << format_number(c.mean) << ',' << format_number(c.std) << ',' << c.n << ',' << (c.failed ? 1 : 0)
               << '\n';
        }
}

/// Columns: along, line value, best value on the other axis, best mean.
inline void write_best_response_csv(std::ostream& os, const LandscapeGrid& grid)
{
    os << "fixed_param,fixed_value,best_param,best_value,best_mean\n";
    const auto rows = best_response(grid, Along::axis_b);
    for (std::size_t i = 0; i < rows.size(); ++i)
        os << grid.axis_a.name() << ':' << grid.axis_a.scale() << ',' << format_number(grid.axis_a.values[i]) << ','
           << grid.axis_b.name() << ':' << grid.axis_b.scale() << ',' << format_number(grid.axis_b.values[rows[i]])
           << ',' << format_number(grid.at(i, rows[i]).mean) << '\n';
    const auto cols = best_response(grid, Along::axis_a);
    for (std::size_t j = 0; j < cols.size(); ++j)
        os << grid.axis_b.name() << ':' << grid.axis_b.scale() << ',' << format_number(grid.axis_b.values[j]) << ','
           << grid.axis_a.name() << ':' << grid.axis_a.scale() << ',' << format_number(grid.axis_a.values[cols[j]])
           << ',' << format_number(grid.at(cols[j], j).mean) << '\n';
}

} // namespace shapeopt
