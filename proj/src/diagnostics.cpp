#include "mdag/diagnostics.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "mdag/errors.hpp"
#include "mdag/joint_prior.hpp"
#include "mdag/parallel.hpp"
#include "mdag/solver.hpp"
#include "mdag/text_format.hpp"

namespace mdag {

namespace {

void check_grid(std::span<const double> grid, const std::string& name) {
    if (grid.empty()) throw InputError(name + " grid is empty");
    for (std::size_t t = 0; t < grid.size(); ++t) {
        if (!std::isfinite(grid[t])) throw InputError(name + " grid holds a non-finite value");
        if (t > 0 && !(grid[t] > grid[t - 1])) throw InputError(name + " grid must be strictly increasing");
    }
}

SweepRecord record_of(double value, const MapEstimate& est) {
    SweepRecord r;
    r.value = value;
    for (const auto& e : est.network.edges()) {
        const auto d = distance(est.dags[static_cast<std::size_t>(e.first - 1)], est.dags[static_cast<std::size_t>(e.second - 1)]);
        r.total_shd += d.shd;
        r.total_xor += d.xor_count;
    }
    r.objective = est.objective;
    r.partition = est.network.components();
    r.certificate = est.certificate;
    r.dags = est.dags;
    r.network = est.network;
    return r;
}

template <class Setup>
SweepResult sweep(const std::string& name, std::span<const double> grid, const SweepOptions& options, Setup setup) {
    check_grid(grid, name);
    SweepResult out;
    out.parameter = name;
    out.records.resize(grid.size());
    parallel_for(grid.size(), options.threads, [&](std::size_t t) {
        try {
            out.records[t] = record_of(grid[t], setup(grid[t]));
        } catch (const InputError& e) {
            throw InputError(name + " = " + format_shortest(grid[t]) + ": " + e.what());
        }
    });
    return out;
}

}  // namespace

SweepResult lambda_sweep(std::span<const ScoreTable> tables, const Hyperparameters& base,
                         const SubjectNetwork& network, std::span<const double> grid, const SweepOptions& options) {
    return sweep("lambda", grid, options, [&](double lambda) {
        Hyperparameters hp = base;
        hp.lambda = RegularityPenalty(lambda);
        return solve(tables, hp, SolveMode::fixed(network), options.limits);
    });
}

SweepResult eta_sweep(std::span<const ScoreTable> tables, const Hyperparameters& base, std::span<const double> grid,
                      const SweepOptions& options) {
    return sweep("eta", grid, options, [&](double eta) {
        Hyperparameters hp = base;
        hp.eta = DensityReward(eta);
        return solve(tables, hp, SolveMode::joint(), options.limits);
    });
}

std::size_t variability_point(const SweepResult& sweep, DistanceMetric metric, double fraction) {
    if (sweep.records.empty()) return 0;
    const double reference = sweep.records.front().distance(metric);
    for (std::size_t t = 0; t < sweep.records.size(); ++t) {
        if (sweep.records[t].distance(metric) <= fraction * reference) return t;
    }
    return sweep.records.size();
}

std::vector<ComparisonRow> log_score_comparison(std::span<const ScoreTable> tables,
                                                std::span<const ComparisonSetting> settings, std::size_t baseline,
                                                const SolveLimits& limits) {
    if (baseline >= settings.size()) throw InputError("comparison baseline is out of range");
    std::vector<ComparisonRow> rows;
    for (const auto& s : settings) {
        ComparisonRow row;
        row.label = s.label;
        if (s.identical_within_components) {
            if (s.mode.kind != SolveMode::Kind::fixed_network) {
                throw InputError("setting '" + s.label + "': identical DAGs need a fixed network");
            }
            // Above lambda* linked DAGs coincide, and then the penalty vanishes.
            Hyperparameters forced = s.hp;
            forced.lambda = RegularityPenalty(lambda_eta_star(tables) + 1.0);
            const auto est = solve(tables, forced, s.mode, limits);
            row.objective = MapProblem(tables, s.hp, s.mode).objective(est.configuration());
        } else {
            row.objective = solve(tables, s.hp, s.mode, limits).objective;
        }
        rows.push_back(row);
    }
    for (auto& row : rows) row.difference = row.objective - rows[baseline].objective;
    return rows;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "value,total_shd,total_xor,objective,partition\n";
    for (const auto& r : sweep.records) {
        out << format_shortest(r.value) << ',' << r.total_shd << ',' << r.total_xor << ',' << format_shortest(r.objective)
            << ",\"" << partition_string(r.partition) << "\"\n";
    }
}

std::string sweep_csv_string(const SweepResult& sweep) {
    std::ostringstream out;
    write_sweep_csv(out, sweep);
    return out.str();
}

std::string gnuplot_script(const SweepResult& sweep, DistanceMetric metric, const std::string& csv_name,
                           const std::string& image_name) {
    const int column = metric == DistanceMetric::shd ? 2 : 3;
    const std::string label = metric == DistanceMetric::shd ? "total SHD" : "total XOR count";
    std::ostringstream s;
    s << "set datafile separator ','\n"
      << "set terminal pngcairo size 800,500\n"
      << "set output '" << image_name << "'\n"
      << "set xlabel '" << sweep.parameter << "'\n"
      << "set ylabel '" << label << "'\n"
      << "set key autotitle columnhead\n"
      << "unset key\n"
      << "set grid\n"
      << "plot '" << csv_name << "' using 1:" << column << " with linespoints pt 7\n";
    return s.str();
}

nlohmann::json to_json(const SweepResult& sweep) {
    nlohmann::json j;
    j["parameter"] = sweep.parameter;
    j["records"] = nlohmann::json::array();
    for (const auto& r : sweep.records) {
        nlohmann::json rec;
        rec["value"] = r.value;
        rec["total_shd"] = r.total_shd;
        rec["total_xor"] = r.total_xor;
        rec["objective"] = r.objective;
        rec["partition"] = partition_string(r.partition);
        rec["certificate"] = to_json(r.certificate);
        rec["network"] = to_json(r.network);
        rec["dags"] = nlohmann::json::array();
        for (const auto& g : r.dags) rec["dags"].push_back(to_json(g));
        j["records"].push_back(rec);
    }
    return j;
}

}  // namespace mdag
