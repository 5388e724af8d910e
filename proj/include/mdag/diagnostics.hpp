#ifndef MDAG_DIAGNOSTICS_HPP
#define MDAG_DIAGNOSTICS_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdag/map_problem.hpp"

namespace mdag {

struct SweepRecord {
    double value = 0.0;
    int total_shd = 0;  ///< summed over the edges of the (fixed or estimated) network
    int total_xor = 0;
    double objective = 0.0;
    std::vector<std::vector<int>> partition;  ///< components of the network
    Certificate certificate;
    std::vector<Dag> dags;
    SubjectNetwork network;

    int distance(DistanceMetric metric) const { return metric == DistanceMetric::shd ? total_shd : total_xor; }
};

struct SweepResult {
    std::string parameter;  ///< "lambda" or "eta"
    std::vector<SweepRecord> records;
};

struct SweepOptions {
    SolveLimits limits;
    int threads = 1;  ///< grid points solved concurrently; output does not depend on it
};

/// Solves the fixed-network problem at every lambda of `grid` (strictly
/// increasing, nonempty) with the other hyperparameters taken from `base`.
SweepResult lambda_sweep(std::span<const ScoreTable> tables, const Hyperparameters& base,
                         const SubjectNetwork& network, std::span<const double> grid, const SweepOptions& options = {});

/// Joint-network solves over an eta grid; the partition is that of the estimated network.
SweepResult eta_sweep(std::span<const ScoreTable> tables, const Hyperparameters& base, std::span<const double> grid,
                      const SweepOptions& options = {});

/// First record whose distance is at most `fraction` of the first record's.
/// Returns records.size() when none qualifies.
std::size_t variability_point(const SweepResult& sweep, DistanceMetric metric, double fraction = 0.5);

/// One setting of a MAP log-score comparison. With `identical_within_components`
/// the DAGs of every component of the fixed network are forced to coincide.
struct ComparisonSetting {
    std::string label;
    Hyperparameters hp;
    SolveMode mode;
    bool identical_within_components = false;
};

struct ComparisonRow {
    std::string label;
    double objective = 0.0;
    double difference = 0.0;  ///< objective - baseline objective
};

/// MAP objective of every setting and its difference to settings[baseline].
std::vector<ComparisonRow> log_score_comparison(std::span<const ScoreTable> tables,
                                                std::span<const ComparisonSetting> settings, std::size_t baseline = 0,
                                                const SolveLimits& limits = {});

/// Header `value,total_shd,total_xor,objective,partition`, one row per record.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
std::string sweep_csv_string(const SweepResult& sweep);

/// gnuplot script plotting the chosen distance against the swept value from `csv_name`.
std::string gnuplot_script(const SweepResult& sweep, DistanceMetric metric, const std::string& csv_name,
                           const std::string& image_name);

nlohmann::json to_json(const SweepResult& sweep);

}  // namespace mdag

#endif  // MDAG_DIAGNOSTICS_HPP
