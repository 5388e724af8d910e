#ifndef MDAG_CLUSTERING_HPP
#define MDAG_CLUSTERING_HPP

#include <span>
#include <vector>

#include <json.hpp>

#include "mdag/map_problem.hpp"

namespace mdag {

struct ClusterSpec {
    int l_clusters = 1;
    int subject_count = 0;

    /// InputError unless 1 <= l_clusters <= subject_count.
    void validate() const;
};

struct ClusterResult {
    std::vector<Dag> subject_dags;
    std::vector<Dag> prototypes;
    std::vector<int> assignment;  ///< assignment[k-1] = cluster of subject k, canonical labels 1..L
    double objective = 0.0;
    Certificate certificate;
    SolverStats stats;

    /// Subjects grouped by cluster, e.g. {{1,2},{3,4}}.
    std::vector<std::vector<int>> partition() const;
};

/// Relabels clusters by order of first appearance over subjects 1..K.
/// Labels may be any integers.
std::vector<int> canonicalize(const std::vector<int>& assignment);

/// k-means clustering of DAGs: subject DAGs, L prototype DAGs scored by the
/// multiplicity prior alone, and the assignment, all at the joint optimum.
ClusterResult solve_clustering(std::span<const ScoreTable> tables, const Hyperparameters& hp, const ClusterSpec& spec,
                               const SolveLimits& limits = {});
ClusterResult solve_clustering_brute_force(std::span<const ScoreTable> tables, const Hyperparameters& hp,
                                           const ClusterSpec& spec);

/// Splits a clustering-mode estimate (vertices K+1..K+L are prototypes).
ClusterResult cluster_result(const MapEstimate& estimate, int subjects, int clusters);

nlohmann::json to_json(const ClusterResult& result);

}  // namespace mdag

#endif  // MDAG_CLUSTERING_HPP
