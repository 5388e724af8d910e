#ifndef MDAG_SRC_HEURISTICS_HPP
#define MDAG_SRC_HEURISTICS_HPP

#include <vector>

#include "mdag/map_problem.hpp"

namespace mdag::detail {

/// Highest-scoring DAG for per-node option lists (finite scores), fewer edges
/// first among equal scores. Exact for p <= 16; larger p falls back to the
/// best DAG consistent with the order 1..p.
std::vector<ParentSet> best_single_dag(int p, const std::vector<std::vector<ScoreEntry>>& options);

/// Options of vertex v rescored with the regularity against its current
/// neighbours in c.network.
std::vector<std::vector<ScoreEntry>> conditional_options(const MapProblem& problem, const Configuration& c, int v);

/// Per-subject optimum ignoring the other subjects.
std::vector<Dag> independent_dags(const MapProblem& problem);

/// Block coordinate ascent: re-optimizes one DAG at a time given the rest.
Configuration coordinate_ascent(const MapProblem& problem, Configuration start, int max_rounds = 50);

/// Best of the coordinate-ascent runs from independent, consensus and empty starts.
Configuration initial_incumbent(const MapProblem& problem);

}  // namespace mdag::detail

#endif  // MDAG_SRC_HEURISTICS_HPP
