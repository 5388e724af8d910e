#ifndef MDAG_SOLVER_HPP
#define MDAG_SOLVER_HPP

#include <optional>
#include <span>
#include <vector>

#include "mdag/map_problem.hpp"

namespace mdag {

class IlpModel;

/// Exact MAP estimate by branch-and-bound on the binary program of IlpModel,
/// relaxed either with cluster cuts or with DAG columns. Ties within kObjectiveTolerance are resolved by tie_break_less. When a
/// limit stops the search the best configuration found is returned with a
/// gap certificate.
MapEstimate solve(const IlpModel& model, const SolveLimits& limits = {});
MapEstimate solve(const MapProblem& problem, const SolveLimits& limits = {});
MapEstimate solve(std::span<const ScoreTable> tables, const Hyperparameters& hp, const SolveMode& mode,
                  const SolveLimits& limits = {});

/// Exhaustive search over every configuration (p <= 5). Throws
/// CapacityError when more than `max_evaluations` objective evaluations
/// would be needed.
MapEstimate solve_brute_force(const MapProblem& problem, double max_evaluations = 2e9);
MapEstimate solve_brute_force(std::span<const ScoreTable> tables, const Hyperparameters& hp, const SolveMode& mode,
                              double max_evaluations = 2e9);

/// Best DAG of every subject on its own (no regularity), using each table's
/// own d_max unless one is given.
std::vector<Dag> independent_estimates(std::span<const ScoreTable> tables, std::optional<int> d_max = std::nullopt);

}  // namespace mdag

#endif  // MDAG_SOLVER_HPP
