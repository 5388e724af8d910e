#include "mdag/solver.hpp"

#include "mdag/errors.hpp"
#include "mdag/ilp_model.hpp"
#include "mdag/joint_prior.hpp"
#include "search.hpp"

namespace mdag {

std::string to_string(SolverBackend backend) {
    switch (backend) {
        case SolverBackend::automatic: return "auto";
        case SolverBackend::cutting_plane: return "cutting-plane";
        case SolverBackend::column_generation: return "column-generation";
    }
    return "auto";
}

SolverBackend parse_backend(const std::string& text) {
    if (text == "auto") return SolverBackend::automatic;
    if (text == "cutting-plane") return SolverBackend::cutting_plane;
    if (text == "column-generation") return SolverBackend::column_generation;
    throw InputError("unknown solver backend '" + text + "'");
}

MapEstimate solve(const IlpModel& model, const SolveLimits& limits) {
    SolverBackend backend = limits.backend;
    if (backend == SolverBackend::automatic) {
        backend = model.problem().p() <= detail::kColumnGenerationMaxP ? SolverBackend::column_generation
                                                                       : SolverBackend::cutting_plane;
    }
    if (backend == SolverBackend::column_generation) return detail::branch_and_price(model, limits);
    return detail::branch_and_cut(model, limits);
}

namespace {

bool forces_consensus(const MapProblem& problem) {
    if (problem.mode().kind != SolveMode::Kind::fixed_network) return false;
    const auto& network = problem.mode().network;
    if (network.edge_count() == 0) return false;
    const double star = lambda_eta_star(problem.tables());
    for (const auto& pair : network.edges()) {
        const Eigen::MatrixXd slice = problem.hyperparameters().lambda.slice(pair.first, pair.second, problem.p());
        for (int i = 0; i < problem.p(); ++i) {
            for (int j = 0; j < problem.p(); ++j) {
                if (i != j && !(slice(j, i) > star)) return false;
            }
        }
    }
    return true;
}

// Above the threshold every component of A shares one DAG, so each component
// is solved as a single subject with summed scores.
MapEstimate solve_by_components(const MapProblem& problem, const SolveLimits& limits) {
    const int p = problem.p();
    const int d_max = problem.d_max();
    MapEstimate out;
    out.dags.resize(static_cast<std::size_t>(problem.vertices()));
    out.network = problem.mode().network;
    double gap = 0.0;
    for (const auto& component : out.network.components()) {
        ScoreTable merged("component", p, d_max);
        for (int i = 1; i <= p; ++i) {
            for (const ParentSet pi : admissible_parent_sets(p, i, d_max)) {
                double s = 0.0;
                for (int k : component) s += problem.tables()[static_cast<std::size_t>(k - 1)].score(i, pi);
                merged.set(i, pi, s);
            }
        }
        Hyperparameters hp;
        hp.d_max = d_max;
        const MapProblem single(std::span<const ScoreTable>(&merged, 1), hp, SolveMode::fixed(SubjectNetwork(1)));
        const MapEstimate part = solve(IlpModel(single), limits);
        for (int k : component) out.dags[static_cast<std::size_t>(k - 1)] = part.dags.front();
        gap += part.certificate.bound - part.objective;
        if (part.certificate.status == Certificate::Status::gap_limited) {
            out.certificate.status = Certificate::Status::gap_limited;
        }
        out.stats.nodes += part.stats.nodes;
        out.stats.cuts += part.stats.cuts;
        out.stats.lp_iterations += part.stats.lp_iterations;
        out.stats.wall_seconds += part.stats.wall_seconds;
    }
    out.objective = problem.objective(out.configuration());
    out.certificate.bound = out.objective + gap;
    return out;
}

}  // namespace

MapEstimate solve(const MapProblem& problem, const SolveLimits& limits) {
    if (forces_consensus(problem)) return solve_by_components(problem, limits);
    const IlpModel model(problem);
    return solve(model, limits);
}

MapEstimate solve(std::span<const ScoreTable> tables, const Hyperparameters& hp, const SolveMode& mode,
                  const SolveLimits& limits) {
    const MapProblem problem(tables, hp, mode);
    return solve(problem, limits);
}

std::vector<Dag> independent_estimates(std::span<const ScoreTable> tables, std::optional<int> d_max) {
    std::vector<Dag> out;
    for (const auto& t : tables) {
        Hyperparameters hp;
        hp.d_max = d_max.value_or(t.d_max());
        const MapProblem problem(std::span<const ScoreTable>(&t, 1), hp, SolveMode::fixed(SubjectNetwork(1)));
        out.push_back(solve(problem).dags.front());
    }
    return out;
}

}  // namespace mdag
