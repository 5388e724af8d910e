#include "mdag/clustering.hpp"

#include <algorithm>
#include <map>

#include "mdag/errors.hpp"
#include "mdag/solver.hpp"

namespace mdag {

void ClusterSpec::validate() const {
    if (subject_count < 1) throw InputError("clustering needs at least one subject");
    if (l_clusters < 1 || l_clusters > subject_count) {
        throw InputError("number of clusters must be in 1.." + std::to_string(subject_count));
    }
}

std::vector<std::vector<int>> ClusterResult::partition() const {
    int labels = static_cast<int>(prototypes.size());
    for (int a : assignment) {
        if (a < 1) throw InputError("cluster labels start at 1");
        labels = std::max(labels, a);
    }
    std::vector<std::vector<int>> parts(static_cast<std::size_t>(labels));
    for (std::size_t k = 0; k < assignment.size(); ++k) {
        parts[static_cast<std::size_t>(assignment[k] - 1)].push_back(static_cast<int>(k) + 1);
    }
    std::erase_if(parts, [](const std::vector<int>& p) { return p.empty(); });
    return parts;
}

std::vector<int> canonicalize(const std::vector<int>& assignment) {
    std::map<int, int> relabel;
    std::vector<int> out;
    out.reserve(assignment.size());
    for (int label : assignment) {
        const auto [it, inserted] = relabel.emplace(label, static_cast<int>(relabel.size()) + 1);
        out.push_back(it->second);
    }
    return out;
}

ClusterResult cluster_result(const MapEstimate& estimate, int subjects, int clusters) {
    if (static_cast<int>(estimate.dags.size()) != subjects + clusters) {
        throw InputError("estimate does not hold " + std::to_string(subjects + clusters) + " DAGs");
    }
    const auto c = canonicalize_clusters(estimate.configuration(), subjects, clusters);
    ClusterResult out;
    out.subject_dags.assign(c.dags.begin(), c.dags.begin() + subjects);
    out.prototypes.assign(c.dags.begin() + subjects, c.dags.end());
    out.assignment.assign(static_cast<std::size_t>(subjects), 0);
    for (const auto& e : c.network.edges()) {
        if (e.first > subjects || e.second <= subjects) throw InputError("cluster network links two subjects");
        out.assignment[static_cast<std::size_t>(e.first - 1)] = e.second - subjects;
    }
    for (int a : out.assignment) {
        if (a == 0) throw InputError("a subject has no cluster");
    }
    out.objective = estimate.objective;
    out.certificate = estimate.certificate;
    out.stats = estimate.stats;
    return out;
}

ClusterResult solve_clustering(std::span<const ScoreTable> tables, const Hyperparameters& hp, const ClusterSpec& spec,
                               const SolveLimits& limits) {
    spec.validate();
    if (static_cast<int>(tables.size()) != spec.subject_count) throw InputError("cluster spec and tables disagree on K");
    return cluster_result(solve(tables, hp, SolveMode::clustering(spec.l_clusters), limits), spec.subject_count,
                          spec.l_clusters);
}

ClusterResult solve_clustering_brute_force(std::span<const ScoreTable> tables, const Hyperparameters& hp,
                                           const ClusterSpec& spec) {
    spec.validate();
    if (static_cast<int>(tables.size()) != spec.subject_count) throw InputError("cluster spec and tables disagree on K");
    return cluster_result(solve_brute_force(tables, hp, SolveMode::clustering(spec.l_clusters)), spec.subject_count,
                          spec.l_clusters);
}

nlohmann::json to_json(const ClusterResult& result) {
    nlohmann::json j;
    j["objective"] = result.objective;
    j["certificate"] = to_json(result.certificate);
    j["assignment"] = result.assignment;
    j["partition"] = partition_string(result.partition());
    j["subjects"] = nlohmann::json::array();
    for (const auto& g : result.subject_dags) j["subjects"].push_back(to_json(g));
    j["prototypes"] = nlohmann::json::array();
    for (const auto& g : result.prototypes) j["prototypes"].push_back(to_json(g));
    return j;
}

}  // namespace mdag
