#ifndef MDAG_MAP_PROBLEM_HPP
#define MDAG_MAP_PROBLEM_HPP

#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdag/dag.hpp"
#include "mdag/hyperparameters.hpp"
#include "mdag/score_table.hpp"
#include "mdag/subject_network.hpp"

namespace mdag {

/// How the subject network A enters the optimization.
struct SolveMode {
    enum class Kind { fixed_network, joint_network, clustering };

    Kind kind = Kind::fixed_network;
    SubjectNetwork network;  ///< fixed_network only
    int clusters = 0;        ///< clustering only: number of prototypes L

    static SolveMode fixed(SubjectNetwork a);
    static SolveMode joint();
    static SolveMode clustering(int l_clusters);
};

std::string to_string(SolveMode::Kind kind);
SolveMode::Kind parse_mode_kind(const std::string& text);

/// One point of the search space: a DAG per vertex of A plus A itself.
/// In clustering mode vertices K+1..K+L are the prototypes.
struct Configuration {
    std::vector<Dag> dags;
    SubjectNetwork network;

    friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Absolute tolerance under which two objective values are treated as tied.
inline constexpr double kObjectiveTolerance = 1e-9;

/// Total order used to pick one optimum among ties: fewer edges over all
/// DAGs, then the lexicographically smallest sequence of parent masks taken
/// by (vertex, node), then fewer network edges, then the lexicographically
/// smallest sorted edge list of A.
bool tie_break_less(const Configuration& a, const Configuration& b);

/// Objective comparison with tolerance, falling back to tie_break_less.
bool preferred(double objective_a, const Configuration& a, double objective_b, const Configuration& b);

/// Validated optimization instance shared by the exact and brute-force backends.
class MapProblem {
public:
    /// `tables` holds one table per subject. In clustering mode L prototype
    /// tables with pure multiplicity scores are appended and eta is dropped.
    MapProblem(std::span<const ScoreTable> tables, const Hyperparameters& hp, const SolveMode& mode);

    const std::vector<ScoreTable>& tables() const { return tables_; }
    const Hyperparameters& hyperparameters() const { return hp_; }
    const SolveMode& mode() const { return mode_; }
    int subjects() const { return subjects_; }
    int vertices() const { return static_cast<int>(tables_.size()); }
    int p() const { return p_; }
    int d_max() const { return d_max_; }

    /// Pairs that can carry a regularity term: the edges of the fixed A, every
    /// pair in joint mode, or every (subject, prototype) pair in clustering mode.
    const std::vector<SubjectPair>& candidate_pairs() const { return candidate_pairs_; }

    /// Finite, admissible (|pi| <= d_max) entries of vertex k, node i, ascending by mask.
    const std::vector<ScoreEntry>& options(int k, int i) const;

    double lambda(int k, int l, int j, int i) const { return hp_.lambda.at(k, l, j, i); }
    double eta(int k, int l) const;

    /// joint_log_posterior of the configuration under this problem's hyperparameters.
    double objective(const Configuration& c) const;
    /// Throws InputError if `c` is not a feasible point of this problem.
    void check_feasible(const Configuration& c) const;

    /// Completes DAGs into the best configuration containing them: fixed A as
    /// given; in joint mode each pair is linked iff that gains more than the
    /// tolerance; in clustering mode each subject joins the prototype costing
    /// the least regularity (ties: lowest label), unused prototypes become
    /// empty and labels are canonicalized by first appearance.
    Configuration complete(std::vector<Dag> dags) const;

private:
    std::vector<ScoreTable> tables_;
    Hyperparameters hp_;
    SolveMode mode_;
    int subjects_ = 0;
    int p_ = 0;
    int d_max_ = 0;
    std::vector<SubjectPair> candidate_pairs_;
    std::vector<std::vector<std::vector<ScoreEntry>>> options_;
};

/// Relabels prototypes K+1..K+L by order of first use over subjects 1..K
/// (unused prototypes keep their relative order after the used ones).
/// Returns the permutation old label -> new label (1-based, size L).
std::vector<int> canonical_cluster_labels(const SubjectNetwork& network, int subjects, int clusters);
Configuration canonicalize_clusters(const Configuration& c, int subjects, int clusters);

enum class SolverBackend {
    automatic,          ///< column generation when P is small enough, cutting planes otherwise
    cutting_plane,      ///< LP over parent-set indicators with lazy cluster cuts
    column_generation,  ///< LP over whole DAGs priced by dynamic programming
};

std::string to_string(SolverBackend backend);
SolverBackend parse_backend(const std::string& text);

struct SolveLimits {
    double time_limit_seconds = std::numeric_limits<double>::infinity();
    long node_limit = std::numeric_limits<long>::max();
    /// Stop once (bound - incumbent) <= gap * max(1, |incumbent|).
    double relative_gap = 0.0;
    SolverBackend backend = SolverBackend::automatic;
};

struct Certificate {
    enum class Status { proven_optimal, gap_limited };
    Status status = Status::proven_optimal;
    double bound = 0.0;  ///< upper bound on the optimum
};

struct SolverStats {
    long nodes = 0;
    long cuts = 0;
    long lp_iterations = 0;
    double wall_seconds = 0.0;
};

struct MapEstimate {
    std::vector<Dag> dags;
    SubjectNetwork network;
    double objective = 0.0;
    Certificate certificate;
    SolverStats stats;

    Configuration configuration() const { return {dags, network}; }
};

nlohmann::json to_json(const Certificate& c);

}  // namespace mdag

#endif  // MDAG_MAP_PROBLEM_HPP
