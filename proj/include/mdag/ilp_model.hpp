#ifndef MDAG_ILP_MODEL_HPP
#define MDAG_ILP_MODEL_HPP

#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mdag/map_problem.hpp"

namespace mdag {

/// lower <= sum value[t] * x[index[t]] <= upper (either side may be infinite).
struct LinearRow {
    std::vector<int> index;
    std::vector<double> value;
    double lower = 0.0;
    double upper = 0.0;

    double activity(std::span<const double> x) const;
};

enum class VariableKind {
    parent_set,    ///< x: vertex k uses `parents` for `node`
    link,          ///< z: pair (k, l) is an edge of A
    disagreement,  ///< d: linked k and l disagree on the edge parent -> node
};

struct IlpVariable {
    VariableKind kind = VariableKind::parent_set;
    int k = 0;
    int l = 0;
    int node = 0;
    int parent = 0;
    ParentSet parents = 0;
    double objective = 0.0;
};

/// Binary program whose optimum equals the MAP objective of a MapProblem.
/// All variables live in [0, 1]. Acyclicity is enforced lazily through
/// cluster cuts, which are not part of rows().
class IlpModel {
public:
    /// With `presolve`, parent sets beaten by one of their subsets by more than
    /// any regularity they could save are left out.
    explicit IlpModel(const MapProblem& problem, bool presolve = true);

    const MapProblem& problem() const { return *problem_; }
    const std::vector<IlpVariable>& variables() const { return variables_; }
    const std::vector<LinearRow>& rows() const { return rows_; }
    double objective_constant() const { return constant_; }
    std::size_t removed_by_presolve() const { return removed_; }

    /// Parent-set variables of vertex k, node i, ascending by mask.
    std::span<const int> slot(int k, int i) const;
    /// Index of z for the pair, or -1 when the pair has no variable.
    int link(int k, int l) const;
    /// Index of d for (pair, parent -> node), or -1.
    int disagreement(int k, int l, int j, int i) const;

    /// Indicator vector of a configuration, with every d at its smallest feasible value.
    /// InputError if the configuration uses a parent set without a variable.
    std::vector<double> encode(const Configuration& c) const;
    /// Parent sets chosen by rounding each slot to its largest entry, one vector per vertex.
    std::vector<std::vector<ParentSet>> decode_parents(std::span<const double> x) const;
    /// Objective constant plus c'x.
    double evaluate(std::span<const double> x) const;
    /// Bounds and rows() hold within tol.
    bool satisfies_rows(std::span<const double> x, double tol = 1e-9) const;

    /// sum_{i in C} sum_{pi disjoint from C} x[k,i,pi] >= 1
    LinearRow cluster_cut(int k, ParentSet cluster) const;
    /// Cluster cuts violated by more than min_violation, at most max_per_vertex
    /// per vertex, most violated first (smaller clusters first on ties).
    std::vector<LinearRow> separate_cluster_cuts(std::span<const double> x, double min_violation = 1e-6,
                                                 int max_per_vertex = 8) const;

    /// Potential h for the pair (k, l) at node i under x: 1-Lipschitz in the
    /// lambda-weighted Hamming distance and maximizing E_k h - E_l h, which
    /// then equals the transport distance between the two parent-set
    /// distributions. Empty when one side is a point mass (unless allowed) or
    /// when the distance cannot exceed `at_least`.
    struct Potential {
        std::vector<std::pair<int, double>> terms;  ///< x variable, -h for k and +h for l
        double gain = 0.0;                          ///< E_k h - E_l h at x
        double range = 0.0;                         ///< max over k's sets of h minus min over l's
    };
    std::optional<Potential> transport_potential(int k, int l, int i, std::span<const double> x,
                                                 bool point_masses = false,
                                                 double at_least = -std::numeric_limits<double>::infinity()) const;

    /// Cuts bounding the regularity of a pair at one node by E_k h - E_l h for
    /// a potential h that is 1-Lipschitz in the lambda-weighted Hamming
    /// distance between parent sets (zero penalty when z = 0). They cut off
    /// points where two vertices mix different parent sets with equal edge
    /// marginals.
    std::vector<LinearRow> separate_transport_cuts(std::span<const double> x, double min_violation = 1e-6) const;

private:
    int add_variable(IlpVariable v);
    void build_slots(bool presolve);
    void build_links();
    void build_disagreements();

    const MapProblem* problem_;
    std::vector<IlpVariable> variables_;
    std::vector<LinearRow> rows_;
    double constant_ = 0.0;
    std::size_t removed_ = 0;
    std::vector<std::vector<int>> slots_;  // (k-1) * P + (i-1)
    std::vector<int> links_;               // (k-1) * V + (l-1)
    std::map<std::array<int, 4>, int> disagreements_;
};

}  // namespace mdag

#endif  // MDAG_ILP_MODEL_HPP
