#ifndef MDAG_SRC_SEARCH_HPP
#define MDAG_SRC_SEARCH_HPP

#include <chrono>
#include <vector>

#include "mdag/ilp_model.hpp"
#include "mdag/map_problem.hpp"

namespace mdag::detail {

inline constexpr double kIntegralityTol = 1e-6;

struct Node {
    long id = 0;
    double bound = 0.0;
    int depth = 0;
    std::vector<std::pair<int, char>> fix;  // model variable, value
};

struct Key {
    int edges = 0;
    std::vector<ParentSet> masks;
};

Key key_of(const Configuration& c);

/// Best-first branch-and-bound over the variables of an IlpModel. Derived
/// classes supply the relaxation; branching, incumbents and the tie-break
/// pruning live here.
class TreeSearch {
public:
    TreeSearch(const IlpModel& model, const SolveLimits& limits);
    virtual ~TreeSearch() = default;

    MapEstimate run();

protected:
    struct Relaxation {
        bool feasible = true;
        double bound = 0.0;
        bool solved = false;     // x below is an optimal relaxed point
        std::vector<double> x;   // model-space values
    };

    virtual void start() {}
    /// Bounds of the node are already in lo_/hi_.
    virtual Relaxation relax(Node& node, bool root) = 0;
    virtual long lp_iterations() const = 0;

    const Configuration& incumbent() const { return incumbent_; }
    double cutoff() const { return incumbent_value_ - kObjectiveTolerance - safety_; }
    void offer(const Configuration& c);
    /// Offers the DAGs after completing them, optionally polished by coordinate ascent.
    void offer_dags(std::vector<Dag> dags, bool improve);
    void fix(Node& node, int j, char value, bool global);
    bool is_integral(std::span<const double> x) const;

    const MapProblem& problem_;
    const IlpModel& model_;
    SolveLimits limits_;
    std::vector<double> lo_;
    std::vector<double> hi_;
    SolverStats stats_;
    double incumbent_value_ = kNegInf;

private:
    std::vector<Node> process(Node node);
    bool key_lower_bound(Key& lb) const;
    std::vector<std::pair<int, char>> exclude(int k, int i, int j, bool with_j) const;
    std::vector<std::vector<std::pair<int, char>>> fractional_branches(std::span<const double> x) const;
    std::vector<std::vector<std::pair<int, char>>> exclusion_branches(std::span<const double> x) const;
    std::vector<std::vector<std::pair<int, char>>> split_branches() const;

    std::vector<double> global_lo_;
    std::vector<double> global_hi_;
    double safety_ = 0.0;
    Configuration incumbent_;
    Key incumbent_key_;
    bool have_incumbent_ = false;
};

MapEstimate branch_and_cut(const IlpModel& model, const SolveLimits& limits);
MapEstimate branch_and_price(const IlpModel& model, const SolveLimits& limits);

/// Largest p handled by branch_and_price.
inline constexpr int kColumnGenerationMaxP = 14;

}  // namespace mdag::detail

#endif  // MDAG_SRC_SEARCH_HPP
