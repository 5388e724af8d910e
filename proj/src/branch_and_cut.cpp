#include <algorithm>

#include "heuristics.hpp"
#include "mdag/lp_solver.hpp"
#include "search.hpp"

namespace mdag::detail {

namespace {

constexpr long kLpIterationLimit = 2'000'000;
constexpr int kRootCutRounds = 50;
constexpr int kNodeCutRounds = 8;
constexpr long kHeuristicFrequency = 25;

std::vector<double> objective_of(const IlpModel& model) {
    std::vector<double> f;
    for (const auto& v : model.variables()) f.push_back(v.objective);
    return f;
}

class BranchAndCut final : public TreeSearch {
public:
    BranchAndCut(const IlpModel& model, const SolveLimits& limits)
        : TreeSearch(model, limits),
          lp_(objective_of(model), std::vector<double>(model.variables().size(), 0.0),
              std::vector<double>(model.variables().size(), 1.0)) {
        lp_.add_rows(model.rows());
    }

private:
    long lp_iterations() const override { return lp_.iterations(); }

    void offer_parents(const std::vector<std::vector<ParentSet>>& parents, bool improve) {
        for (const auto& ps : parents) {
            if (!is_acyclic(ps)) return;
        }
        std::vector<Dag> dags;
        for (const auto& ps : parents) dags.emplace_back(problem_.p(), ps);
        offer_dags(std::move(dags), improve);
    }

    Relaxation relax(Node& node, bool root) override {
        for (std::size_t j = 0; j < lo_.size(); ++j) lp_.set_bounds(static_cast<int>(j), lo_[j], hi_[j]);
        Relaxation out;
        DualSimplex::Status status = DualSimplex::Status::optimal;
        bool integral = false;
        for (int rounds = 0;; ++rounds) {
            status = lp_.solve(kLpIterationLimit);
            if (status == DualSimplex::Status::infeasible) {
                out.feasible = false;
                return out;
            }
            out.bound = model_.objective_constant() + lp_.dual_bound();
            if (out.bound < cutoff()) return out;
            if (status != DualSimplex::Status::optimal) break;
            const auto x = lp_.solution();
            integral = is_integral(x);
            auto cuts = model_.separate_cluster_cuts(x);
            if (cuts.empty()) break;
            if (!integral && rounds >= (root ? kRootCutRounds : kNodeCutRounds)) break;
            stats_.cuts += static_cast<long>(cuts.size());
            lp_.add_rows(cuts);
            integral = false;
        }
        out.solved = status == DualSimplex::Status::optimal;
        out.x.assign(lp_.solution().begin(), lp_.solution().end());
        bool acyclic_integral = false;
        if (out.solved && integral) {
            const auto parents = model_.decode_parents(out.x);
            acyclic_integral = std::all_of(parents.begin(), parents.end(),
                                           [](const std::vector<ParentSet>& ps) { return is_acyclic(ps); });
            if (acyclic_integral) offer_parents(parents, false);
        }
        if (out.solved && !acyclic_integral && (root || stats_.nodes % kHeuristicFrequency == 0)) {
            offer_parents(model_.decode_parents(out.x), true);
        }
        // An integral point with a cycle is not a solution: branch on it.
        if (out.solved && integral && !acyclic_integral) out.solved = false;
        if (out.bound < cutoff()) return out;

        // Reduced-cost fixing against the incumbent.
        const auto& vars = model_.variables();
        for (std::size_t j = 0; j < vars.size(); ++j) {
            if (vars[j].kind == VariableKind::disagreement) continue;
            const int jj = static_cast<int>(j);
            if (lo_[j] == hi_[j]) continue;
            if (model_.objective_constant() + lp_.forced_bound(jj, 1.0) < cutoff()) {
                fix(node, jj, 0, root);
            } else if (model_.objective_constant() + lp_.forced_bound(jj, 0.0) < cutoff()) {
                fix(node, jj, 1, root);
            }
        }
        return out;
    }

    DualSimplex lp_;
};

}  // namespace

MapEstimate branch_and_cut(const IlpModel& model, const SolveLimits& limits) {
    return BranchAndCut(model, limits).run();
}

}  // namespace mdag::detail
