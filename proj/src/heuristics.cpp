#include "heuristics.hpp"

#include <set>

#include "mdag/errors.hpp"

namespace mdag::detail {

namespace {

constexpr int kExactDagLimit = 16;

struct Choice {
    double score = kNegInf;
    int edges = 0;
    ParentSet parents = 0;
};

bool better(const Choice& a, const Choice& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.edges != b.edges) return a.edges < b.edges;
    return a.parents < b.parents;
}

std::vector<ParentSet> ordered_fallback(int p, const std::vector<std::vector<ScoreEntry>>& options) {
    std::vector<ParentSet> out(static_cast<std::size_t>(p), 0);
    for (int i = 1; i <= p; ++i) {
        const ParentSet allowed = full_set(i - 1);
        Choice best;
        for (const auto& e : options[static_cast<std::size_t>(i - 1)]) {
            if ((e.parents & ~allowed) != 0) continue;
            const Choice c{e.score, set_size(e.parents), e.parents};
            if (better(c, best)) best = c;
        }
        if (best.score == kNegInf) throw CapacityError("no DAG heuristic available for this instance size");
        out[static_cast<std::size_t>(i - 1)] = best.parents;
    }
    return out;
}

}  // namespace

std::vector<ParentSet> best_single_dag(int p, const std::vector<std::vector<ScoreEntry>>& options) {
    if (p > kExactDagLimit) return ordered_fallback(p, options);
    const std::size_t n = std::size_t{1} << p;
    // best[i][S]: best parent set of i within S
    std::vector<std::vector<Choice>> best(static_cast<std::size_t>(p), std::vector<Choice>(n));
    for (int i = 1; i <= p; ++i) {
        auto& bi = best[static_cast<std::size_t>(i - 1)];
        for (const auto& e : options[static_cast<std::size_t>(i - 1)]) {
            const Choice c{e.score, set_size(e.parents), e.parents};
            if (better(c, bi[e.parents])) bi[e.parents] = c;
        }
        for (int b = 0; b < p; ++b) {
            const std::size_t bit = std::size_t{1} << b;
            for (std::size_t s = 0; s < n; ++s) {
                if ((s & bit) && better(bi[s ^ bit], bi[s])) bi[s] = bi[s ^ bit];
            }
        }
    }
    // f[S]: best DAG on S where S is closed under "comes earlier"
    struct Partial {
        double score = kNegInf;
        int edges = 0;
        int sink = 0;
    };
    std::vector<Partial> f(n);
    f[0] = {0.0, 0, 0};
    for (std::size_t s = 1; s < n; ++s) {
        for (int i : members(s)) {
            const std::size_t rest = s & ~static_cast<std::size_t>(vertex_bit(i));
            const Partial& prev = f[rest];
            const Choice& c = best[static_cast<std::size_t>(i - 1)][rest];
            if (prev.score == kNegInf || c.score == kNegInf) continue;
            const Partial cand{prev.score + c.score, prev.edges + c.edges, i};
            auto& cur = f[s];
            if (cand.score > cur.score || (cand.score == cur.score && cand.edges < cur.edges)) cur = cand;
        }
    }
    if (f[n - 1].score == kNegInf) throw InputError("no acyclic parent set assignment has a finite score");
    std::vector<ParentSet> out(static_cast<std::size_t>(p), 0);
    for (std::size_t s = n - 1; s != 0;) {
        const int i = f[s].sink;
        const std::size_t rest = s & ~static_cast<std::size_t>(vertex_bit(i));
        out[static_cast<std::size_t>(i - 1)] = best[static_cast<std::size_t>(i - 1)][rest].parents;
        s = rest;
    }
    return out;
}

std::vector<std::vector<ScoreEntry>> conditional_options(const MapProblem& problem, const Configuration& c, int v) {
    const int p = problem.p();
    std::vector<std::vector<ScoreEntry>> out(static_cast<std::size_t>(p));
    std::vector<int> neighbours;
    for (const auto& e : c.network.edges()) {
        if (e.first == v) neighbours.push_back(e.second);
        if (e.second == v) neighbours.push_back(e.first);
    }
    for (int i = 1; i <= p; ++i) {
        for (auto e : problem.options(v, i)) {
            for (int u : neighbours) {
                const ParentSet theirs = c.dags[static_cast<std::size_t>(u - 1)].parents(i);
                for (int j : members(e.parents ^ theirs)) e.score -= problem.lambda(v, u, j, i);
            }
            out[static_cast<std::size_t>(i - 1)].push_back(e);
        }
    }
    return out;
}

std::vector<Dag> independent_dags(const MapProblem& problem) {
    std::vector<Dag> out;
    for (int k = 1; k <= problem.vertices(); ++k) {
        std::vector<std::vector<ScoreEntry>> opts;
        for (int i = 1; i <= problem.p(); ++i) opts.push_back(problem.options(k, i));
        out.emplace_back(problem.p(), best_single_dag(problem.p(), opts));
    }
    return out;
}

Configuration coordinate_ascent(const MapProblem& problem, Configuration start, int max_rounds) {
    Configuration cur = problem.complete(std::move(start.dags));
    double value = problem.objective(cur);
    for (int round = 0; round < max_rounds; ++round) {
        bool improved = false;
        for (int v = 1; v <= problem.vertices(); ++v) {
            std::vector<Dag> dags = cur.dags;
            dags[static_cast<std::size_t>(v - 1)] =
                Dag(problem.p(), best_single_dag(problem.p(), conditional_options(problem, cur, v)));
            Configuration cand = problem.complete(std::move(dags));
            const double cand_value = problem.objective(cand);
            if (preferred(cand_value, cand, value, cur) && !(cand == cur)) {
                cur = std::move(cand);
                value = cand_value;
                improved = true;
            }
        }
        if (!improved) break;
    }
    return cur;
}

// One DAG per group maximizing the summed scores of its members.
std::vector<Dag> consensus_dags(const MapProblem& problem, const std::vector<std::vector<int>>& groups) {
    std::vector<Dag> out(static_cast<std::size_t>(problem.vertices()), Dag(problem.p()));
    for (const auto& group : groups) {
        std::vector<std::vector<ScoreEntry>> opts;
        for (int i = 1; i <= problem.p(); ++i) {
            std::vector<ScoreEntry> summed = problem.options(group.front(), i);
            for (std::size_t g = 1; g < group.size(); ++g) {
                const auto& other = problem.options(group[g], i);
                std::vector<ScoreEntry> kept;
                std::size_t b = 0;
                for (const auto& e : summed) {
                    while (b < other.size() && other[b].parents < e.parents) ++b;
                    if (b < other.size() && other[b].parents == e.parents) kept.push_back({e.parents, e.score + other[b].score});
                }
                summed = std::move(kept);
            }
            opts.push_back(std::move(summed));
        }
        const Dag g(problem.p(), best_single_dag(problem.p(), opts));
        for (int v : group) out[static_cast<std::size_t>(v - 1)] = g;
    }
    return out;
}

Configuration initial_incumbent(const MapProblem& problem) {
    const auto independent = independent_dags(problem);
    std::vector<std::vector<Dag>> starts;
    starts.push_back(independent);
    std::vector<int> all;
    for (int v = 1; v <= problem.vertices(); ++v) all.push_back(v);
    try {
        starts.push_back(consensus_dags(problem, {all}));
        if (problem.mode().kind == SolveMode::Kind::fixed_network) {
            starts.push_back(consensus_dags(problem, problem.mode().network.components()));
        }
    } catch (const InputError&) {
        // no common acyclic assignment with finite scores
    }
    std::set<std::vector<ParentSet>> seen;
    for (int k = 0; k < problem.subjects(); ++k) {
        const auto& g = independent[static_cast<std::size_t>(k)];
        if (!seen.insert(g.parent_sets()).second) continue;
        starts.emplace_back(static_cast<std::size_t>(problem.vertices()), g);
    }
    starts.emplace_back(static_cast<std::size_t>(problem.vertices()), Dag(problem.p()));

    Configuration best;
    double best_value = kNegInf;
    bool have = false;
    for (auto& dags : starts) {
        Configuration c = coordinate_ascent(problem, Configuration{std::move(dags), {}});
        const double v = problem.objective(c);
        if (!have || preferred(v, c, best_value, best)) {
            best = std::move(c);
            best_value = v;
            have = true;
        }
    }
    return best;
}

}  // namespace mdag::detail
