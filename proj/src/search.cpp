#include "search.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <queue>

#include "heuristics.hpp"

namespace mdag::detail {

namespace {

using Clock = std::chrono::steady_clock;

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.id > b.id;
    }
};

}  // namespace

Key key_of(const Configuration& c) {
    Key k;
    for (const auto& g : c.dags) {
        k.edges += g.edge_count();
        k.masks.insert(k.masks.end(), g.parent_sets().begin(), g.parent_sets().end());
    }
    return k;
}

TreeSearch::TreeSearch(const IlpModel& model, const SolveLimits& limits)
    : problem_(model.problem()), model_(model), limits_(limits) {
    const auto n = model_.variables().size();
    global_lo_.assign(n, 0.0);
    global_hi_.assign(n, 1.0);
    double scale = std::abs(model_.objective_constant()) + 1.0;
    for (const auto& v : model_.variables()) scale += std::abs(v.objective);
    safety_ = 1e-12 * scale;
}

MapEstimate TreeSearch::run() {
    const auto t0 = Clock::now();
    offer(initial_incumbent(problem_));
    start();

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    open.push(Node{0, std::numeric_limits<double>::infinity(), 0, {}});
    long next_id = 1;
    bool stopped = false;
    while (!open.empty()) {
        const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
        if (elapsed > limits_.time_limit_seconds || stats_.nodes >= limits_.node_limit) {
            stopped = true;
            break;
        }
        if (limits_.relative_gap > 0.0 &&
            open.top().bound - incumbent_value_ <= limits_.relative_gap * std::max(1.0, std::abs(incumbent_value_))) {
            stopped = true;
            break;
        }
        Node node = open.top();
        open.pop();
        if (node.bound < cutoff()) continue;
        ++stats_.nodes;
        for (auto& child : process(std::move(node))) {
            child.id = next_id++;
            open.push(std::move(child));
        }
    }

    MapEstimate out;
    out.dags = incumbent_.dags;
    out.network = incumbent_.network;
    out.objective = incumbent_value_;
    out.certificate.status = Certificate::Status::proven_optimal;
    out.certificate.bound = incumbent_value_;
    if (stopped) {
        double bound = incumbent_value_;
        while (!open.empty()) {
            bound = std::max(bound, open.top().bound);
            open.pop();
        }
        out.certificate.status = Certificate::Status::gap_limited;
        out.certificate.bound = bound;
    }
    stats_.lp_iterations = lp_iterations();
    stats_.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    out.stats = stats_;
    return out;
}

void TreeSearch::offer(const Configuration& c) {
    const double v = problem_.objective(c);
    if (!std::isfinite(v)) return;
    if (!have_incumbent_ || preferred(v, c, incumbent_value_, incumbent_)) {
        incumbent_ = c;
        incumbent_value_ = v;
        incumbent_key_ = key_of(c);
        have_incumbent_ = true;
    }
}

void TreeSearch::offer_dags(std::vector<Dag> dags, bool improve) {
    Configuration c = problem_.complete(std::move(dags));
    if (improve) c = coordinate_ascent(problem_, std::move(c));
    offer(c);
}

void TreeSearch::fix(Node& node, int j, char value, bool global) {
    const auto u = static_cast<std::size_t>(j);
    lo_[u] = hi_[u] = value;
    if (global) {
        global_lo_[u] = global_hi_[u] = value;
    } else {
        node.fix.emplace_back(j, value);
    }
}

bool TreeSearch::is_integral(std::span<const double> x) const {
    const auto& vars = model_.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (vars[j].kind == VariableKind::disagreement) continue;
        if (std::min(x[j], 1.0 - x[j]) > kIntegralityTol) return false;
    }
    return true;
}

// False when some slot has no allowed parent set left.
bool TreeSearch::key_lower_bound(Key& lb) const {
    lb.edges = 0;
    lb.masks.clear();
    for (int k = 1; k <= problem_.vertices(); ++k) {
        for (int i = 1; i <= problem_.p(); ++i) {
            int min_edges = kMaxVertices + 1;
            ParentSet min_mask = ~ParentSet{0};
            for (int v : model_.slot(k, i)) {
                if (hi_[static_cast<std::size_t>(v)] < 0.5) continue;
                const ParentSet m = model_.variables()[static_cast<std::size_t>(v)].parents;
                min_edges = std::min(min_edges, set_size(m));
                min_mask = std::min(min_mask, m);
            }
            if (min_edges > kMaxVertices) return false;
            lb.edges += min_edges;
            lb.masks.push_back(min_mask);
        }
    }
    return true;
}

std::vector<Node> TreeSearch::process(Node node) {
    lo_ = global_lo_;
    hi_ = global_hi_;
    for (const auto& [j, v] : node.fix) lo_[static_cast<std::size_t>(j)] = hi_[static_cast<std::size_t>(j)] = v;
    const bool root = node.depth == 0;

    const Relaxation r = relax(node, root);
    if (!r.feasible || r.bound < cutoff()) return {};

    Key lb;
    if (!key_lower_bound(lb)) return {};
    if (r.bound <= incumbent_value_ + kObjectiveTolerance + safety_) {
        if (lb.edges > incumbent_key_.edges) return {};
        if (lb.edges == incumbent_key_.edges && !(lb.masks < incumbent_key_.masks)) return {};
    }

    std::vector<std::vector<std::pair<int, char>>> branches;
    if (r.solved) branches = is_integral(r.x) ? exclusion_branches(r.x) : fractional_branches(r.x);
    if (branches.empty()) branches = split_branches();
    std::vector<Node> children;
    for (auto& extra : branches) {
        Node child;
        child.bound = r.bound;
        child.depth = node.depth + 1;
        child.fix = node.fix;
        child.fix.insert(child.fix.end(), extra.begin(), extra.end());
        children.push_back(std::move(child));
    }
    return children;
}

std::vector<std::pair<int, char>> TreeSearch::exclude(int k, int i, int j, bool with_j) const {
    std::vector<std::pair<int, char>> out;
    for (int v : model_.slot(k, i)) {
        if (hi_[static_cast<std::size_t>(v)] < 0.5) continue;
        if (contains(model_.variables()[static_cast<std::size_t>(v)].parents, j) == with_j) out.emplace_back(v, 0);
    }
    return out;
}

std::vector<std::vector<std::pair<int, char>>> TreeSearch::fractional_branches(std::span<const double> x) const {
    const auto& vars = model_.variables();
    int best_z = -1;
    double best_z_dist = 1.0;
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (vars[j].kind != VariableKind::link) continue;
        const double dist = std::abs(x[j] - 0.5);
        if (std::min(x[j], 1.0 - x[j]) > kIntegralityTol && dist < best_z_dist) {
            best_z_dist = dist;
            best_z = static_cast<int>(j);
        }
    }
    if (best_z >= 0) return {{{best_z, 1}}, {{best_z, 0}}};

    int bk = 0, bi = 0, bj = 0;
    double best_dist = 1.0;
    double best_e = 0.0;
    for (int k = 1; k <= problem_.vertices(); ++k) {
        for (int i = 1; i <= problem_.p(); ++i) {
            std::vector<double> e(static_cast<std::size_t>(problem_.p() + 1), 0.0);
            for (int v : model_.slot(k, i)) {
                const double val = x[static_cast<std::size_t>(v)];
                if (val <= 0.0) continue;
                for (int j : members(vars[static_cast<std::size_t>(v)].parents)) e[static_cast<std::size_t>(j)] += val;
            }
            for (int j = 1; j <= problem_.p(); ++j) {
                const double ej = e[static_cast<std::size_t>(j)];
                if (std::min(ej, 1.0 - ej) <= kIntegralityTol) continue;
                const double dist = std::abs(ej - 0.5);
                if (dist < best_dist) {
                    best_dist = dist;
                    bk = k;
                    bi = i;
                    bj = j;
                    best_e = ej;
                }
            }
        }
    }
    if (bk == 0) return {};
    auto with = exclude(bk, bi, bj, false);
    auto without = exclude(bk, bi, bj, true);
    if (best_e >= 0.5) return {with, without};
    return {without, with};
}

// The relaxation sits on an integral point c. Child t keeps the first t free
// decisions of c and changes decision t, so together the children cover
// everything except c itself.
std::vector<std::vector<std::pair<int, char>>> TreeSearch::exclusion_branches(std::span<const double> x) const {
    const auto& vars = model_.variables();
    std::vector<std::vector<std::pair<int, char>>> out;
    std::vector<std::pair<int, char>> same;
    for (int k = 1; k <= problem_.vertices(); ++k) {
        for (int i = 1; i <= problem_.p(); ++i) {
            int chosen = -1;
            int open_count = 0;
            for (int v : model_.slot(k, i)) {
                if (hi_[static_cast<std::size_t>(v)] < 0.5) continue;
                ++open_count;
                if (x[static_cast<std::size_t>(v)] > 0.5) chosen = v;
            }
            if (chosen < 0) return {};
            if (open_count < 2) continue;
            auto child = same;
            child.emplace_back(chosen, 0);
            out.push_back(std::move(child));
            for (int v : model_.slot(k, i)) {
                if (v != chosen && hi_[static_cast<std::size_t>(v)] > 0.5) same.emplace_back(v, 0);
            }
        }
    }
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (vars[j].kind != VariableKind::link || lo_[j] == hi_[j]) continue;
        const char value = x[j] > 0.5 ? 1 : 0;
        auto child = same;
        child.emplace_back(static_cast<int>(j), static_cast<char>(1 - value));
        out.push_back(std::move(child));
        same.emplace_back(static_cast<int>(j), value);
    }
    return out;
}

std::vector<std::vector<std::pair<int, char>>> TreeSearch::split_branches() const {
    for (int k = 1; k <= problem_.vertices(); ++k) {
        for (int i = 1; i <= problem_.p(); ++i) {
            ParentSet any = 0;
            ParentSet all = ~ParentSet{0};
            int count = 0;
            for (int v : model_.slot(k, i)) {
                if (hi_[static_cast<std::size_t>(v)] < 0.5) continue;
                const ParentSet m = model_.variables()[static_cast<std::size_t>(v)].parents;
                any |= m;
                all &= m;
                ++count;
            }
            if (count < 2) continue;
            const int j = std::countr_zero(any & ~all) + 1;
            return {exclude(k, i, j, true), exclude(k, i, j, false)};
        }
    }
    // Parent sets are settled; remaining freedom is in the links.
    const auto& vars = model_.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (vars[j].kind == VariableKind::link && lo_[j] != hi_[j]) {
            return {{{static_cast<int>(j), 1}}, {{static_cast<int>(j), 0}}};
        }
    }
    return {};
}

}  // namespace mdag::detail
