#include "mdag/dag.hpp"

#include <sstream>

#include "mdag/errors.hpp"

namespace mdag {

ParentSet make_set(std::initializer_list<int> vertices) {
    ParentSet set = 0;
    for (int j : vertices) {
        if (j < 1 || j > kMaxVertices) throw InputError("vertex index out of range: " + std::to_string(j));
        set |= vertex_bit(j);
    }
    return set;
}

std::vector<int> members(ParentSet set) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(set_size(set)));
    while (set != 0) {
        out.push_back(std::countr_zero(set) + 1);
        set &= set - 1;
    }
    return out;
}

bool is_acyclic(std::span<const ParentSet> parents) {
    const int p = static_cast<int>(parents.size());
    if (p > kMaxVertices) throw InputError("at most 64 vertices are supported");
    const ParentSet all = full_set(p);
    for (int i = 1; i <= p; ++i) {
        if ((parents[static_cast<std::size_t>(i - 1)] & ~all) != 0) {
            throw InputError("parent set of vertex " + std::to_string(i) + " references a vertex outside 1.." +
                             std::to_string(p));
        }
    }
    // Peel off vertices whose remaining parents are all removed.
    ParentSet remaining = all;
    while (remaining != 0) {
        bool progressed = false;
        for (ParentSet r = remaining; r != 0; r &= r - 1) {
            const int idx = std::countr_zero(r);
            if ((parents[static_cast<std::size_t>(idx)] & remaining) == 0) {
                remaining &= ~(ParentSet{1} << idx);
                progressed = true;
            }
        }
        if (!progressed) return false;
    }
    return true;
}

Dag::Dag(int p) {
    if (p < 0 || p > kMaxVertices) throw InputError("vertex count must be in 0..64, got " + std::to_string(p));
    parents_.assign(static_cast<std::size_t>(p), 0);
}

Dag::Dag(int p, std::vector<ParentSet> parents) : parents_(std::move(parents)) {
    if (p < 0 || p > kMaxVertices) throw InputError("vertex count must be in 0..64, got " + std::to_string(p));
    if (static_cast<int>(parents_.size()) != p) {
        throw InputError("expected " + std::to_string(p) + " parent sets, got " + std::to_string(parents_.size()));
    }
    for (int i = 1; i <= p; ++i) {
        if (contains(parents_[static_cast<std::size_t>(i - 1)], i)) {
            throw InputError("vertex " + std::to_string(i) + " lists itself as a parent");
        }
    }
    if (!is_acyclic(parents_)) throw InputError("parent sets contain a directed cycle");
}

int Dag::edge_count() const {
    int n = 0;
    for (ParentSet s : parents_) n += set_size(s);
    return n;
}

int Dag::max_in_degree() const {
    int d = 0;
    for (ParentSet s : parents_) d = std::max(d, set_size(s));
    return d;
}

std::vector<int> Dag::topological_order() const {
    std::vector<int> order;
    order.reserve(parents_.size());
    ParentSet placed = 0;
    while (static_cast<int>(order.size()) < p()) {
        for (int i = 1; i <= p(); ++i) {
            if (!contains(placed, i) && (parents(i) & ~placed) == 0) {
                order.push_back(i);
                placed |= vertex_bit(i);
                break;
            }
        }
    }
    return order;
}

DagDistanceReport distance(const Dag& a, const Dag& b) {
    if (a.p() != b.p()) {
        throw InputError("distance: graphs have different vertex counts (" + std::to_string(a.p()) + " vs " +
                         std::to_string(b.p()) + ")");
    }
    DagDistanceReport report;
    for (int i = 1; i <= a.p(); ++i) report.xor_count += set_size(a.parents(i) ^ b.parents(i));
    for (int u = 1; u <= a.p(); ++u) {
        for (int v = u + 1; v <= a.p(); ++v) {
            const int sa = (a.has_edge(u, v) ? 1 : 0) | (a.has_edge(v, u) ? 2 : 0);
            const int sb = (b.has_edge(u, v) ? 1 : 0) | (b.has_edge(v, u) ? 2 : 0);
            if (sa != sb) ++report.shd;
        }
    }
    return report;
}

int distance(const Dag& a, const Dag& b, DistanceMetric metric) {
    const DagDistanceReport r = distance(a, b);
    return metric == DistanceMetric::shd ? r.shd : r.xor_count;
}

std::string to_string(DistanceMetric metric) { return metric == DistanceMetric::shd ? "shd" : "xor"; }

DistanceMetric parse_distance_metric(const std::string& text) {
    if (text == "shd") return DistanceMetric::shd;
    if (text == "xor") return DistanceMetric::xor_count;
    throw InputError("unknown distance metric '" + text + "' (expected shd or xor)");
}

namespace {

void enumerate_from(int i, int p, ParentSet cap_mask, std::optional<int> d_max, std::vector<ParentSet>& parents,
                    const std::function<void(const Dag&)>& visit) {
    if (i > p) {
        if (is_acyclic(parents)) visit(Dag(p, parents));
        return;
    }
    const ParentSet others = cap_mask & ~vertex_bit(i);
    // Ascending masks over the subsets of `others`.
    for (ParentSet s = 0;; s = (s - others) & others) {
        if (!d_max || set_size(s) <= *d_max) {
            parents[static_cast<std::size_t>(i - 1)] = s;
            // Prune partial assignments that already close a cycle.
            if (is_acyclic(std::span<const ParentSet>(parents.data(), static_cast<std::size_t>(p))) || i == p) {
                enumerate_from(i + 1, p, cap_mask, d_max, parents, visit);
            }
        }
        if (s == others) break;
    }
    parents[static_cast<std::size_t>(i - 1)] = 0;
}

}  // namespace

void enumerate_dags(int p, std::optional<int> d_max, const std::function<void(const Dag&)>& visit) {
    if (p < 0) throw InputError("vertex count must be nonnegative");
    if (p > kMaxEnumerationVertices) {
        throw CapacityError("DAG enumeration is limited to p <= " + std::to_string(kMaxEnumerationVertices) +
                            " (requested p = " + std::to_string(p) + ")");
    }
    if (d_max && *d_max < 0) throw InputError("d_max must be nonnegative");
    std::vector<ParentSet> parents(static_cast<std::size_t>(p), 0);
    enumerate_from(1, p, full_set(p), d_max, parents, visit);
}

std::vector<Dag> all_dags(int p, std::optional<int> d_max) {
    std::vector<Dag> out;
    enumerate_dags(p, d_max, [&](const Dag& g) { out.push_back(g); });
    return out;
}

nlohmann::json to_json(const Dag& dag) {
    nlohmann::json parents = nlohmann::json::array();
    for (int i = 1; i <= dag.p(); ++i) parents.push_back(members(dag.parents(i)));
    return {{"p", dag.p()}, {"parents", parents}};
}

Dag dag_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("p") || !j.contains("parents")) {
        throw ParseError("DAG JSON must be an object with \"p\" and \"parents\"");
    }
    const int p = j.at("p").get<int>();
    const auto& lists = j.at("parents");
    if (!lists.is_array() || static_cast<int>(lists.size()) != p) {
        throw ParseError("DAG JSON: \"parents\" must list exactly p parent sets");
    }
    std::vector<ParentSet> parents;
    for (const auto& list : lists) {
        ParentSet s = 0;
        for (const auto& v : list) {
            const int j_vertex = v.get<int>();
            if (j_vertex < 1 || j_vertex > p) throw ParseError("DAG JSON: parent index out of range");
            s |= vertex_bit(j_vertex);
        }
        parents.push_back(s);
    }
    try {
        return Dag(p, std::move(parents));
    } catch (const InputError& e) {
        throw ParseError(std::string("DAG JSON: ") + e.what());
    }
}

std::string to_dot(const Dag& dag, const std::vector<std::string>& labels, const std::string& name) {
    if (!labels.empty() && static_cast<int>(labels.size()) != dag.p()) {
        throw InputError("to_dot: expected " + std::to_string(dag.p()) + " labels");
    }
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') q += '\\';
            q += c;
        }
        return q + "\"";
    };
    std::ostringstream out;
    out << "digraph " << quote(name) << " {\n";
    for (int i = 1; i <= dag.p(); ++i) {
        out << "  " << i << " [label=" << quote(labels.empty() ? std::to_string(i) : labels[i - 1]) << "];\n";
    }
    for (int i = 1; i <= dag.p(); ++i) {
        for (int j : members(dag.parents(i))) out << "  " << j << " -> " << i << ";\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace mdag
