#ifndef MDAG_DAG_HPP
#define MDAG_DAG_HPP

#include <bit>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace mdag {

/// Parent set over vertices 1..64. Vertex j occupies bit (j - 1).
using ParentSet = std::uint64_t;

inline constexpr int kMaxVertices = 64;

constexpr ParentSet vertex_bit(int j) { return ParentSet{1} << (j - 1); }

constexpr bool contains(ParentSet set, int j) { return (set & vertex_bit(j)) != 0; }

constexpr int set_size(ParentSet set) { return std::popcount(set); }

/// Mask with bits for vertices 1..p.
constexpr ParentSet full_set(int p) {
    return p >= kMaxVertices ? ~ParentSet{0} : (ParentSet{1} << p) - 1;
}

ParentSet make_set(std::initializer_list<int> vertices);

/// 1-based members in increasing order.
std::vector<int> members(ParentSet set);

/// True iff the parent sets (one per vertex, 1-based vertices) contain no
/// directed cycle. Self-loops count as cycles. Throws InputError when a set
/// references a vertex outside 1..parents.size().
bool is_acyclic(std::span<const ParentSet> parents);

/// Directed acyclic graph on vertices 1..p stored as parent bitmasks.
class Dag {
public:
    Dag() = default;
    /// Empty graph on p vertices.
    explicit Dag(int p);
    /// Validates vertex range and acyclicity (InputError otherwise).
    Dag(int p, std::vector<ParentSet> parents);

    int p() const { return static_cast<int>(parents_.size()); }
    ParentSet parents(int i) const { return parents_[static_cast<std::size_t>(i - 1)]; }
    const std::vector<ParentSet>& parent_sets() const { return parents_; }

    bool has_edge(int from, int to) const { return contains(parents(to), from); }
    int edge_count() const;
    int max_in_degree() const;
    bool respects_in_degree(int d_max) const { return max_in_degree() <= d_max; }

    /// Vertices ordered so every parent precedes its children (smallest index first among ready vertices).
    std::vector<int> topological_order() const;

    friend bool operator==(const Dag&, const Dag&) = default;

private:
    std::vector<ParentSet> parents_;
};

struct DagDistanceReport {
    int shd = 0;        ///< structural Hamming distance, a reversal counts once
    int xor_count = 0;  ///< parent-membership mismatches, a reversal counts twice

    friend bool operator==(const DagDistanceReport&, const DagDistanceReport&) = default;
};

DagDistanceReport distance(const Dag& a, const Dag& b);

enum class DistanceMetric { shd, xor_count };

int distance(const Dag& a, const Dag& b, DistanceMetric metric);

std::string to_string(DistanceMetric metric);
DistanceMetric parse_distance_metric(const std::string& text);

/// Largest p accepted by the exhaustive enumerator.
inline constexpr int kMaxEnumerationVertices = 5;

/// Calls `visit` once for every DAG on p vertices (optionally with in-degree
/// at most d_max). Order: lexicographic in (parents(1), ..., parents(p)).
/// Throws CapacityError for p > kMaxEnumerationVertices.
void enumerate_dags(int p, std::optional<int> d_max, const std::function<void(const Dag&)>& visit);

std::vector<Dag> all_dags(int p, std::optional<int> d_max = std::nullopt);

/// {"p": int, "parents": [[int, ...], ...]} with 1-based vertices.
nlohmann::json to_json(const Dag& dag);
Dag dag_from_json(const nlohmann::json& j);

/// Graphviz digraph. `labels` may be empty (vertex numbers are used) or hold p names.
std::string to_dot(const Dag& dag, const std::vector<std::string>& labels, const std::string& name = "G");

}  // namespace mdag

#endif  // MDAG_DAG_HPP
