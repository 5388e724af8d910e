#ifndef MDAG_SUBJECT_NETWORK_HPP
#define MDAG_SUBJECT_NETWORK_HPP

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mdag {

/// Unordered pair of 1-based subject indices, stored with first < second.
struct SubjectPair {
    int first = 0;
    int second = 0;

    SubjectPair() = default;
    SubjectPair(int a, int b);  // canonicalizes; InputError on a == b

    friend auto operator<=>(const SubjectPair&, const SubjectPair&) = default;
};

/// Undirected simple graph on subjects 1..k_total.
class SubjectNetwork {
public:
    SubjectNetwork() = default;
    explicit SubjectNetwork(int k_total);
    SubjectNetwork(int k_total, const std::vector<SubjectPair>& edges);

    static SubjectNetwork complete(int k_total);

    int k_total() const { return k_total_; }
    const std::set<SubjectPair>& edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }
    bool contains(int k, int l) const;
    void add(int k, int l);
    void remove(int k, int l);
    bool is_complete() const;

    /// Connected components, each sorted, ordered by smallest member.
    std::vector<std::vector<int>> components() const;

    friend bool operator==(const SubjectNetwork&, const SubjectNetwork&) = default;

private:
    int k_total_ = 0;
    std::set<SubjectPair> edges_;
};

/// "{{1,2},{3}}"
std::string partition_string(const std::vector<std::vector<int>>& parts);

/// {"k_total": K, "edges": [[k, l], ...]}
nlohmann::json to_json(const SubjectNetwork& network);
SubjectNetwork network_from_json(const nlohmann::json& j);

}  // namespace mdag

#endif  // MDAG_SUBJECT_NETWORK_HPP
