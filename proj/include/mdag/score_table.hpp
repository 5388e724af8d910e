#ifndef MDAG_SCORE_TABLE_HPP
#define MDAG_SCORE_TABLE_HPP

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdag/dag.hpp"
#include "mdag/dlm.hpp"
#include "mdag/time_series.hpp"

namespace mdag {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log C(n, k)
double log_binomial(int n, int k);

/// Every parent set of `node` with at most d_max members, ascending by mask.
std::vector<ParentSet> admissible_parent_sets(int p, int node, int d_max);

/// Number of (node, parent set) keys of a complete table.
std::size_t admissible_key_count(int p, int d_max);

struct ScoreEntry {
    ParentSet parents = 0;
    double score = 0.0;
};

/// Local scores s(i, pi) of one subject. Keys with |pi| > d_max are implicitly
/// -inf; admissible keys are created unset (NaN) and must all be filled
/// before the table is used. Explicit -inf values are allowed and mean
/// "never select".
class ScoreTable {
public:
    ScoreTable() = default;
    ScoreTable(std::string subject, int p, int d_max);

    const std::string& subject() const { return subject_; }
    int p() const { return p_; }
    int d_max() const { return d_max_; }

    void set(int node, ParentSet parents, double score);
    /// -inf for |parents| > d_max; InputError for malformed keys or unset entries.
    double score(int node, ParentSet parents) const;
    /// Admissible entries of `node`, ascending by mask.
    const std::vector<ScoreEntry>& entries(int node) const { return entries_[static_cast<std::size_t>(node - 1)]; }

    bool complete() const;
    /// InputError naming the first unset key, or a node without a finite entry.
    void validate() const;

    /// Sum of s(i, G_i); -inf when any parent set is inadmissible.
    double dag_score(const Dag& dag) const;

    std::vector<std::string> variables;  ///< optional labels, empty or p names
    nlohmann::json metadata = nlohmann::json::object();

private:
    std::size_t index_of(int node, ParentSet parents) const;

    std::string subject_;
    int p_ = 0;
    int d_max_ = 0;
    std::vector<std::vector<ScoreEntry>> entries_;
};

/// s(i, pi) = log evidence - log C(P, |pi|) for every admissible key. With a
/// delta grid the discount is chosen per (node, parent set) by maximum
/// evidence. Entries are computed on `threads` workers; the result does not
/// depend on the thread count.
ScoreTable build_score_table(const TimeSeries& series, int d_max, const DlmConfig& config, int threads = 1);

/// Scores of a latent DAG with no data: s(i, pi) = -log C(P, |pi|).
ScoreTable multiplicity_only_table(const std::string& subject, int p, int d_max);

/// Line-delimited score cache:
///
///   # mdag-score-cache 1
///   # subject <id>
///   # p <P>
///   # d_max <d>
///   # variables <json array>
///   # metadata <json object>
///   <subject>\t<node>\t<mask>\t<score>
///
/// One record per admissible key, mask in decimal (bit j-1 = vertex j),
/// score with 17 significant digits.
void write_score_cache(std::ostream& out, const ScoreTable& table);
std::string score_cache_string(const ScoreTable& table);
ScoreTable read_score_cache(std::istream& in, const std::string& source);
ScoreTable read_score_cache(const std::filesystem::path& path);

/// Serialize then parse; identity on every entry.
ScoreTable cache_roundtrip(const ScoreTable& table);

}  // namespace mdag

#endif  // MDAG_SCORE_TABLE_HPP
