#include "mdag/score_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mdag/errors.hpp"
#include "mdag/parallel.hpp"
#include "mdag/text_format.hpp"

namespace mdag {

double log_binomial(int n, int k) {
    if (k < 0 || k > n) return kNegInf;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::vector<ParentSet> admissible_parent_sets(int p, int node, int d_max) {
    std::vector<int> candidates;
    for (int j = 1; j <= p; ++j) {
        if (j != node) candidates.push_back(j);
    }
    std::vector<ParentSet> sets;
    const int max_size = std::min<int>(d_max, static_cast<int>(candidates.size()));
    // Combinations of each size via index vectors.
    for (int size = 0; size <= max_size; ++size) {
        std::vector<int> idx(static_cast<std::size_t>(size));
        for (int r = 0; r < size; ++r) idx[static_cast<std::size_t>(r)] = r;
        while (true) {
            ParentSet s = 0;
            for (int r : idx) s |= vertex_bit(candidates[static_cast<std::size_t>(r)]);
            sets.push_back(s);
            int r = size - 1;
            while (r >= 0 && idx[static_cast<std::size_t>(r)] == static_cast<int>(candidates.size()) - size + r) --r;
            if (r < 0) break;
            ++idx[static_cast<std::size_t>(r)];
            for (int t = r + 1; t < size; ++t) idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
        }
    }
    std::sort(sets.begin(), sets.end());
    return sets;
}

std::size_t admissible_key_count(int p, int d_max) {
    std::size_t total = 0;
    for (int d = 0; d <= std::min(d_max, p - 1); ++d) {
        total += static_cast<std::size_t>(std::llround(std::exp(log_binomial(p - 1, d))));
    }
    return total * static_cast<std::size_t>(p);
}

ScoreTable::ScoreTable(std::string subject, int p, int d_max) : subject_(std::move(subject)), p_(p), d_max_(d_max) {
    if (p < 1 || p > kMaxVertices) throw InputError("score table: p must be in 1..64");
    if (d_max < 0) throw InputError("score table: d_max must be nonnegative");
    if (d_max > p - 1) d_max_ = p - 1;
    entries_.resize(static_cast<std::size_t>(p));
    for (int i = 1; i <= p; ++i) {
        for (ParentSet s : admissible_parent_sets(p, i, d_max_)) {
            entries_[static_cast<std::size_t>(i - 1)].push_back({s, std::numeric_limits<double>::quiet_NaN()});
        }
    }
}

std::size_t ScoreTable::index_of(int node, ParentSet parents) const {
    if (node < 1 || node > p_) throw InputError("score table: node " + std::to_string(node) + " out of range");
    if ((parents & ~full_set(p_)) != 0 || contains(parents, node)) {
        throw InputError("score table: malformed parent set for node " + std::to_string(node));
    }
    const auto& list = entries_[static_cast<std::size_t>(node - 1)];
    auto it = std::lower_bound(list.begin(), list.end(), parents,
                               [](const ScoreEntry& e, ParentSet s) { return e.parents < s; });
    if (it == list.end() || it->parents != parents) return list.size();
    return static_cast<std::size_t>(it - list.begin());
}

void ScoreTable::set(int node, ParentSet parents, double score) {
    const std::size_t idx = index_of(node, parents);
    auto& list = entries_[static_cast<std::size_t>(node - 1)];
    if (idx == list.size()) {
        throw InputError("score table: parent set of size " + std::to_string(set_size(parents)) +
                         " exceeds d_max = " + std::to_string(d_max_));
    }
    if (std::isnan(score) || score == std::numeric_limits<double>::infinity()) {
        throw InputError("score table: score must be finite or -inf");
    }
    list[idx].score = score;
}

double ScoreTable::score(int node, ParentSet parents) const {
    const std::size_t idx = index_of(node, parents);
    const auto& list = entries_[static_cast<std::size_t>(node - 1)];
    if (idx == list.size()) return kNegInf;
    if (std::isnan(list[idx].score)) {
        throw InputError("score table '" + subject_ + "': entry for node " + std::to_string(node) + " is unset");
    }
    return list[idx].score;
}

bool ScoreTable::complete() const {
    for (const auto& list : entries_) {
        for (const auto& e : list) {
            if (std::isnan(e.score)) return false;
        }
    }
    return true;
}

void ScoreTable::validate() const {
    for (int i = 1; i <= p_; ++i) {
        bool finite = false;
        for (const auto& e : entries(i)) {
            if (std::isnan(e.score)) {
                throw InputError("score table '" + subject_ + "': missing entry for node " + std::to_string(i) +
                                 ", parent mask " + std::to_string(e.parents));
            }
            finite = finite || std::isfinite(e.score);
        }
        if (!finite) {
            throw InputError("score table '" + subject_ + "': node " + std::to_string(i) + " has no finite score");
        }
    }
}

double ScoreTable::dag_score(const Dag& dag) const {
    if (dag.p() != p_) throw InputError("dag_score: dimension mismatch");
    double total = 0.0;
    for (int i = 1; i <= p_; ++i) total += score(i, dag.parents(i));
    return total;
}

ScoreTable build_score_table(const TimeSeries& series, int d_max, const DlmConfig& config, int threads) {
    series.validate();
    config.validate();
    if (d_max < 0 || d_max > series.p() - 1) {
        throw InputError("d_max must lie in 0..P-1 (P = " + std::to_string(series.p()) + ")");
    }
    ScoreTable table(series.subject, series.p(), d_max);
    table.variables = series.variables;

    struct Key {
        int node;
        ParentSet parents;
    };
    std::vector<Key> keys;
    for (int i = 1; i <= series.p(); ++i) {
        for (const auto& e : table.entries(i)) keys.push_back({i, e.parents});
    }
    std::vector<double> values(keys.size());
    std::vector<double> deltas(keys.size());
    parallel_for(keys.size(), threads, [&](std::size_t k) {
        const DiscountChoice c = best_node_log_evidence(series, keys[k].node, keys[k].parents, config);
        values[k] = c.log_evidence - log_binomial(series.p(), set_size(keys[k].parents));
        deltas[k] = c.delta;
    });
    for (std::size_t k = 0; k < keys.size(); ++k) table.set(keys[k].node, keys[k].parents, values[k]);
    table.metadata = {{"dlm", to_json(config)}, {"d_max", table.d_max()}, {"n_steps", series.n_steps()}};
    return table;
}

ScoreTable multiplicity_only_table(const std::string& subject, int p, int d_max) {
    ScoreTable table(subject, p, d_max);
    for (int i = 1; i <= p; ++i) {
        for (const auto& e : std::vector<ScoreEntry>(table.entries(i))) {
            table.set(i, e.parents, -log_binomial(p, set_size(e.parents)));
        }
    }
    return table;
}

void write_score_cache(std::ostream& out, const ScoreTable& table) {
    out << "# mdag-score-cache 1\n";
    out << "# subject " << table.subject() << '\n';
    out << "# p " << table.p() << '\n';
    out << "# d_max " << table.d_max() << '\n';
    out << "# variables " << nlohmann::json(table.variables).dump() << '\n';
    out << "# metadata " << table.metadata.dump() << '\n';
    for (int i = 1; i <= table.p(); ++i) {
        for (const auto& e : table.entries(i)) {
            if (std::isnan(e.score)) throw InputError("cannot write incomplete score table");
            out << table.subject() << '\t' << i << '\t' << e.parents << '\t' << format_double(e.score) << '\n';
        }
    }
}

std::string score_cache_string(const ScoreTable& table) {
    std::ostringstream out;
    write_score_cache(out, table);
    return out.str();
}

ScoreTable read_score_cache(std::istream& in, const std::string& source) {
    std::string line;
    int line_no = 0;
    std::string subject;
    int p = -1;
    int d_max = -1;
    std::vector<std::string> variables;
    nlohmann::json metadata = nlohmann::json::object();
    bool magic = false;
    ScoreTable table;
    bool table_ready = false;
    std::vector<std::vector<bool>> seen;

    auto fail = [&](const std::string& what) -> ParseError {
        return ParseError(source + ":" + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (table_ready) throw fail("header line after records");
            const std::string body = trim(std::string_view(line).substr(1));
            const auto space = body.find(' ');
            const std::string key = body.substr(0, space);
            const std::string value = space == std::string::npos ? std::string() : trim(body.substr(space + 1));
            try {
                if (key == "mdag-score-cache") {
                    if (value != "1") throw fail("unsupported cache version '" + value + "'");
                    magic = true;
                } else if (key == "subject") {
                    subject = value;
                } else if (key == "p") {
                    p = std::stoi(value);
                } else if (key == "d_max") {
                    d_max = std::stoi(value);
                } else if (key == "variables") {
                    variables = nlohmann::json::parse(value).get<std::vector<std::string>>();
                } else if (key == "metadata") {
                    metadata = nlohmann::json::parse(value);
                } else {
                    throw fail("unknown header key '" + key + "'");
                }
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception& e) {
                throw fail("bad header value for '" + key + "': " + e.what());
            }
            continue;
        }
        if (!table_ready) {
            if (!magic) throw fail("missing '# mdag-score-cache 1' header");
            if (subject.empty() || p < 1 || d_max < 0) throw fail("header must define subject, p and d_max");
            if (d_max > p - 1) throw fail("d_max exceeds p - 1");
            try {
                table = ScoreTable(subject, p, d_max);
            } catch (const InputError& e) {
                throw fail(e.what());
            }
            if (!variables.empty() && static_cast<int>(variables.size()) != p) throw fail("variables must list p names");
            table.variables = variables;
            table.metadata = metadata;
            seen.assign(static_cast<std::size_t>(p), {});
            for (int i = 1; i <= p; ++i) seen[static_cast<std::size_t>(i - 1)].assign(table.entries(i).size(), false);
            table_ready = true;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, '\t')) fields.push_back(field);
        if (fields.size() != 4) throw fail("expected 4 tab-separated fields");
        if (fields[0] != subject) throw fail("record subject '" + fields[0] + "' does not match header");
        int node = 0;
        unsigned long long mask = 0;
        double score = 0.0;
        try {
            std::size_t used = 0;
            node = std::stoi(fields[1], &used);
            if (used != fields[1].size()) throw std::invalid_argument("node");
            mask = std::stoull(fields[2], &used);
            if (used != fields[2].size()) throw std::invalid_argument("mask");
        } catch (const std::exception&) {
            throw fail("malformed node or mask");
        }
        if (!parse_double(fields[3], score) || std::isnan(score) || (score > 0.0 && std::isinf(score))) {
            throw fail("malformed score '" + fields[3] + "'");
        }
        if (node < 1 || node > p) throw fail("node out of range");
        const auto parents = static_cast<ParentSet>(mask);
        if ((parents & ~full_set(p)) != 0 || contains(parents, node)) throw fail("malformed parent mask");
        if (set_size(parents) > d_max) throw fail("parent set larger than d_max");
        const auto& list = table.entries(node);
        const auto it = std::lower_bound(list.begin(), list.end(), parents,
                                         [](const ScoreEntry& e, ParentSet s) { return e.parents < s; });
        const auto pos = static_cast<std::size_t>(it - list.begin());
        auto& flags = seen[static_cast<std::size_t>(node - 1)];
        if (flags[pos]) throw fail("duplicate record");
        flags[pos] = true;
        table.set(node, parents, score);
    }
    if (!table_ready) {
        if (!magic) throw ParseError(source + ": missing '# mdag-score-cache 1' header");
        throw ParseError(source + ": cache holds no records");
    }
    if (!table.complete()) throw ParseError(source + ": cache is missing records");
    return table;
}

ScoreTable read_score_cache(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open score cache " + path.string());
    return read_score_cache(in, path.string());
}

ScoreTable cache_roundtrip(const ScoreTable& table) {
    std::istringstream in(score_cache_string(table));
    return read_score_cache(in, "<memory>");
}

}  // namespace mdag
