#include "mdag/map_problem.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "mdag/errors.hpp"
#include "mdag/joint_prior.hpp"

namespace mdag {

SolveMode SolveMode::fixed(SubjectNetwork a) {
    SolveMode m;
    m.kind = Kind::fixed_network;
    m.network = std::move(a);
    return m;
}

SolveMode SolveMode::joint() {
    SolveMode m;
    m.kind = Kind::joint_network;
    return m;
}

SolveMode SolveMode::clustering(int l_clusters) {
    SolveMode m;
    m.kind = Kind::clustering;
    m.clusters = l_clusters;
    return m;
}

std::string to_string(SolveMode::Kind kind) {
    switch (kind) {
        case SolveMode::Kind::fixed_network: return "fixed";
        case SolveMode::Kind::joint_network: return "joint";
        case SolveMode::Kind::clustering: return "cluster";
    }
    return "?";
}

SolveMode::Kind parse_mode_kind(const std::string& text) {
    if (text == "fixed") return SolveMode::Kind::fixed_network;
    if (text == "joint") return SolveMode::Kind::joint_network;
    if (text == "cluster") return SolveMode::Kind::clustering;
    throw InputError("unknown mode '" + text + "' (expected fixed, joint or cluster)");
}

namespace {

int total_edges(const Configuration& c) {
    int n = 0;
    for (const auto& g : c.dags) n += g.edge_count();
    return n;
}

}  // namespace

bool tie_break_less(const Configuration& a, const Configuration& b) {
    const int ea = total_edges(a);
    const int eb = total_edges(b);
    if (ea != eb) return ea < eb;
    const std::size_t n = std::min(a.dags.size(), b.dags.size());
    for (std::size_t k = 0; k < n; ++k) {
        const auto& pa = a.dags[k].parent_sets();
        const auto& pb = b.dags[k].parent_sets();
        if (pa != pb) return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
    }
    if (a.dags.size() != b.dags.size()) return a.dags.size() < b.dags.size();
    if (a.network.edge_count() != b.network.edge_count()) return a.network.edge_count() < b.network.edge_count();
    const auto& xa = a.network.edges();
    const auto& xb = b.network.edges();
    return std::lexicographical_compare(xa.begin(), xa.end(), xb.begin(), xb.end());
}

bool preferred(double objective_a, const Configuration& a, double objective_b, const Configuration& b) {
    if (objective_a > objective_b + kObjectiveTolerance) return true;
    if (objective_b > objective_a + kObjectiveTolerance) return false;
    return tie_break_less(a, b);
}

MapProblem::MapProblem(std::span<const ScoreTable> tables, const Hyperparameters& hp, const SolveMode& mode)
    : hp_(hp), mode_(mode) {
    if (tables.empty()) throw InputError("at least one subject is required");
    subjects_ = static_cast<int>(tables.size());
    p_ = tables.front().p();
    if (p_ < 1 || p_ > kMaxVertices) throw InputError("number of variables must be in 1..64");
    if (hp.d_max < 0) throw InputError("d_max must be nonnegative");
    d_max_ = std::min(hp.d_max, p_ - 1);
    for (const auto& t : tables) {
        if (t.p() != p_) throw InputError("score tables disagree on the number of variables");
        t.validate();
        if (t.d_max() < d_max_) {
            throw InputError("score table of '" + t.subject() + "' was built with d_max " + std::to_string(t.d_max()) +
                             " but " + std::to_string(d_max_) + " is requested");
        }
    }
    tables_.assign(tables.begin(), tables.end());

    const int k_total = subjects_;
    switch (mode.kind) {
        case SolveMode::Kind::fixed_network:
            if (mode.network.k_total() != k_total) {
                throw InputError("subject network has " + std::to_string(mode.network.k_total()) + " subjects, expected " +
                                 std::to_string(k_total));
            }
            hp_.validate(k_total, p_);
            candidate_pairs_.assign(mode.network.edges().begin(), mode.network.edges().end());
            break;
        case SolveMode::Kind::joint_network:
            hp_.validate(k_total, p_);
            for (int k = 1; k <= k_total; ++k) {
                for (int l = k + 1; l <= k_total; ++l) candidate_pairs_.emplace_back(k, l);
            }
            break;
        case SolveMode::Kind::clustering: {
            const int l_total = mode.clusters;
            if (l_total < 1 || l_total > k_total) {
                throw InputError("number of clusters must be in 1.." + std::to_string(k_total));
            }
            if (!hp_.lambda.is_scalar()) throw InputError("clustering needs a scalar lambda");
            hp_.eta = DensityReward(0.0);
            for (int c = 1; c <= l_total; ++c) {
                tables_.push_back(multiplicity_only_table("prototype-" + std::to_string(c), p_, d_max_));
            }
            for (int k = 1; k <= k_total; ++k) {
                for (int c = 1; c <= l_total; ++c) candidate_pairs_.emplace_back(k, k_total + c);
            }
            break;
        }
    }

    options_.resize(tables_.size());
    for (std::size_t k = 0; k < tables_.size(); ++k) {
        options_[k].resize(static_cast<std::size_t>(p_));
        for (int i = 1; i <= p_; ++i) {
            auto& opts = options_[k][static_cast<std::size_t>(i - 1)];
            for (const auto& e : tables_[k].entries(i)) {
                if (std::isfinite(e.score) && set_size(e.parents) <= d_max_) opts.push_back(e);
            }
            if (opts.empty()) {
                throw InputError("node " + std::to_string(i) + " of '" + tables_[k].subject() +
                                 "' has no finite admissible score");
            }
        }
    }
}

const std::vector<ScoreEntry>& MapProblem::options(int k, int i) const {
    return options_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i - 1)];
}

double MapProblem::eta(int k, int l) const { return hp_.eta.at(k, l); }

double MapProblem::objective(const Configuration& c) const {
    for (const auto& g : c.dags) {
        if (g.max_in_degree() > d_max_) return kNegInf;
    }
    return joint_log_posterior(tables_, c.dags, c.network, hp_);
}

void MapProblem::check_feasible(const Configuration& c) const {
    if (static_cast<int>(c.dags.size()) != vertices()) throw InputError("configuration has the wrong number of DAGs");
    for (const auto& g : c.dags) {
        if (g.p() != p_) throw InputError("configuration DAG has the wrong number of variables");
    }
    if (c.network.k_total() != vertices()) throw InputError("configuration network has the wrong size");
    switch (mode_.kind) {
        case SolveMode::Kind::fixed_network:
            if (!(c.network == mode_.network)) throw InputError("configuration network differs from the fixed network");
            break;
        case SolveMode::Kind::joint_network: break;
        case SolveMode::Kind::clustering: {
            std::vector<int> count(static_cast<std::size_t>(subjects_), 0);
            for (const auto& e : c.network.edges()) {
                if (e.first > subjects_ || e.second <= subjects_) {
                    throw InputError("cluster network must link subjects to prototypes only");
                }
                ++count[static_cast<std::size_t>(e.first - 1)];
            }
            for (int n : count) {
                if (n != 1) throw InputError("every subject must belong to exactly one cluster");
            }
            break;
        }
    }
}

Configuration MapProblem::complete(std::vector<Dag> dags) const {
    if (static_cast<int>(dags.size()) != vertices()) throw InputError("complete: wrong number of DAGs");
    Configuration c;
    c.dags = std::move(dags);
    switch (mode_.kind) {
        case SolveMode::Kind::fixed_network: c.network = mode_.network; break;
        case SolveMode::Kind::joint_network:
            c.network = SubjectNetwork(subjects_);
            for (const auto& pair : candidate_pairs_) {
                const auto& a = c.dags[static_cast<std::size_t>(pair.first - 1)];
                const auto& b = c.dags[static_cast<std::size_t>(pair.second - 1)];
                const double gain = log_regularity(a, b, hp_.lambda, pair.first, pair.second) + eta(pair.first, pair.second);
                if (gain > kObjectiveTolerance) c.network.add(pair.first, pair.second);
            }
            break;
        case SolveMode::Kind::clustering: {
            const int l_total = mode_.clusters;
            c.network = SubjectNetwork(vertices());
            std::vector<bool> used(static_cast<std::size_t>(l_total), false);
            for (int k = 1; k <= subjects_; ++k) {
                int best = 1;
                double best_value = kNegInf;
                for (int cl = 1; cl <= l_total; ++cl) {
                    const double v = log_regularity(c.dags[static_cast<std::size_t>(k - 1)],
                                                    c.dags[static_cast<std::size_t>(subjects_ + cl - 1)], hp_.lambda, k,
                                                    subjects_ + cl);
                    if (v > best_value + kObjectiveTolerance) {
                        best_value = v;
                        best = cl;
                    }
                }
                c.network.add(k, subjects_ + best);
                used[static_cast<std::size_t>(best - 1)] = true;
            }
            for (int cl = 1; cl <= l_total; ++cl) {
                if (!used[static_cast<std::size_t>(cl - 1)]) c.dags[static_cast<std::size_t>(subjects_ + cl - 1)] = Dag(p_);
            }
            c = canonicalize_clusters(c, subjects_, l_total);
            break;
        }
    }
    return c;
}

std::vector<int> canonical_cluster_labels(const SubjectNetwork& network, int subjects, int clusters) {
    std::vector<int> relabel(static_cast<std::size_t>(clusters), 0);
    int next = 1;
    for (int k = 1; k <= subjects; ++k) {
        for (int c = 1; c <= clusters; ++c) {
            if (network.contains(k, subjects + c) && relabel[static_cast<std::size_t>(c - 1)] == 0) {
                relabel[static_cast<std::size_t>(c - 1)] = next++;
            }
        }
    }
    for (auto& r : relabel) {
        if (r == 0) r = next++;
    }
    return relabel;
}

Configuration canonicalize_clusters(const Configuration& c, int subjects, int clusters) {
    const auto relabel = canonical_cluster_labels(c.network, subjects, clusters);
    Configuration out;
    out.dags = c.dags;
    out.network = SubjectNetwork(c.network.k_total());
    for (int cl = 1; cl <= clusters; ++cl) {
        out.dags[static_cast<std::size_t>(subjects + relabel[static_cast<std::size_t>(cl - 1)] - 1)] =
            c.dags[static_cast<std::size_t>(subjects + cl - 1)];
    }
    for (const auto& e : c.network.edges()) {
        int a = e.first;
        int b = e.second;
        if (a > subjects) a = subjects + relabel[static_cast<std::size_t>(a - subjects - 1)];
        if (b > subjects) b = subjects + relabel[static_cast<std::size_t>(b - subjects - 1)];
        out.network.add(a, b);
    }
    return out;
}

nlohmann::json to_json(const Certificate& c) {
    nlohmann::json j;
    j["status"] = c.status == Certificate::Status::proven_optimal ? "proven_optimal" : "gap";
    j["bound"] = c.bound;
    return j;
}

}  // namespace mdag
