#include <chrono>
#include <functional>
#include <cmath>

#include "mdag/errors.hpp"
#include "mdag/joint_prior.hpp"
#include "mdag/solver.hpp"

namespace mdag {

namespace {

using Clock = std::chrono::steady_clock;

struct Candidates {
    std::vector<Dag> dags;
    std::vector<double> scores;
};

// Every DAG with a finite score for vertex k.
Candidates candidates_for(const MapProblem& problem, const std::vector<Dag>& all, int k) {
    Candidates c;
    const auto& table = problem.tables()[static_cast<std::size_t>(k - 1)];
    for (const auto& g : all) {
        const double s = table.dag_score(g);
        if (!std::isfinite(s)) continue;
        c.dags.push_back(g);
        c.scores.push_back(s);
    }
    return c;
}

double regularity(const MapProblem& problem, const Dag& a, const Dag& b, int k, int l) {
    return log_regularity(a, b, problem.hyperparameters().lambda, k, l);
}

class Tracker {
public:
    explicit Tracker(const MapProblem& problem) : problem_(problem) {}

    void offer(double value, const std::vector<const Dag*>& dags, const SubjectNetwork& network) {
        if (have_ && value < best_value_ - kObjectiveTolerance) return;
        Configuration c;
        for (const Dag* g : dags) c.dags.push_back(*g);
        c.network = network;
        if (!have_ || preferred(value, c, best_value_, best_)) {
            best_ = std::move(c);
            best_value_ = value;
            have_ = true;
        }
    }

    MapEstimate result(Clock::time_point start, long evaluations) const {
        if (!have_) throw InputError("brute force: no configuration has a finite objective");
        MapEstimate out;
        out.dags = best_.dags;
        out.network = best_.network;
        out.objective = problem_.objective(best_);
        out.certificate.status = Certificate::Status::proven_optimal;
        out.certificate.bound = out.objective;
        out.stats.nodes = evaluations;
        out.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
        return out;
    }

private:
    const MapProblem& problem_;
    Configuration best_;
    double best_value_ = kNegInf;
    bool have_ = false;
};

MapEstimate brute_force_network(const MapProblem& problem, const std::vector<Dag>& all, double max_evaluations) {
    const auto start = Clock::now();
    const int kk = problem.subjects();
    std::vector<Candidates> cands;
    double tuples = 1.0;
    for (int k = 1; k <= kk; ++k) {
        cands.push_back(candidates_for(problem, all, k));
        tuples *= static_cast<double>(cands.back().dags.size());
    }
    std::vector<SubjectNetwork> networks;
    if (problem.mode().kind == SolveMode::Kind::fixed_network) {
        networks.push_back(problem.mode().network);
    } else {
        const auto& pairs = problem.candidate_pairs();
        if (pairs.size() > 30) throw CapacityError("brute force: too many subject pairs");
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << pairs.size()); ++bits) {
            SubjectNetwork a(kk);
            for (std::size_t t = 0; t < pairs.size(); ++t) {
                if (bits >> t & 1) a.add(pairs[t].first, pairs[t].second);
            }
            networks.push_back(std::move(a));
        }
    }
    if (tuples * static_cast<double>(networks.size()) > max_evaluations) {
        throw CapacityError("brute force would need more than " + std::to_string(max_evaluations) + " evaluations");
    }

    Tracker tracker(problem);
    long evaluations = 0;
    std::vector<const Dag*> chosen(static_cast<std::size_t>(kk), nullptr);
    std::vector<std::size_t> index(static_cast<std::size_t>(kk), 0);
    for (const auto& a : networks) {
        double base = log_network_prior(a, problem.hyperparameters().eta);
        // linked[k] = earlier subjects linked to k
        std::vector<std::vector<int>> linked(static_cast<std::size_t>(kk));
        for (const auto& e : a.edges()) linked[static_cast<std::size_t>(e.second - 1)].push_back(e.first);

        const std::function<void(int, double)> descend = [&](int k, double partial) {
            if (k > kk) {
                ++evaluations;
                tracker.offer(partial, chosen, a);
                return;
            }
            const auto& c = cands[static_cast<std::size_t>(k - 1)];
            for (std::size_t t = 0; t < c.dags.size(); ++t) {
                double v = partial + c.scores[t];
                for (int l : linked[static_cast<std::size_t>(k - 1)]) {
                    v += regularity(problem, *chosen[static_cast<std::size_t>(l - 1)], c.dags[t], l, k);
                }
                chosen[static_cast<std::size_t>(k - 1)] = &c.dags[t];
                descend(k + 1, v);
            }
        };
        descend(1, base);
    }
    return tracker.result(start, evaluations);
}

MapEstimate brute_force_clusters(const MapProblem& problem, const std::vector<Dag>& all, double max_evaluations) {
    const auto start = Clock::now();
    const int kk = problem.subjects();
    const int l_total = problem.mode().clusters;
    std::vector<Candidates> cands;
    for (int k = 1; k <= kk; ++k) cands.push_back(candidates_for(problem, all, k));
    const Candidates protos = candidates_for(problem, all, kk + 1);

    double work = 0.0;
    for (const auto& c : cands) work += static_cast<double>(c.dags.size()) * static_cast<double>(protos.dags.size());
    if (work > max_evaluations) {
        throw CapacityError("brute force would need more than " + std::to_string(max_evaluations) + " evaluations");
    }

    // member[k][h]: best value of subject k next to prototype h, and the tied DAGs.
    struct Member {
        double value = kNegInf;
        std::vector<std::size_t> tied;
    };
    std::vector<std::vector<Member>> member(static_cast<std::size_t>(kk),
                                            std::vector<Member>(protos.dags.size()));
    long evaluations = 0;
    for (int k = 1; k <= kk; ++k) {
        const auto& c = cands[static_cast<std::size_t>(k - 1)];
        for (std::size_t h = 0; h < protos.dags.size(); ++h) {
            auto& m = member[static_cast<std::size_t>(k - 1)][h];
            for (std::size_t t = 0; t < c.dags.size(); ++t) {
                const double v = c.scores[t] + regularity(problem, c.dags[t], protos.dags[h], k, kk + 1);
                ++evaluations;
                if (v > m.value + kObjectiveTolerance) {
                    m.value = v;
                    m.tied = {t};
                } else if (v >= m.value - kObjectiveTolerance) {
                    m.tied.push_back(t);
                }
            }
        }
    }
    Tracker tracker(problem);
    std::vector<int> assign(static_cast<std::size_t>(kk), 0);
    const std::function<void(int, int)> partitions = [&](int k, int used) {
        if (k > kk) {
            // Per cluster: best prototype value and the tied prototypes.
            std::vector<std::vector<std::size_t>> tied_protos(static_cast<std::size_t>(used));
            double total = 0.0;
            for (int c = 1; c <= used; ++c) {
                double best = kNegInf;
                auto& tied = tied_protos[static_cast<std::size_t>(c - 1)];
                for (std::size_t h = 0; h < protos.dags.size(); ++h) {
                    double v = protos.scores[h];
                    for (int s = 1; s <= kk; ++s) {
                        if (assign[static_cast<std::size_t>(s - 1)] == c) v += member[static_cast<std::size_t>(s - 1)][h].value;
                    }
                    ++evaluations;
                    if (v > best + kObjectiveTolerance) {
                        best = v;
                        tied = {h};
                    } else if (v >= best - kObjectiveTolerance) {
                        tied.push_back(h);
                    }
                }
                total += best;
            }
            // Resolve ties over the (small) product of tied choices.
            std::vector<std::size_t> proto_pick(static_cast<std::size_t>(used), 0);
            const std::function<void(int)> pick_protos = [&](int c) {
                if (c > used) {
                    std::vector<std::size_t> subject_pick(static_cast<std::size_t>(kk), 0);
                    const std::function<void(int)> pick_subjects = [&](int s) {
                        if (s > kk) {
                            std::vector<const Dag*> dags;
                            for (int q = 1; q <= kk; ++q) {
                                dags.push_back(&cands[static_cast<std::size_t>(q - 1)].dags[subject_pick[static_cast<std::size_t>(q - 1)]]);
                            }
                            std::vector<Dag> holder;
                            holder.reserve(static_cast<std::size_t>(l_total));
                            for (int cl = 1; cl <= l_total; ++cl) {
                                if (cl <= used) {
                                    dags.push_back(&protos.dags[tied_protos[static_cast<std::size_t>(cl - 1)][proto_pick[static_cast<std::size_t>(cl - 1)]]]);
                                } else {
                                    holder.emplace_back(problem.p());
                                    dags.push_back(&holder.back());
                                }
                            }
                            SubjectNetwork a(kk + l_total);
                            for (int q = 1; q <= kk; ++q) a.add(q, kk + assign[static_cast<std::size_t>(q - 1)]);
                            tracker.offer(total, dags, a);
                            return;
                        }
                        const int c_s = assign[static_cast<std::size_t>(s - 1)];
                        const std::size_t h = tied_protos[static_cast<std::size_t>(c_s - 1)][proto_pick[static_cast<std::size_t>(c_s - 1)]];
                        for (std::size_t t : member[static_cast<std::size_t>(s - 1)][h].tied) {
                            subject_pick[static_cast<std::size_t>(s - 1)] = t;
                            pick_subjects(s + 1);
                        }
                    };
                    pick_subjects(1);
                    return;
                }
                for (std::size_t t = 0; t < tied_protos[static_cast<std::size_t>(c - 1)].size(); ++t) {
                    proto_pick[static_cast<std::size_t>(c - 1)] = t;
                    pick_protos(c + 1);
                }
            };
            pick_protos(1);
            return;
        }
        for (int c = 1; c <= std::min(used + 1, l_total); ++c) {
            assign[static_cast<std::size_t>(k - 1)] = c;
            partitions(k + 1, std::max(used, c));
        }
    };
    partitions(1, 0);
    return tracker.result(start, evaluations);
}

}  // namespace

MapEstimate solve_brute_force(const MapProblem& problem, double max_evaluations) {
    if (problem.p() > kMaxEnumerationVertices) {
        throw CapacityError("brute force supports at most " + std::to_string(kMaxEnumerationVertices) + " variables");
    }
    const auto all = all_dags(problem.p(), problem.d_max());
    if (problem.mode().kind == SolveMode::Kind::clustering) return brute_force_clusters(problem, all, max_evaluations);
    return brute_force_network(problem, all, max_evaluations);
}

MapEstimate solve_brute_force(std::span<const ScoreTable> tables, const Hyperparameters& hp, const SolveMode& mode,
                              double max_evaluations) {
    const MapProblem problem(tables, hp, mode);
    return solve_brute_force(problem, max_evaluations);
}

}  // namespace mdag
