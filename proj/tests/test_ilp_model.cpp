#include <doctest.h>

#include <random>

#include "mdag/errors.hpp"
#include "mdag/ilp_model.hpp"
#include "mdag/joint_prior.hpp"
#include "test_support.hpp"

using namespace mdag;

namespace {

Hyperparameters scalar_hp(double lambda, double eta, int d_max) {
    Hyperparameters hp;
    hp.lambda = RegularityPenalty(lambda);
    hp.eta = DensityReward(eta);
    hp.d_max = d_max;
    return hp;
}

// Every choice of one parent set per (vertex, node), acyclic or not.
std::vector<std::vector<ParentSet>> all_assignments(const IlpModel& m, int k) {
    const int p = m.problem().p();
    std::vector<std::vector<ParentSet>> out{{}};
    for (int i = 1; i <= p; ++i) {
        std::vector<std::vector<ParentSet>> next;
        for (const auto& prefix : out) {
            for (int v : m.slot(k, i)) {
                auto a = prefix;
                a.push_back(m.variables()[static_cast<std::size_t>(v)].parents);
                next.push_back(a);
            }
        }
        out = next;
    }
    return out;
}

std::vector<double> indicator(const IlpModel& m, int k, const std::vector<ParentSet>& ps) {
    std::vector<double> x(m.variables().size(), 0.0);
    for (int i = 1; i <= m.problem().p(); ++i)
        for (int v : m.slot(k, i))
            if (m.variables()[static_cast<std::size_t>(v)].parents == ps[static_cast<std::size_t>(i - 1)]) x[static_cast<std::size_t>(v)] = 1.0;
    return x;
}

bool satisfies_all_cluster_cuts(const IlpModel& m, int k, std::span<const double> x) {
    const int p = m.problem().p();
    for (ParentSet c = 1; c < (ParentSet{1} << p); ++c)
        if (m.cluster_cut(k, c).activity(x) < 1.0 - 1e-9) return false;
    return true;
}

Configuration random_configuration(std::mt19937_64& rng, const MapProblem& pr) {
    const auto dags = all_dags(pr.p(), pr.d_max());
    std::vector<Dag> gs;
    for (int k = 0; k < pr.vertices(); ++k) gs.push_back(dags[std::uniform_int_distribution<std::size_t>(0, dags.size() - 1)(rng)]);
    SubjectNetwork a(pr.vertices());
    if (pr.mode().kind == SolveMode::Kind::fixed_network) {
        a = pr.mode().network;
    } else if (pr.mode().kind == SolveMode::Kind::joint_network) {
        for (int k = 1; k <= pr.vertices(); ++k)
            for (int l = k + 1; l <= pr.vertices(); ++l)
                if (std::bernoulli_distribution(0.5)(rng)) a.add(k, l);
    } else {
        for (int k = 1; k <= pr.subjects(); ++k)
            a.add(k, pr.subjects() + std::uniform_int_distribution<int>(1, pr.mode().clusters)(rng));
        return canonicalize_clusters({gs, a}, pr.subjects(), pr.mode().clusters);
    }
    return {gs, a};
}

}  // namespace

TEST_CASE("single subject with two variables has three feasible encodings") {
    const std::vector<ScoreTable> tables{mdag::testing::make_table("s", 2, 1, {})};
    const MapProblem pr(tables, scalar_hp(1.0, 0.0, 1), SolveMode::fixed(SubjectNetwork(1)));
    const IlpModel m(pr, false);
    CHECK(m.variables().size() == 4);
    int feasible = 0;
    for (const auto& a : all_assignments(m, 1)) {
        const auto x = indicator(m, 1, a);
        CHECK(m.satisfies_rows(x));
        feasible += satisfies_all_cluster_cuts(m, 1, x) ? 1 : 0;
    }
    CHECK(feasible == 3);
}

TEST_CASE("cluster cuts cut exactly the cyclic assignments") {
    for (int p = 2; p <= 4; ++p) {
        const std::vector<ScoreTable> tables{mdag::testing::make_table("s", p, p - 1, {})};
        const MapProblem pr(tables, scalar_hp(1.0, 0.0, p - 1), SolveMode::fixed(SubjectNetwork(1)));
        const IlpModel m(pr, false);
        int acyclic = 0;
        for (const auto& a : all_assignments(m, 1)) {
            const auto x = indicator(m, 1, a);
            const bool dag = is_acyclic(a);
            CHECK(satisfies_all_cluster_cuts(m, 1, x) == dag);
            CHECK(m.separate_cluster_cuts(x).empty() == dag);
            for (const auto& cut : m.separate_cluster_cuts(x)) CHECK(cut.activity(x) < cut.lower);
            acyclic += dag ? 1 : 0;
        }
        CHECK(acyclic == static_cast<int>(all_dags(p).size()));
    }
}

TEST_CASE("row one of a slot rejects zero or two parent sets") {
    const std::vector<ScoreTable> tables{mdag::testing::make_table("s", 3, 2, {})};
    const MapProblem pr(tables, scalar_hp(1.0, 0.0, 2), SolveMode::fixed(SubjectNetwork(1)));
    const IlpModel m(pr, false);
    auto x = indicator(m, 1, {0, 0, 0});
    CHECK(m.satisfies_rows(x));
    x[static_cast<std::size_t>(m.slot(1, 2)[1])] = 1.0;
    CHECK_FALSE(m.satisfies_rows(x));
    x[static_cast<std::size_t>(m.slot(1, 2)[0])] = 0.0;
    CHECK(m.satisfies_rows(x));
    x[static_cast<std::size_t>(m.slot(1, 2)[1])] = 0.0;
    CHECK_FALSE(m.satisfies_rows(x));
}

TEST_CASE("disagreement variable is forced to one") {
    const auto tables = mdag::testing::two_subject_instance();
    const MapProblem pr(tables, scalar_hp(1.5, 0.0, 1), SolveMode::fixed(SubjectNetwork(2, {{1, 2}})));
    const IlpModel m(pr, false);
    const Configuration c{{Dag(2, {0, make_set({1})}), Dag(2, {make_set({2}), 0})}, SubjectNetwork(2, {{1, 2}})};
    auto x = m.encode(c);
    CHECK(m.satisfies_rows(x));
    const int d12 = m.disagreement(1, 2, 1, 2);
    const int d21 = m.disagreement(1, 2, 2, 1);
    REQUIRE(d12 >= 0);
    REQUIRE(d21 >= 0);
    CHECK(x[static_cast<std::size_t>(d12)] == 1.0);
    CHECK(x[static_cast<std::size_t>(d21)] == 1.0);
    CHECK(m.evaluate(x) == doctest::Approx(5.0 - 2 * 1.5));
    x[static_cast<std::size_t>(d12)] = 0.0;
    CHECK_FALSE(m.satisfies_rows(x));
}

TEST_CASE("objective of encoded configurations equals the joint posterior") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 90; ++t) {
        const int p = 2 + t % 2;
        const int kk = 2 + t % 3;
        std::vector<ScoreTable> tables;
        for (int k = 0; k < kk; ++k) tables.push_back(mdag::testing::random_table(rng, "s" + std::to_string(k), p, p - 1));
        const auto hp = scalar_hp(std::uniform_real_distribution<double>(0, 4)(rng),
                                  std::uniform_real_distribution<double>(-1, 3)(rng), p - 1);
        SolveMode mode;
        switch (t % 3) {
            case 0: {
                SubjectNetwork a(kk);
                for (int k = 1; k < kk; ++k) a.add(k, k + 1);
                mode = SolveMode::fixed(a);
                break;
            }
            case 1: mode = SolveMode::joint(); break;
            default: mode = SolveMode::clustering(2); break;
        }
        const MapProblem pr(tables, hp, mode);
        const IlpModel m(pr, false);
        for (int rep = 0; rep < 5; ++rep) {
            const Configuration c = random_configuration(rng, pr);
            CAPTURE(t);
            const auto x = m.encode(c);
            CHECK(m.satisfies_rows(x));
            CHECK(m.evaluate(x) == doctest::Approx(pr.objective(c)).epsilon(1e-12));
            if (mode.kind != SolveMode::Kind::clustering) {
                CHECK(pr.objective(c) == doctest::Approx(joint_log_posterior(tables, c.dags, c.network, hp)).epsilon(1e-12));
            }
            const auto decoded = m.decode_parents(x);
            for (int k = 1; k <= pr.vertices(); ++k)
                CHECK(decoded[static_cast<std::size_t>(k - 1)] == c.dags[static_cast<std::size_t>(k - 1)].parent_sets());
            CHECK(m.separate_cluster_cuts(x).empty());
            CHECK(m.separate_transport_cuts(x).empty());
        }
    }
}

TEST_CASE("transport cuts separate mixed parent sets and keep integer points") {
    const std::vector<ScoreTable> tables{mdag::testing::make_table("a", 3, 2, {}), mdag::testing::make_table("b", 3, 2, {})};
    const SubjectNetwork a(2, {{1, 2}});
    const MapProblem pr(tables, scalar_hp(1.0, 0.0, 2), SolveMode::fixed(a));
    const IlpModel m(pr, false);
    std::vector<double> x(m.variables().size(), 0.0);
    for (int k = 1; k <= 2; ++k)
        for (int i = 1; i <= 2; ++i) x[static_cast<std::size_t>(m.slot(k, i)[0])] = 1.0;
    // Same edge marginals at node 3, different distributions over parent sets.
    const auto put = [&](int k, ParentSet s, double w) {
        for (int v : m.slot(k, 3))
            if (m.variables()[static_cast<std::size_t>(v)].parents == s) x[static_cast<std::size_t>(v)] = w;
    };
    put(1, make_set({1}), 0.5);
    put(1, make_set({2}), 0.5);
    put(2, 0, 0.5);
    put(2, make_set({1, 2}), 0.5);
    REQUIRE(m.satisfies_rows(x));
    CHECK(m.separate_cluster_cuts(x).empty());
    const auto cuts = m.separate_transport_cuts(x);
    REQUIRE_FALSE(cuts.empty());
    for (const auto& cut : cuts) {
        CHECK((cut.activity(x) < cut.lower - 1e-6 || cut.activity(x) > cut.upper + 1e-6));
        for (const auto& g : all_dags(3, 2)) {
            for (const auto& h : all_dags(3, 2)) {
                const auto y = m.encode(Configuration{{g, h}, a});
                CHECK(cut.activity(y) >= cut.lower - 1e-9);
                CHECK(cut.activity(y) <= cut.upper + 1e-9);
            }
        }
    }
}

TEST_CASE("presolve keeps an optimal configuration") {
    std::mt19937_64 rng(43);
    for (int t = 0; t < 20; ++t) {
        std::vector<ScoreTable> tables;
        for (int k = 0; k < 2; ++k) tables.push_back(mdag::testing::random_table(rng, "s" + std::to_string(k), 3, 2));
        const MapProblem pr(tables, scalar_hp(0.5, 0.0, 2), SolveMode::fixed(SubjectNetwork(2, {{1, 2}})));
        const IlpModel full(pr, false), reduced(pr, true);
        CHECK(reduced.variables().size() <= full.variables().size());
        CHECK(full.removed_by_presolve() == 0);
        // The best configuration over all DAG pairs is still encodable.
        double best = kNegInf;
        Configuration arg;
        const auto dags = all_dags(3, 2);
        for (const auto& g : dags)
            for (const auto& h : dags) {
                const Configuration c{{g, h}, SubjectNetwork(2, {{1, 2}})};
                const double v = pr.objective(c);
                if (v > best) {
                    best = v;
                    arg = c;
                }
            }
        CHECK_NOTHROW((void)reduced.encode(arg));
    }
}

TEST_CASE("encode rejects infeasible configurations") {
    const auto tables = mdag::testing::two_subject_instance();
    const MapProblem pr(tables, scalar_hp(1.0, 0.0, 1), SolveMode::fixed(SubjectNetwork(2, {{1, 2}})));
    const IlpModel m(pr, false);
    CHECK_THROWS_AS(m.encode(Configuration{{Dag(2), Dag(2)}, SubjectNetwork(2)}), InputError);
    // Cluster labels must follow first appearance.
    const MapProblem cl(tables, scalar_hp(1.0, 0.0, 1), SolveMode::clustering(2));
    const IlpModel mc(cl, false);
    const Configuration first{{Dag(2), Dag(2), Dag(2), Dag(2)}, SubjectNetwork(4, {{1, 3}, {2, 4}})};
    const Configuration second{{Dag(2), Dag(2), Dag(2), Dag(2)}, SubjectNetwork(4, {{1, 4}, {2, 3}})};
    CHECK_NOTHROW((void)mc.encode(first));
    CHECK_THROWS_AS(mc.encode(second), InputError);
}
