#include <doctest.h>

#include <random>

#include "mdag/errors.hpp"
#include "mdag/joint_prior.hpp"
#include "mdag/solver.hpp"
#include "test_support.hpp"

using namespace mdag;
using mdag::testing::make_table;

namespace {

Hyperparameters scalar_hp(double lambda, double eta, int d_max) {
    Hyperparameters hp;
    hp.lambda = RegularityPenalty(lambda);
    hp.eta = DensityReward(eta);
    hp.d_max = d_max;
    return hp;
}

}  // namespace

TEST_CASE("two-subject instance across lambda regimes") {
    const auto tables = mdag::testing::two_subject_instance();
    const SubjectNetwork a(2, {{1, 2}});
    struct Row {
        double lambda;
        ParentSet g1_node1, g1_node2, g2_node1, g2_node2;
        double objective;
    };
    for (const Row& r : {Row{0.5, 0, 1, 2, 0, 4.0}, Row{1.5, 0, 0, 2, 0, 2.5}, Row{3.0, 0, 1, 0, 1, 2.0}}) {
        CAPTURE(r.lambda);
        const auto hp = scalar_hp(r.lambda, 0.0, 1);
        const auto est = solve(tables, hp, SolveMode::fixed(a));
        CHECK(est.objective == doctest::Approx(r.objective));
        CHECK(est.dags[0].parents(1) == r.g1_node1);
        CHECK(est.dags[0].parents(2) == r.g1_node2);
        CHECK(est.dags[1].parents(1) == r.g2_node1);
        CHECK(est.dags[1].parents(2) == r.g2_node2);
        CHECK(est.certificate.status == Certificate::Status::proven_optimal);
        const auto brute = solve_brute_force(tables, hp, SolveMode::fixed(a));
        CHECK(brute.configuration() == est.configuration());
    }
}

TEST_CASE("random instances agree with brute force") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const int p = 2 + trial % 2;
        const int kk = 2 + trial % 3;
        const int d_max = p - 1;
        const bool coarse = trial % 4 == 0;
        std::vector<ScoreTable> tables;
        for (int k = 0; k < kk; ++k) {
            tables.push_back(mdag::testing::random_table(rng, "s" + std::to_string(k), p, d_max, -4, 4, coarse));
        }
        const double lambda = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
        const double eta = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
        for (auto kind : {SolveMode::Kind::fixed_network, SolveMode::Kind::joint_network, SolveMode::Kind::clustering}) {
            CAPTURE(trial);
            CAPTURE(static_cast<int>(kind));
            SolveMode mode;
            if (kind == SolveMode::Kind::fixed_network) {
                SubjectNetwork a(kk);
                for (int k = 1; k < kk; ++k) a.add(k, k + 1);
                mode = SolveMode::fixed(a);
            } else if (kind == SolveMode::Kind::joint_network) {
                mode = SolveMode::joint();
            } else {
                mode = SolveMode::clustering(std::min(2, kk));
            }
            const auto hp = scalar_hp(coarse ? std::round(lambda * 4) / 4 : lambda, coarse ? std::round(eta * 4) / 4 : eta, d_max);
            const auto brute = solve_brute_force(tables, hp, mode);
            for (auto backend : {SolverBackend::cutting_plane, SolverBackend::column_generation}) {
                CAPTURE(to_string(backend));
                SolveLimits limits;
                limits.backend = backend;
                const auto est = solve(tables, hp, mode, limits);
                CHECK(est.certificate.status == Certificate::Status::proven_optimal);
                CHECK(est.objective == doctest::Approx(brute.objective).epsilon(1e-12));
                CHECK(est.configuration() == brute.configuration());
            }
        }
    }
}

namespace {

std::vector<ScoreTable> random_instance(std::mt19937_64& rng, int kk, int p) {
    std::vector<ScoreTable> tables;
    for (int k = 0; k < kk; ++k) tables.push_back(mdag::testing::random_table(rng, "s" + std::to_string(k), p, p - 1));
    return tables;
}

}  // namespace

TEST_CASE("independent estimation, linking and consensus properties") {
    std::mt19937_64 rng(53);
    for (int t = 0; t < 100; ++t) {
        const int p = 2 + t % 2;
        const int kk = 2 + t % 2;
        const auto tables = random_instance(rng, kk, p);
        const double star = lambda_eta_star(tables);
        const double lambda = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
        CAPTURE(t);

        // Zero density reward: the subjects decouple.
        const auto a = solve(tables, scalar_hp(lambda, 0.0, p - 1), SolveMode::joint());
        CHECK(a.dags == independent_estimates(tables));
        double independent = 0.0;
        for (int k = 0; k < kk; ++k) independent += tables[static_cast<std::size_t>(k)].dag_score(a.dags[static_cast<std::size_t>(k)]);
        CHECK(a.objective == doctest::Approx(independent).epsilon(1e-12));

        // Positive reward: equal DAGs are always linked.
        const auto b = solve(tables, scalar_hp(lambda, 0.3, p - 1), SolveMode::joint());
        for (int k = 1; k <= kk; ++k)
            for (int l = k + 1; l <= kk; ++l)
                if (b.dags[static_cast<std::size_t>(k - 1)] == b.dags[static_cast<std::size_t>(l - 1)]) CHECK(b.network.contains(k, l));

        // Penalty above the bound: linked DAGs agree.
        const auto c = solve(tables, scalar_hp(star + 0.5, 0.3, p - 1), SolveMode::joint());
        for (const auto& [k, l] : c.network.edges()) CHECK(c.dags[static_cast<std::size_t>(k - 1)] == c.dags[static_cast<std::size_t>(l - 1)]);

        // Reward above the bound: the network is complete.
        const auto d = solve(tables, scalar_hp(lambda, star + 0.5, p - 1), SolveMode::joint());
        CHECK(d.network == SubjectNetwork::complete(kk));

    }
}

TEST_CASE("reported objective is the posterior of the returned configuration") {
    std::mt19937_64 rng(59);
    for (int t = 0; t < 40; ++t) {
        const auto tables = random_instance(rng, 3, 3);
        const auto hp = scalar_hp(std::uniform_real_distribution<double>(0, 5)(rng), std::uniform_real_distribution<double>(-1, 3)(rng), 2);
        SubjectNetwork chain(3, {{1, 2}, {2, 3}});
        for (const auto& mode : {SolveMode::fixed(chain), SolveMode::joint()}) {
            const auto est = solve(tables, hp, mode);
            CHECK(est.objective == doctest::Approx(joint_log_posterior(tables, est.dags, est.network, hp)).epsilon(1e-12));
        }
    }
}

TEST_CASE("consensus above the bound matches brute force") {
    std::mt19937_64 rng(61);
    for (int t = 0; t < 30; ++t) {
        const auto tables = random_instance(rng, 4, 2 + t % 2);
        const int p = tables.front().p();
        const auto hp = scalar_hp(lambda_eta_star(tables) + 0.25 + t % 3, 0.0, p - 1);
        const SubjectNetwork a(4, {{1, 2}, {3, 4}});
        const auto est = solve(tables, hp, SolveMode::fixed(a));
        const auto brute = solve_brute_force(tables, hp, SolveMode::fixed(a));
        CAPTURE(t);
        CHECK(est.configuration() == brute.configuration());
        CHECK(est.objective == doctest::Approx(brute.objective).epsilon(1e-12));
        CHECK(est.dags[0] == est.dags[1]);
        CHECK(est.dags[2] == est.dags[3]);
    }
}

TEST_CASE("edge 1 -> 2 of subject 1 is not monotone in lambda") {
    const auto tables = mdag::testing::two_subject_instance();
    std::vector<int> indicator;
    for (double lambda : {0.5, 1.5, 3.0}) {
        const auto est = solve(tables, scalar_hp(lambda, 0.0, 1), SolveMode::fixed(SubjectNetwork(2, {{1, 2}})));
        indicator.push_back(est.dags[0].has_edge(1, 2) ? 1 : 0);
    }
    CHECK(indicator == std::vector<int>{1, 0, 1});
}

TEST_CASE("four-subject instance over an eta grid") {
    const std::vector<ScoreTable> tables{
        make_table("s1", 2, 1, {{1, {}, 0.0}, {1, {2}, 0.0}, {2, {}, 0.0}, {2, {1}, 1.0}}),
        make_table("s2", 2, 1, {{1, {}, 0.0}, {1, {2}, 0.0}, {2, {}, 0.0}, {2, {1}, 2.0}}),
        make_table("s3", 2, 1, {{1, {}, 0.0}, {1, {2}, 2.0}, {2, {}, 0.0}, {2, {1}, 0.0}}),
        make_table("s4", 2, 1, {{1, {}, 0.0}, {1, {2}, 3.0}, {2, {}, 0.0}, {2, {1}, 0.0}})};
    CHECK(lambda_eta_star(tables) == 8.0);
    const Dag backward(2, {make_set({2}), 0});
    for (double eta : {0.25, 0.5, 0.8, 1.2, 2.0}) {
        CAPTURE(eta);
        const auto hp = scalar_hp(10.0, eta, 1);
        const auto brute = solve_brute_force(tables, hp, SolveMode::joint());
        for (auto backend : {SolverBackend::cutting_plane, SolverBackend::column_generation}) {
            SolveLimits limits;
            limits.backend = backend;
            const auto est = solve(tables, hp, SolveMode::joint(), limits);
            CHECK(est.configuration() == brute.configuration());
            CHECK(est.objective == doctest::Approx(brute.objective).epsilon(1e-12));
        }
        if (eta > 2.0 / 3.0) {
            CHECK(brute.network == SubjectNetwork::complete(4));
            CHECK(brute.dags == std::vector<Dag>(4, backward));
            CHECK(brute.objective == doctest::Approx(5.0 + 6.0 * eta));
        }
    }
}
