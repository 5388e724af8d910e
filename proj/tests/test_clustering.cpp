#include <doctest.h>

#include <random>

#include "mdag/clustering.hpp"
#include "mdag/errors.hpp"
#include "mdag/solver.hpp"
#include "test_support.hpp"

using namespace mdag;
using mdag::testing::make_table;

namespace {

Hyperparameters scalar_hp(double lambda, int d_max) {
    Hyperparameters hp;
    hp.lambda = RegularityPenalty(lambda);
    hp.d_max = d_max;
    return hp;
}

// Subjects 1, 2 favour 1 -> 2; subjects 3, 4 favour 2 -> 1.
std::vector<ScoreTable> two_groups() {
    return {make_table("a", 2, 1, {{2, {1}, 2.0}}), make_table("b", 2, 1, {{2, {1}, 1.5}}),
            make_table("c", 2, 1, {{1, {2}, 2.0}}), make_table("d", 2, 1, {{1, {2}, 2.5}})};
}

void check_same(const ClusterResult& a, const ClusterResult& b) {
    CHECK(a.assignment == b.assignment);
    CHECK(a.subject_dags == b.subject_dags);
    CHECK(a.prototypes == b.prototypes);
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-12));
}

}  // namespace

TEST_CASE("canonical labels") {
    CHECK(canonicalize({2, 2, 1, 1}) == std::vector<int>{1, 1, 2, 2});
    CHECK(canonicalize({7, 3, 7, 9}) == std::vector<int>{1, 2, 1, 3});
    CHECK(canonicalize({}).empty());
    ClusterResult r;
    r.assignment = {1, 2, 1, 3};
    CHECK(r.partition() == std::vector<std::vector<int>>{{1, 3}, {2}, {4}});
}

TEST_CASE("two groups of subjects") {
    const auto tables = two_groups();
    const auto hp = scalar_hp(1.0, 1);
    const auto r = solve_clustering(tables, hp, ClusterSpec{2, 4});
    CHECK(r.assignment == std::vector<int>{1, 1, 2, 2});
    CHECK(r.partition() == std::vector<std::vector<int>>{{1, 2}, {3, 4}});
    CHECK(r.prototypes[0] == Dag(2, {0, make_set({1})}));
    CHECK(r.prototypes[1] == Dag(2, {make_set({2}), 0}));
    CHECK(r.certificate.status == Certificate::Status::proven_optimal);
    check_same(r, solve_clustering_brute_force(tables, hp, ClusterSpec{2, 4}));
    const auto j = to_json(r);
    CHECK(j.at("assignment") == nlohmann::json::array({1, 1, 2, 2}));
}

TEST_CASE("one cluster per subject") {
    // Distinct preferred DAGs, strong enough that no subject moves.
    const std::vector<ScoreTable> tables{make_table("a", 3, 2, {}, -10.0), make_table("b", 3, 2, {}, -10.0),
                                         make_table("c", 3, 2, {}, -10.0), make_table("d", 3, 2, {}, -10.0)};
    auto t = tables;
    const std::vector<std::vector<ParentSet>> want{{0, 0, 0}, {0, make_set({1}), 0}, {0, 0, make_set({2})}, {0, 0, make_set({1})}};
    for (std::size_t k = 0; k < 4; ++k)
        for (int i = 1; i <= 3; ++i) t[k].set(i, want[k][static_cast<std::size_t>(i - 1)], 0.0);
    const auto hp = scalar_hp(3.0, 2);
    const auto r = solve_clustering(t, hp, ClusterSpec{4, 4});
    CHECK(r.assignment == std::vector<int>{1, 2, 3, 4});
    for (std::size_t k = 0; k < 4; ++k) CHECK(r.subject_dags[k].parent_sets() == want[k]);
    check_same(r, solve_clustering_brute_force(t, hp, ClusterSpec{4, 4}));
}

TEST_CASE("cluster count is validated") {
    const auto tables = two_groups();
    CHECK_THROWS_AS(solve_clustering(tables, scalar_hp(1.0, 1), ClusterSpec{5, 4}), InputError);
    CHECK_THROWS_AS(solve_clustering(tables, scalar_hp(1.0, 1), ClusterSpec{0, 4}), InputError);
    CHECK_THROWS_AS(solve_clustering(tables, scalar_hp(1.0, 1), ClusterSpec{2, 3}), InputError);
}

TEST_CASE("random instances agree with the enumeration oracle") {
    std::mt19937_64 rng(67);
    for (int t = 0; t < 40; ++t) {
        const int p = 2 + t % 2;
        const int kk = 2 + t % 3;
        std::vector<ScoreTable> tables;
        for (int k = 0; k < kk; ++k) tables.push_back(mdag::testing::random_table(rng, "s" + std::to_string(k), p, p - 1, -5, 5, t % 5 == 0));
        const int l = 1 + t % kk;
        const auto hp = scalar_hp(std::uniform_real_distribution<double>(0, 5)(rng), p - 1);
        CAPTURE(t);
        const auto r = solve_clustering(tables, hp, ClusterSpec{l, kk});
        check_same(r, solve_clustering_brute_force(tables, hp, ClusterSpec{l, kk}));
        CHECK(canonicalize(r.assignment) == r.assignment);
    }
}
