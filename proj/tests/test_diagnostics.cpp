#include <doctest.h>

#include <random>
#include <sstream>

#include "mdag/diagnostics.hpp"
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

const SubjectNetwork kPair(2, {{1, 2}});

}  // namespace

TEST_CASE("two-subject lambda sweep") {
    const auto tables = mdag::testing::two_subject_instance();
    const std::vector<double> grid{0.5, 1.5, 3.0};
    const auto sweep = lambda_sweep(tables, scalar_hp(0, 0, 1), kPair, grid);
    REQUIRE(sweep.records.size() == 3);
    CHECK(sweep.parameter == "lambda");
    std::vector<int> xors, shds;
    for (const auto& r : sweep.records) {
        xors.push_back(r.total_xor);
        shds.push_back(r.total_shd);
    }
    CHECK(xors == std::vector<int>{2, 1, 0});
    CHECK(shds == std::vector<int>{1, 1, 0});
    CHECK(sweep.records[0].objective == doctest::Approx(4.0));
    CHECK(sweep.records[1].objective == doctest::Approx(2.5));
    CHECK(sweep.records[2].objective == doctest::Approx(2.0));
    CHECK(variability_point(sweep, DistanceMetric::xor_count) == 1);
    CHECK(variability_point(sweep, DistanceMetric::shd) == 2);
    CHECK(variability_point(sweep, DistanceMetric::shd, 0.0) == 2);

    const std::string csv = sweep_csv_string(sweep);
    CHECK(csv == "value,total_shd,total_xor,objective,partition\n"
                 "0.5,1,2,4,\"{{1,2}}\"\n1.5,1,1,2.5,\"{{1,2}}\"\n3,0,0,2,\"{{1,2}}\"\n");
    std::ostringstream out;
    write_sweep_csv(out, sweep);
    CHECK(out.str() == csv);
    const auto gp = gnuplot_script(sweep, DistanceMetric::xor_count, "sweep.csv", "sweep.png");
    CHECK(gp.find("'sweep.csv' using 1:3") != std::string::npos);
    CHECK(gp.find("sweep.png") != std::string::npos);
    CHECK(to_json(sweep).at("records").size() == 3);
}

TEST_CASE("grids are validated") {
    const auto tables = mdag::testing::two_subject_instance();
    const std::vector<double> empty, repeated{1.0, 1.0}, negative{-1.0};
    CHECK_THROWS_AS(lambda_sweep(tables, scalar_hp(0, 0, 1), kPair, empty), InputError);
    CHECK_THROWS_AS(lambda_sweep(tables, scalar_hp(0, 0, 1), kPair, repeated), InputError);
    CHECK_THROWS_AS(lambda_sweep(tables, scalar_hp(0, 0, 1), kPair, negative), InputError);
    CHECK_THROWS_AS(eta_sweep(tables, scalar_hp(1, 0, 1), empty), InputError);
}

TEST_CASE("sweep endpoints") {
    std::mt19937_64 rng(71);
    for (int t = 0; t < 15; ++t) {
        std::vector<ScoreTable> tables;
        for (int k = 0; k < 4; ++k) tables.push_back(mdag::testing::random_table(rng, "s" + std::to_string(k), 3, 2));
        const SubjectNetwork a(4, {{1, 2}, {2, 3}, {1, 4}});
        const double star = lambda_eta_star(tables);
        const std::vector<double> grid{0.0, star + 0.5};
        const auto sweep = lambda_sweep(tables, scalar_hp(0, 0, 2), a, grid);
        const auto ind = independent_estimates(tables);
        int shd = 0, xr = 0;
        for (const auto& [k, l] : a.edges()) {
            const auto d = distance(ind[static_cast<std::size_t>(k - 1)], ind[static_cast<std::size_t>(l - 1)]);
            shd += d.shd;
            xr += d.xor_count;
        }
        CHECK(sweep.records[0].total_shd == shd);
        CHECK(sweep.records[0].total_xor == xr);
        CHECK(sweep.records[0].dags == ind);
        CHECK(sweep.records[1].total_shd == 0);
        CHECK(sweep.records[1].total_xor == 0);
    }
}

TEST_CASE("eta sweep agrees with brute force") {
    const std::vector<ScoreTable> tables{
        make_table("s1", 2, 1, {{2, {1}, 1.0}}), make_table("s2", 2, 1, {{2, {1}, 2.0}}),
        make_table("s3", 2, 1, {{1, {2}, 2.0}}), make_table("s4", 2, 1, {{1, {2}, 3.0}})};
    const std::vector<double> grid{0.25, 0.5, 0.8, 1.2, 2.0};
    const auto base = scalar_hp(10.0, 0.0, 1);
    const auto sweep = eta_sweep(tables, base, grid);
    CHECK(sweep.parameter == "eta");
    for (std::size_t g = 0; g < grid.size(); ++g) {
        auto hp = base;
        hp.eta = DensityReward(grid[g]);
        const auto brute = solve_brute_force(tables, hp, SolveMode::joint());
        CHECK(sweep.records[g].dags == brute.dags);
        CHECK(sweep.records[g].network == brute.network);
        CHECK(sweep.records[g].partition == brute.network.components());
    }
    CHECK(sweep.records.back().partition == std::vector<std::vector<int>>{{1, 2, 3, 4}});
}

TEST_CASE("sweep output does not depend on threads") {
    std::mt19937_64 rng(73);
    std::vector<ScoreTable> tables;
    for (int k = 0; k < 3; ++k) tables.push_back(mdag::testing::random_table(rng, "s" + std::to_string(k), 3, 2));
    const std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
    SweepOptions one, three;
    three.threads = 3;
    const SubjectNetwork a(3, {{1, 2}, {2, 3}});
    CHECK(sweep_csv_string(lambda_sweep(tables, scalar_hp(0, 0, 2), a, grid, one)) ==
          sweep_csv_string(lambda_sweep(tables, scalar_hp(0, 0, 2), a, grid, three)));
    CHECK(to_json(eta_sweep(tables, scalar_hp(1, 0, 2), grid, one)).dump() ==
          to_json(eta_sweep(tables, scalar_hp(1, 0, 2), grid, three)).dump());
}

TEST_CASE("log score comparison") {
    const auto tables = mdag::testing::two_subject_instance();
    const std::vector<ComparisonSetting> settings{
        {"free", scalar_hp(1.5, 0, 1), SolveMode::fixed(kPair), false},
        {"identical", scalar_hp(1.5, 0, 1), SolveMode::fixed(kPair), true}};
    const auto rows = log_score_comparison(tables, settings, 1);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].objective == doctest::Approx(2.5));
    CHECK(rows[1].objective == doctest::Approx(2.0));
    CHECK(rows[0].difference == doctest::Approx(0.5));
    CHECK(rows[1].difference == 0.0);
    const auto self = log_score_comparison(tables, std::span(settings.data(), 1));
    CHECK(self[0].difference == 0.0);
    CHECK_THROWS_AS(log_score_comparison(tables, settings, 2), InputError);
}
