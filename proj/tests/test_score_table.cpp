#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "mdag/errors.hpp"
#include "mdag/score_table.hpp"
#include "mdag/synthetic.hpp"
#include "mdag/text_format.hpp"
#include "test_support.hpp"

using namespace mdag;

namespace {

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

void check_identical(const ScoreTable& a, const ScoreTable& b) {
    REQUIRE(a.p() == b.p());
    REQUIRE(a.d_max() == b.d_max());
    CHECK(a.subject() == b.subject());
    for (int i = 1; i <= a.p(); ++i) {
        REQUIRE(a.entries(i).size() == b.entries(i).size());
        for (std::size_t e = 0; e < a.entries(i).size(); ++e) {
            CHECK(a.entries(i)[e].parents == b.entries(i)[e].parents);
            CHECK(bits(a.entries(i)[e].score) == bits(b.entries(i)[e].score));
        }
    }
}

TimeSeries small_series() {
    SyntheticSpec spec;
    spec.p = 4;
    spec.k_subjects = 1;
    spec.n_steps = 30;
    spec.seed = 4;
    return generate(spec).series.front();
}

}  // namespace

TEST_CASE("key counts") {
    CHECK(admissible_key_count(3, 2) == 12);
    CHECK(admissible_key_count(10, 3) == 10 * (1 + 9 + 36 + 84));
    CHECK(admissible_key_count(4, 0) == 4);
    CHECK(admissible_parent_sets(3, 2, 1) == std::vector<ParentSet>{0, make_set({1}), make_set({3})});
    ScoreTable t("s", 5, 2);
    std::size_t n = 0;
    for (int i = 1; i <= 5; ++i) n += t.entries(i).size();
    CHECK(n == admissible_key_count(5, 2));
}

TEST_CASE("binomial penalty and the d_max sentinel") {
    CHECK(log_binomial(10, 3) == doctest::Approx(std::log(120.0)));
    CHECK(log_binomial(7, 0) == 0.0);
    const TimeSeries ts = small_series();
    DlmConfig c;
    c.delta_grid.clear();
    const ScoreTable t = build_score_table(ts, 2, c, 1);
    for (int i = 1; i <= 4; ++i) {
        for (const auto& e : t.entries(i)) {
            const double raw = node_log_evidence(ts, i, e.parents, c);
            CHECK(e.score == doctest::Approx(raw - log_binomial(4, set_size(e.parents))).epsilon(1e-14));
        }
        CHECK(t.score(i, 0) == node_log_evidence(ts, i, 0, c));
    }
    CHECK(t.score(1, make_set({2, 3, 4})) == kNegInf);
    CHECK_THROWS_AS(t.score(1, make_set({1})), InputError);
    CHECK_THROWS_AS(build_score_table(ts, 4, c, 1), InputError);
}

TEST_CASE("scores do not depend on the thread count") {
    const TimeSeries ts = small_series();
    const ScoreTable one = build_score_table(ts, 3, DlmConfig{}, 1);
    const ScoreTable four = build_score_table(ts, 3, DlmConfig{}, 4);
    check_identical(one, four);
    CHECK(score_cache_string(one) == score_cache_string(four));
}

TEST_CASE("cache round trip is bit exact") {
    SUBCASE("single variable") {
        ScoreTable t("solo", 1, 0);
        t.set(1, 0, -1.25);
        check_identical(t, cache_roundtrip(t));
    }
    SUBCASE("random table") {
        std::mt19937_64 rng(21);
        for (int rep = 0; rep < 10; ++rep) {
            ScoreTable t = mdag::testing::random_table(rng, "r" + std::to_string(rep), 5, 2);
            // Awkward values: subnormal, huge, explicit -inf, negative zero.
            t.set(1, 0, 4.9406564584124654e-324);
            t.set(2, 0, -1.7976931348623157e308);
            t.set(3, make_set({1}), kNegInf);
            t.set(4, 0, -0.0);
            t.variables = {"a", "b", "c", "d", "e"};
            t.metadata = {{"note", "x"}};
            const ScoreTable back = cache_roundtrip(t);
            check_identical(t, back);
            CHECK(back.variables == t.variables);
            CHECK(back.metadata == t.metadata);
            CHECK(score_cache_string(back) == score_cache_string(t));
        }
    }
}

TEST_CASE("malformed caches are rejected with line context") {
    const std::string head = "# mdag-score-cache 1\n# subject s\n# p 2\n# d_max 1\n";
    const std::string body = "s\t1\t0\t0\ns\t1\t2\t-1\ns\t2\t0\t0\ns\t2\t1\t1\n";
    {
        std::istringstream in(head + body);
        CHECK(read_score_cache(in, "ok").score(1, make_set({2})) == -1.0);
    }
    const auto rejects = [](const std::string& text, const std::string& needle) {
        std::istringstream in(text);
        try {
            read_score_cache(in, "bad.scores");
            FAIL("accepted: " << text);
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    rejects("# mdag-score-cache 1\n# subject s\n# p 3\n# d_max 1\ns\t1\t6\t0\n", "bad.scores:5");
    rejects(head + "s\t1\t0\tabc\n", "bad.scores:5");
    rejects(head + body + "s\t2\t1\t2\n", "bad.scores:9");
    rejects(head + "s\t1\t0\t0\n", "missing");
    rejects("# subject s\n", "bad.scores");
    rejects(head + "t\t1\t0\t0\n", "bad.scores:5");
}

TEST_CASE("multiplicity-only table") {
    const ScoreTable t = multiplicity_only_table("proto", 4, 2);
    CHECK(t.score(2, 0) == 0.0);
    CHECK(t.score(2, make_set({1, 3})) == doctest::Approx(-std::log(6.0)));
    CHECK(t.score(2, make_set({1, 3, 4})) == kNegInf);
}

TEST_CASE("dag score and validation") {
    const auto tables = mdag::testing::two_subject_instance();
    CHECK(tables[0].dag_score(Dag(2, {0, make_set({1})})) == 1.0);
    CHECK(tables[1].dag_score(Dag(2, {make_set({2}), 0})) == 4.0);
    ScoreTable partial("s", 2, 1);
    partial.set(1, 0, 0.0);
    CHECK_FALSE(partial.complete());
    CHECK_THROWS_AS(partial.validate(), InputError);
    ScoreTable dead("s", 1, 0);
    dead.set(1, 0, kNegInf);
    CHECK_THROWS_AS(dead.validate(), InputError);
}

TEST_CASE("time series csv and manifest") {
    std::istringstream csv("A,B\n1,2\n3,4.5\n");
    const TimeSeries ts = read_time_series_csv(csv, "s", "mem");
    CHECK(ts.n_steps() == 2);
    CHECK(ts.p() == 2);
    CHECK(ts.values(1, 1) == 4.5);
    std::ostringstream out;
    write_time_series_csv(out, ts);
    std::istringstream again(out.str());
    CHECK(read_time_series_csv(again, "s", "mem").values == ts.values);
    std::istringstream bad("A,B\n1\n");
    CHECK_THROWS_AS(read_time_series_csv(bad, "s", "mem"), ParseError);
    std::istringstream nan("A\nnan\n");
    CHECK_THROWS_AS(read_time_series_csv(nan, "s", "mem"), ParseError);

    const auto dir = std::filesystem::temp_directory_path() / "mdag_manifest_test";
    std::filesystem::create_directories(dir);
    write_file_atomically(dir / "m.csv", "subject,path\nx,x.csv\ny,sub/y.csv\n");
    const auto entries = read_manifest(dir / "m.csv");
    REQUIRE(entries.size() == 2);
    CHECK(entries[1].subject == "y");
    CHECK(entries[1].path == dir / "sub/y.csv");
    write_file_atomically(dir / "dup.csv", "subject,path\nx,a.csv\nx,b.csv\n");
    CHECK_THROWS_AS(read_manifest(dir / "dup.csv"), ParseError);
    CHECK_THROWS_AS(validate_subject_id("a b"), InputError);
    std::filesystem::remove_all(dir);
}
