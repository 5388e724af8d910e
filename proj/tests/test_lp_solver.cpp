#include <doctest.h>

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "mdag/lp_solver.hpp"

using namespace mdag;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Lp {
    std::vector<double> c, lo, hi;
    std::vector<LinearRow> rows;
};

// Best vertex over every choice of n tight constraints; nullopt when none is feasible.
std::optional<double> vertex_oracle(const Lp& lp) {
    const int n = static_cast<int>(lp.c.size());
    struct Plane {
        Eigen::VectorXd a;
        double b;
    };
    std::vector<Plane> planes;
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(j) = 1.0;
        planes.push_back({e, lp.lo[static_cast<std::size_t>(j)]});
        planes.push_back({e, lp.hi[static_cast<std::size_t>(j)]});
    }
    for (const auto& r : lp.rows) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        for (std::size_t t = 0; t < r.index.size(); ++t) a(r.index[t]) += r.value[t];
        if (std::isfinite(r.lower)) planes.push_back({a, r.lower});
        if (std::isfinite(r.upper)) planes.push_back({a, r.upper});
    }
    const int q = static_cast<int>(planes.size());
    std::optional<double> best;
    std::vector<int> pick(static_cast<std::size_t>(n));
    const auto visit = [&](auto&& self, int depth, int start) -> void {
        if (depth == n) {
            Eigen::MatrixXd m(n, n);
            Eigen::VectorXd b(n);
            for (int t = 0; t < n; ++t) {
                m.row(t) = planes[static_cast<std::size_t>(pick[static_cast<std::size_t>(t)])].a.transpose();
                b(t) = planes[static_cast<std::size_t>(pick[static_cast<std::size_t>(t)])].b;
            }
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
            if (lu.rank() < n) return;
            const Eigen::VectorXd x = lu.solve(b);
            for (int j = 0; j < n; ++j)
                if (x(j) < lp.lo[static_cast<std::size_t>(j)] - 1e-9 || x(j) > lp.hi[static_cast<std::size_t>(j)] + 1e-9) return;
            std::vector<double> xs(x.data(), x.data() + n);
            for (const auto& r : lp.rows) {
                const double v = r.activity(xs);
                if (v < r.lower - 1e-9 || v > r.upper + 1e-9) return;
            }
            double f = 0.0;
            for (int j = 0; j < n; ++j) f += lp.c[static_cast<std::size_t>(j)] * x(j);
            if (!best || f > *best) best = f;
            return;
        }
        for (int s = start; s < q; ++s) {
            pick[static_cast<std::size_t>(depth)] = s;
            self(self, depth + 1, s + 1);
        }
    };
    visit(visit, 0, 0);
    return best;
}

Lp random_lp(std::mt19937_64& rng, int n, int m) {
    std::uniform_int_distribution<int> coef(-3, 3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Lp lp;
    for (int j = 0; j < n; ++j) {
        lp.c.push_back(coef(rng));
        const double a = std::round(4 * u(rng)) / 2, b = std::round(4 * u(rng)) / 2;
        lp.lo.push_back(std::min(a, b));
        lp.hi.push_back(std::max(a, b) + 0.5);
    }
    for (int r = 0; r < m; ++r) {
        LinearRow row;
        for (int j = 0; j < n; ++j) {
            const int v = coef(rng);
            if (v != 0) {
                row.index.push_back(j);
                row.value.push_back(v);
            }
        }
        const double centre = std::round(4 * u(rng));
        switch (r % 3) {
            case 0: row.lower = -kInf; row.upper = centre; break;
            case 1: row.lower = centre - 1; row.upper = kInf; break;
            default: row.lower = centre - 1; row.upper = centre + 1; break;
        }
        lp.rows.push_back(row);
    }
    return lp;
}

DualSimplex make_solver(const Lp& lp) {
    DualSimplex s(lp.c, lp.lo, lp.hi);
    s.add_rows(lp.rows);
    return s;
}

void check_against_oracle(DualSimplex& s, const Lp& lp) {
    const auto status = s.solve(100000);
    const auto oracle = vertex_oracle(lp);
    if (!oracle) {
        CHECK(status == DualSimplex::Status::infeasible);
        return;
    }
    REQUIRE(status == DualSimplex::Status::optimal);
    CHECK(s.value() == doctest::Approx(*oracle).epsilon(1e-9));
    const auto x = s.solution();
    for (int j = 0; j < s.columns(); ++j) {
        CHECK(x[static_cast<std::size_t>(j)] >= lp.lo[static_cast<std::size_t>(j)] - 1e-9);
        CHECK(x[static_cast<std::size_t>(j)] <= lp.hi[static_cast<std::size_t>(j)] + 1e-9);
    }
    for (const auto& r : lp.rows) {
        CHECK(r.activity(x) >= r.lower - 1e-7);
        CHECK(r.activity(x) <= r.upper + 1e-7);
    }
    CHECK(s.dual_bound() >= *oracle - 1e-7);
    CHECK(s.dual_bound() == doctest::Approx(*oracle).epsilon(1e-7));
}

}  // namespace

TEST_CASE("textbook instance") {
    // max 3x + 2y, x + y <= 4, x + 3y <= 6, 0 <= x <= 3, 0 <= y <= 10
    DualSimplex s({3, 2}, {0, 0}, {3, 10});
    std::vector<LinearRow> rows{{{0, 1}, {1, 1}, -kInf, 4}, {{0, 1}, {1, 3}, -kInf, 6}};
    s.add_rows(rows);
    REQUIRE(s.solve(100) == DualSimplex::Status::optimal);
    CHECK(s.value() == doctest::Approx(11.0));
    CHECK(s.solution()[0] == doctest::Approx(3.0));
    CHECK(s.solution()[1] == doctest::Approx(1.0));
}

TEST_CASE("random programs agree with vertex enumeration") {
    std::mt19937_64 rng(17);
    int infeasible = 0;
    for (int t = 0; t < 400; ++t) {
        const int n = 2 + t % 3;
        const int m = 1 + t % 5;
        const Lp lp = random_lp(rng, n, m);
        CAPTURE(t);
        DualSimplex s = make_solver(lp);
        check_against_oracle(s, lp);
        infeasible += vertex_oracle(lp) ? 0 : 1;
    }
    CHECK(infeasible > 0);
}

TEST_CASE("warm start after bound changes and new rows") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 150; ++t) {
        const int n = 3 + t % 2;
        Lp lp = random_lp(rng, n, 2);
        CAPTURE(t);
        DualSimplex s = make_solver(lp);
        check_against_oracle(s, lp);
        // Fix one column, as branching does.
        const int j = t % n;
        const double v = lp.lo[static_cast<std::size_t>(j)];
        lp.hi[static_cast<std::size_t>(j)] = v;
        s.set_bounds(j, v, v);
        check_against_oracle(s, lp);
        // Then a cut.
        const Lp extra = random_lp(rng, n, 1);
        lp.rows.push_back(extra.rows.front());
        s.add_rows(std::span<const LinearRow>(&lp.rows.back(), 1));
        check_against_oracle(s, lp);
    }
}

TEST_CASE("forced bounds are valid") {
    std::mt19937_64 rng(29);
    for (int t = 0; t < 150; ++t) {
        const int n = 3;
        const Lp lp = random_lp(rng, n, 3);
        DualSimplex s = make_solver(lp);
        if (s.solve(1000) != DualSimplex::Status::optimal) continue;
        (void)s.dual_bound();
        for (int j = 0; j < n; ++j) {
            for (double v : {lp.lo[static_cast<std::size_t>(j)], lp.hi[static_cast<std::size_t>(j)]}) {
                Lp fixed = lp;
                fixed.lo[static_cast<std::size_t>(j)] = fixed.hi[static_cast<std::size_t>(j)] = v;
                const auto oracle = vertex_oracle(fixed);
                CAPTURE(t);
                if (oracle) CHECK(s.forced_bound(j, v) >= *oracle - 1e-7);
            }
        }
    }
}

TEST_CASE("columns can be added and slack rows removed") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 150; ++t) {
        Lp lp = random_lp(rng, 2 + t % 2, 4);
        CAPTURE(t);
        DualSimplex s = make_solver(lp);
        check_against_oracle(s, lp);

        std::vector<std::pair<int, double>> entries;
        for (int r = 0; r < static_cast<int>(lp.rows.size()); ++r) {
            const double v = std::uniform_int_distribution<int>(-2, 2)(rng);
            if (v == 0) continue;
            entries.emplace_back(r, v);
            lp.rows[static_cast<std::size_t>(r)].index.push_back(static_cast<int>(lp.c.size()));
            lp.rows[static_cast<std::size_t>(r)].value.push_back(v);
        }
        const double cost = std::uniform_int_distribution<int>(-2, 3)(rng);
        CHECK(s.add_column(cost, 0.0, 1.0, entries) == static_cast<int>(lp.c.size()));
        lp.c.push_back(cost);
        lp.lo.push_back(0.0);
        lp.hi.push_back(1.0);
        check_against_oracle(s, lp);
        if (!vertex_oracle(lp)) continue;

        const double before = s.value();
        std::vector<int> all(lp.rows.size());
        for (std::size_t r = 0; r < all.size(); ++r) all[r] = static_cast<int>(r);
        const auto map = s.remove_basic_rows(all);
        REQUIRE(map.size() == lp.rows.size());
        std::vector<LinearRow> kept;
        for (std::size_t r = 0; r < map.size(); ++r)
            if (map[r] >= 0) kept.push_back(lp.rows[r]);
        CHECK(s.rows() == static_cast<int>(kept.size()));
        lp.rows = kept;
        check_against_oracle(s, lp);
        CHECK(s.value() == doctest::Approx(before).epsilon(1e-9));
    }
}

TEST_CASE("identical inputs give identical iterates") {
    std::mt19937_64 rng(37);
    const Lp lp = random_lp(rng, 4, 5);
    DualSimplex a = make_solver(lp), b = make_solver(lp);
    a.solve(1000);
    b.solve(1000);
    CHECK(a.iterations() == b.iterations());
    for (int j = 0; j < 4; ++j) CHECK(a.solution()[static_cast<std::size_t>(j)] == b.solution()[static_cast<std::size_t>(j)]);
}
