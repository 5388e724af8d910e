#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "heuristics.hpp"
#include "mdag/errors.hpp"
#include "mdag/lp_solver.hpp"
#include "search.hpp"

namespace mdag::detail {

namespace {

constexpr long kLpIterationLimit = 2'000'000;
constexpr int kPricingRounds = 1000;
constexpr double kPriceTol = 1e-7;
constexpr int kRootCutRounds = 200;
constexpr int kNodeCutRounds = 10;
constexpr int kCutAge = 5;
constexpr int kTailRounds = 5;

using Options = std::vector<std::vector<std::pair<ParentSet, double>>>;

// Best DAG over a set of per-node options by dynamic programming over
// topological orders, with the best DAG containing a given option on demand.
class OrderDp {
public:
    void run(int p, const Options& options) {
        p_ = p;
        const std::size_t n = std::size_t{1} << p;
        full_ = static_cast<ParentSet>(n - 1);
        best_.assign(static_cast<std::size_t>(p) * n, kNegInf);
        arg_.assign(static_cast<std::size_t>(p) * n, 0);
        for (int i = 0; i < p; ++i) {
            double* b = &best_[static_cast<std::size_t>(i) * n];
            ParentSet* a = &arg_[static_cast<std::size_t>(i) * n];
            for (const auto& [mask, value] : options[static_cast<std::size_t>(i)]) {
                if (value > b[mask]) {
                    b[mask] = value;
                    a[mask] = mask;
                }
            }
            for (int bit = 0; bit < p; ++bit) {
                const std::size_t m = std::size_t{1} << bit;
                for (std::size_t s = 0; s < n; ++s) {
                    if ((s & m) && b[s ^ m] > b[s]) {
                        b[s] = b[s ^ m];
                        a[s] = a[s ^ m];
                    }
                }
            }
        }
        f_.assign(n, kNegInf);
        sink_.assign(n, -1);
        f_[0] = 0.0;
        for (std::size_t s = 1; s < n; ++s) {
            for (int i = 0; i < p; ++i) {
                const std::size_t m = std::size_t{1} << i;
                if (!(s & m)) continue;
                const double v = f_[s ^ m] + best_[static_cast<std::size_t>(i) * n + (s ^ m)];
                if (v > f_[s]) {
                    f_[s] = v;
                    sink_[s] = i;
                }
            }
        }
        have_tail_ = false;
    }

    double best() const { return f_[full_]; }

    std::vector<ParentSet> argmax() const {
        const std::size_t n = std::size_t{1} << p_;
        std::vector<ParentSet> out(static_cast<std::size_t>(p_), 0);
        std::size_t s = full_;
        while (s) {
            const int i = sink_[s];
            s ^= std::size_t{1} << i;
            out[static_cast<std::size_t>(i)] = arg_[static_cast<std::size_t>(i) * n + s];
        }
        return out;
    }

    // Best total with node i (0-based) taking exactly `mask` at `value`.
    double forced(int i, ParentSet mask, double value) {
        if (!have_tail_) tail();
        const ParentSet free = full_ & ~mask & ~(ParentSet{1} << i);
        double out = kNegInf;
        ParentSet sub = free;
        while (true) {
            const ParentSet s = mask | sub;
            out = std::max(out, f_[s] + r_[s | (ParentSet{1} << i)]);
            if (sub == 0) break;
            sub = (sub - 1) & free;
        }
        return out + value;
    }

private:
    void tail() {
        const std::size_t n = std::size_t{1} << p_;
        r_.assign(n, kNegInf);
        r_[full_] = 0.0;
        for (std::size_t t = n - 1; t-- > 0;) {
            for (int u = 0; u < p_; ++u) {
                const std::size_t m = std::size_t{1} << u;
                if (t & m) continue;
                r_[t] = std::max(r_[t], best_[static_cast<std::size_t>(u) * n + t] + r_[t | m]);
            }
        }
        have_tail_ = true;
    }

    int p_ = 0;
    ParentSet full_ = 0;
    std::vector<double> best_;
    std::vector<ParentSet> arg_;
    std::vector<double> f_;
    std::vector<double> r_;
    std::vector<int> sink_;
    bool have_tail_ = false;
};

// Columns of the master are whole DAGs of one vertex, the links z and one
// penalty D per (pair, node). D is tied to the DAG columns by transport cuts
// generated on demand; the slot rows become one convexity row per vertex.
class BranchAndPrice final : public TreeSearch {
public:
    BranchAndPrice(const IlpModel& model, const SolveLimits& limits)
        : TreeSearch(model, limits), lp_({}, {}, {}), dp_(static_cast<std::size_t>(model.problem().vertices())) {
        const auto& vars = model.variables();
        const int vertices = problem_.vertices();
        const bool fixed = problem_.mode().kind == SolveMode::Kind::fixed_network;
        link_col_.assign(vars.size(), -1);
        xrows_.resize(vars.size());
        for (std::size_t j = 0; j < vars.size(); ++j) {
            if (vars[j].kind != VariableKind::link) continue;
            link_col_[j] = static_cast<int>(statics_.size());
            statics_.push_back({static_cast<int>(j), vars[j].objective, 0.0, 1.0, {}});
        }
        for (const auto& pair : problem_.candidate_pairs()) {
            const int z = model.link(pair.first, pair.second);
            if (!fixed && z < 0) continue;
            for (int i = 1; i <= problem_.p(); ++i) {
                double dmax = 0.0;
                for (int j = 1; j <= problem_.p(); ++j) {
                    if (j != i) dmax += problem_.lambda(pair.first, pair.second, j, i);
                }
                if (!(dmax > 0.0)) continue;
                penalties_.push_back({pair.first, pair.second, i, z, static_cast<int>(statics_.size())});
                statics_.push_back({-1, -1.0, 0.0, dmax, {}});
            }
        }
        std::vector<double> f, lo, hi;
        for (const auto& c : statics_) {
            f.push_back(c.objective);
            lo.push_back(c.lower);
            hi.push_back(c.upper);
        }
        lp_ = DualSimplex(f, lo, hi);

        std::vector<LinearRow> rows;
        for (const auto& row : model.rows()) {
            const bool links_only = std::all_of(row.index.begin(), row.index.end(), [&](int j) {
                return link_col_[static_cast<std::size_t>(j)] >= 0;
            });
            if (!links_only) continue;
            LinearRow m;
            m.lower = row.lower;
            m.upper = row.upper;
            for (std::size_t t = 0; t < row.index.size(); ++t) {
                const int c = link_col_[static_cast<std::size_t>(row.index[t])];
                m.index.push_back(c);
                m.value.push_back(row.value[t]);
                statics_[static_cast<std::size_t>(c)].entries.emplace_back(static_cast<int>(rows.size()), row.value[t]);
            }
            rows.push_back(std::move(m));
        }
        conv_row0_ = static_cast<int>(rows.size());
        for (int v = 0; v < vertices; ++v) {
            LinearRow conv;
            conv.lower = conv.upper = 1.0;
            rows.push_back(std::move(conv));
        }
        first_cut_row_ = static_cast<int>(rows.size());
        lp_.add_rows(rows);
        y_.assign(rows.size(), 0.0);
        age_.assign(rows.size(), 0);
    }

private:
    struct StaticColumn {
        int model_var;  // -1 for a penalty column
        double objective;
        double lower;
        double upper;
        std::vector<std::pair<int, double>> entries;
    };
    struct Penalty {
        int k, l, node, z, col;
    };
    struct Column {
        int vertex = 0;
        std::vector<int> xvars;
        int lp = 0;
    };

    long lp_iterations() const override { return lp_.iterations(); }

    void start() override {
        std::vector<Dag> seeds = independent_dags(problem_);
        const auto& inc = incumbent().dags;
        for (std::size_t t = 0; t < seeds.size(); ++t) add_column(static_cast<int>(t) + 1, seeds[t].parent_sets());
        for (std::size_t t = 0; t < inc.size(); ++t) add_column(static_cast<int>(t) + 1, inc[t].parent_sets());
    }

    int xvar(int v, int i, ParentSet mask) const {
        for (int x : model_.slot(v, i)) {
            if (model_.variables()[static_cast<std::size_t>(x)].parents == mask) return x;
        }
        return -1;
    }

    bool allowed(const Column& c) const {
        for (int x : c.xvars) {
            if (hi_[static_cast<std::size_t>(x)] < 0.5) return false;
        }
        return true;
    }

    // False when a parent set was dropped by presolve or the DAG is present.
    bool add_column(int v, const std::vector<ParentSet>& parents) {
        Column c;
        c.vertex = v;
        double objective = 0.0;
        std::map<int, double> entries;
        entries[conv_row0_ + v - 1] = 1.0;
        for (int i = 1; i <= problem_.p(); ++i) {
            const int x = xvar(v, i, parents[static_cast<std::size_t>(i - 1)]);
            if (x < 0) return false;
            c.xvars.push_back(x);
            objective += model_.variables()[static_cast<std::size_t>(x)].objective;
            for (const auto& [r, val] : xrows_[static_cast<std::size_t>(x)]) entries[r] += val;
        }
        if (!seen_.insert(c.xvars).second) return false;
        const bool ok = lo_.empty() || allowed(c);
        c.lp = lp_.add_column(objective, 0.0, ok ? 1.0 : 0.0, {entries.begin(), entries.end()});
        columns_.push_back(std::move(c));
        return true;
    }

    double reduced_objective(int x) const {
        double v = model_.variables()[static_cast<std::size_t>(x)].objective;
        for (const auto& [r, val] : xrows_[static_cast<std::size_t>(x)]) v -= y_[static_cast<std::size_t>(r)] * val;
        return v;
    }

    Options vertex_options(int v) const {
        Options opts(static_cast<std::size_t>(problem_.p()));
        for (int i = 1; i <= problem_.p(); ++i) {
            for (int x : model_.slot(v, i)) {
                if (hi_[static_cast<std::size_t>(x)] < 0.5) continue;
                opts[static_cast<std::size_t>(i - 1)].emplace_back(model_.variables()[static_cast<std::size_t>(x)].parents,
                                                                    reduced_objective(x));
            }
        }
        return opts;
    }

    double static_lower(std::size_t c) const {
        const int j = statics_[c].model_var;
        return j < 0 ? statics_[c].lower : lo_[static_cast<std::size_t>(j)];
    }
    double static_upper(std::size_t c) const {
        const int j = statics_[c].model_var;
        return j < 0 ? statics_[c].upper : hi_[static_cast<std::size_t>(j)];
    }
    double static_rc(std::size_t c) const {
        double rc = statics_[c].objective;
        for (const auto& [r, val] : statics_[c].entries) rc -= y_[static_cast<std::size_t>(r)] * val;
        return rc;
    }
    double static_term(std::size_t c) const {
        const double rc = static_rc(c);
        return rc > 0.0 ? rc * static_upper(c) : rc * static_lower(c);
    }

    // Runs the pricing DP of every vertex under y_ and returns the Lagrangian bound.
    double price() {
        double bound = model_.objective_constant();
        for (int r = 0; r < static_cast<int>(y_.size()); ++r) {
            if (r >= conv_row0_ && r < first_cut_row_) continue;
            const double y = y_[static_cast<std::size_t>(r)];
            if (y > 0.0) bound += y * lp_.row_upper(r);
            else if (y < 0.0) bound += y * lp_.row_lower(r);
        }
        for (std::size_t c = 0; c < statics_.size(); ++c) bound += static_term(c);
        for (int v = 1; v <= problem_.vertices(); ++v) {
            auto& dp = dp_[static_cast<std::size_t>(v - 1)];
            dp.run(problem_.p(), vertex_options(v));
            bound += dp.best();
        }
        return bound;
    }

    std::vector<double> aggregate() const {
        std::vector<double> x(model_.variables().size(), 0.0);
        const auto w = lp_.solution();
        for (std::size_t c = 0; c < statics_.size(); ++c) {
            if (statics_[c].model_var >= 0) x[static_cast<std::size_t>(statics_[c].model_var)] = w[c];
        }
        for (const auto& c : columns_) {
            const double wc = w[static_cast<std::size_t>(c.lp)];
            if (wc <= 0.0) continue;
            for (int xv : c.xvars) x[static_cast<std::size_t>(xv)] += wc;
        }
        return x;
    }

    void update_ages() {
        for (int r = first_cut_row_; r < static_cast<int>(y_.size()); ++r) {
            auto& a = age_[static_cast<std::size_t>(r)];
            a = (lp_.row_is_basic(r) && y_[static_cast<std::size_t>(r)] == 0.0) ? a + 1 : 0;
        }
    }

    void purge() {
        std::vector<int> old;
        for (int r = first_cut_row_; r < static_cast<int>(age_.size()); ++r) {
            if (age_[static_cast<std::size_t>(r)] >= kCutAge) old.push_back(r);
        }
        if (old.empty()) return;
        const auto map = lp_.remove_basic_rows(old);
        const auto remap = [&](std::vector<std::pair<int, double>>& list) {
            std::vector<std::pair<int, double>> kept;
            for (const auto& [r, v] : list) {
                const int nr = map[static_cast<std::size_t>(r)];
                if (nr >= 0) kept.emplace_back(nr, v);
            }
            list = std::move(kept);
        };
        for (auto& list : xrows_) remap(list);
        for (auto& c : statics_) remap(c.entries);
        std::vector<double> y;
        std::vector<int> age;
        for (std::size_t r = 0; r < map.size(); ++r) {
            if (map[r] < 0) continue;
            y.push_back(y_[r]);
            age.push_back(age_[r]);
        }
        y_ = std::move(y);
        age_ = std::move(age);
    }

    int separate(std::span<const double> x) {
        const bool fixed = problem_.mode().kind == SolveMode::Kind::fixed_network;
        const auto w = lp_.solution();
        std::vector<LinearRow> rows;
        std::vector<double> coef(model_.variables().size(), 0.0);
        for (const auto& pen : penalties_) {
            const auto pot = model_.transport_potential(pen.k, pen.l, pen.node, x, true,
                                                        w[static_cast<std::size_t>(pen.col)] + 1e-9);
            if (!pot) continue;
            const double zval = fixed ? 1.0 : x[static_cast<std::size_t>(pen.z)];
            const double violation = pot->gain - pot->range * (1.0 - zval) - w[static_cast<std::size_t>(pen.col)];
            if (violation <= 1e-6 * (1.0 + std::abs(pot->gain))) continue;
            const int r = static_cast<int>(y_.size() + rows.size());
            LinearRow m;
            m.index.push_back(pen.col);
            m.value.push_back(1.0);
            statics_[static_cast<std::size_t>(pen.col)].entries.emplace_back(r, 1.0);
            m.lower = 0.0;
            if (!fixed) {
                const int zc = link_col_[static_cast<std::size_t>(pen.z)];
                m.index.push_back(zc);
                m.value.push_back(-pot->range);
                statics_[static_cast<std::size_t>(zc)].entries.emplace_back(r, -pot->range);
                m.lower = -pot->range;
            }
            m.upper = std::numeric_limits<double>::infinity();
            for (const auto& [u, c] : pot->terms) {
                xrows_[static_cast<std::size_t>(u)].emplace_back(r, c);
                coef[static_cast<std::size_t>(u)] = c;
            }
            for (const auto& col : columns_) {
                if (col.vertex != pen.k && col.vertex != pen.l) continue;
                const double a = coef[static_cast<std::size_t>(col.xvars[static_cast<std::size_t>(pen.node - 1)])];
                if (a != 0.0) {
                    m.index.push_back(col.lp);
                    m.value.push_back(a);
                }
            }
            for (const auto& [u, c] : pot->terms) coef[static_cast<std::size_t>(u)] = 0.0;
            rows.push_back(std::move(m));
        }
        lp_.add_rows(rows);
        y_.resize(y_.size() + rows.size(), 0.0);
        age_.resize(y_.size(), 0);
        return static_cast<int>(rows.size());
    }

    Relaxation relax(Node& node, bool root) override {
        Relaxation out;
        for (std::size_t c = 0; c < statics_.size(); ++c) {
            lp_.set_bounds(static_cast<int>(c), static_lower(c), static_upper(c));
        }
        std::vector<char> covered(static_cast<std::size_t>(problem_.vertices()), 0);
        for (const auto& c : columns_) {
            const bool ok = allowed(c);
            lp_.set_bounds(c.lp, 0.0, ok ? 1.0 : 0.0);
            if (ok) covered[static_cast<std::size_t>(c.vertex - 1)] = 1;
        }
        for (int v = 1; v <= problem_.vertices(); ++v) {
            if (covered[static_cast<std::size_t>(v - 1)]) continue;
            auto& dp = dp_[static_cast<std::size_t>(v - 1)];
            dp.run(problem_.p(), vertex_options(v));
            if (dp.best() == kNegInf) {
                out.feasible = false;
                return out;
            }
            add_column(v, dp.argmax());
        }

        out.bound = std::numeric_limits<double>::infinity();
        double last_bound = out.bound;
        std::vector<double> history;
        const int max_cut_rounds = root ? kRootCutRounds : kNodeCutRounds;
        for (int cut_round = 0;; ++cut_round) {
            bool converged = false;
            for (int round = 0; round < kPricingRounds; ++round) {
                const auto status = lp_.solve(kLpIterationLimit);
                if (status == DualSimplex::Status::infeasible) {
                    out.feasible = false;
                    return out;
                }
                if (status != DualSimplex::Status::optimal) break;
                y_ = lp_.row_duals();
                last_bound = price();
                out.bound = std::min(out.bound, last_bound);
                if (out.bound < cutoff()) return out;
                int added = 0;
                for (int v = 1; v <= problem_.vertices(); ++v) {
                    const auto& dp = dp_[static_cast<std::size_t>(v - 1)];
                    const double rc = dp.best() - y_[static_cast<std::size_t>(conv_row0_ + v - 1)];
                    if (rc > kPriceTol * (1.0 + std::abs(dp.best())) && add_column(v, dp.argmax())) ++added;
                }
                if (added == 0) {
                    converged = true;
                    break;
                }
            }
            if (!converged) return out;
            update_ages();
            out.x = aggregate();
            history.push_back(out.bound);
            if (cut_round >= max_cut_rounds) break;
            if (history.size() > static_cast<std::size_t>(kTailRounds) &&
                history[history.size() - 1 - kTailRounds] - out.bound <= 1e-6 * (1.0 + std::abs(out.bound))) {
                break;
            }
            purge();
            const int added = separate(out.x);
            stats_.cuts += added;
            if (added == 0) break;
        }
        out.solved = true;
        const auto w = lp_.solution();
        std::vector<int> heaviest(static_cast<std::size_t>(problem_.vertices()), -1);
        for (std::size_t t = 0; t < columns_.size(); ++t) {
            const auto& c = columns_[t];
            const double wc = w[static_cast<std::size_t>(c.lp)];
            if (wc <= 0.0) continue;
            int& h = heaviest[static_cast<std::size_t>(c.vertex - 1)];
            if (h < 0 || wc > w[static_cast<std::size_t>(columns_[static_cast<std::size_t>(h)].lp)]) h = static_cast<int>(t);
        }
        std::vector<Dag> dags;
        for (int h : heaviest) {
            std::vector<ParentSet> ps;
            for (int x : columns_[static_cast<std::size_t>(h)].xvars) {
                ps.push_back(model_.variables()[static_cast<std::size_t>(x)].parents);
            }
            dags.emplace_back(problem_.p(), ps);
        }
        offer_dags(std::move(dags), !is_integral(out.x));
        if (out.bound < cutoff()) return out;

        // Reduced-cost fixing with the last duals.
        for (int v = 1; v <= problem_.vertices(); ++v) {
            auto& dp = dp_[static_cast<std::size_t>(v - 1)];
            const double rest = last_bound - dp.best();
            for (int i = 1; i <= problem_.p(); ++i) {
                for (int x : model_.slot(v, i)) {
                    const auto ux = static_cast<std::size_t>(x);
                    if (hi_[ux] < 0.5 || lo_[ux] > 0.5) continue;
                    const double forced = dp.forced(i - 1, model_.variables()[ux].parents, reduced_objective(x));
                    if (rest + forced < cutoff()) fix(node, x, 0, root);
                }
            }
        }
        for (std::size_t c = 0; c < statics_.size(); ++c) {
            const int j = statics_[c].model_var;
            if (j < 0 || lo_[static_cast<std::size_t>(j)] == hi_[static_cast<std::size_t>(j)]) continue;
            const double rest = last_bound - static_term(c);
            if (rest + static_rc(c) < cutoff()) fix(node, j, 0, root);
            else if (rest < cutoff()) fix(node, j, 1, root);
        }
        return out;
    }

    DualSimplex lp_;
    std::vector<OrderDp> dp_;
    std::vector<StaticColumn> statics_;
    std::vector<Penalty> penalties_;
    std::vector<int> link_col_;
    std::vector<std::vector<std::pair<int, double>>> xrows_;
    int conv_row0_ = 0;
    int first_cut_row_ = 0;
    std::vector<double> y_;
    std::vector<int> age_;
    std::vector<Column> columns_;
    std::set<std::vector<int>> seen_;
};

}  // namespace

MapEstimate branch_and_price(const IlpModel& model, const SolveLimits& limits) {
    if (model.problem().p() > kColumnGenerationMaxP) {
        throw CapacityError("column generation supports at most " + std::to_string(kColumnGenerationMaxP) + " nodes");
    }
    return BranchAndPrice(model, limits).run();
}

}  // namespace mdag::detail
