#include "mdag/ilp_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdag/errors.hpp"

namespace mdag {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kExactSeparationLimit = 16;

// e[k,j,i] as a linear expression: sum of the x in slot (k,i) whose set holds j.
void append_membership(LinearRow& row, const IlpModel& m, int k, int i, int j, double coefficient) {
    for (int v : m.slot(k, i)) {
        if (contains(m.variables()[static_cast<std::size_t>(v)].parents, j)) {
            row.index.push_back(v);
            row.value.push_back(coefficient);
        }
    }
}

// Optimal transport of mu onto nu (same total) under cost c (row-major
// |mu| x |nu|, nonnegative) by successive shortest paths. Returns -psi, the
// negated dual of the nu side, so that min_t c(., t) - psi_t is a potential.
// Paths use Bellman-Ford so rounding never traps the search in a cycle.
std::vector<double> transport_shifts(const std::vector<double>& mu, const std::vector<double>& nu,
                                     const std::vector<double>& c) {
    constexpr double eps = 1e-12;
    const std::size_t na = mu.size();
    const std::size_t nb = nu.size();
    const std::size_t n = na + nb;
    std::vector<double> supply = mu;
    std::vector<double> demand = nu;
    std::vector<double> flow(na * nb, 0.0);
    std::vector<double> dist(n);
    std::vector<int> prev(n);

    // Shortest residual distances from every node with dist 0 at the start.
    const auto shortest = [&](auto&& is_source) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(prev.begin(), prev.end(), -1);
        for (std::size_t v = 0; v < n; ++v) {
            if (is_source(v)) dist[v] = 0.0;
        }
        for (std::size_t round = 0; round < n; ++round) {
            bool changed = false;
            for (std::size_t s = 0; s < na; ++s) {
                for (std::size_t t = 0; t < nb; ++t) {
                    const double cost = c[s * nb + t];
                    if (dist[s] < kInf && dist[s] + cost < dist[na + t] - eps) {
                        dist[na + t] = dist[s] + cost;
                        prev[na + t] = static_cast<int>(s);
                        changed = true;
                    }
                    if (flow[s * nb + t] > eps && dist[na + t] < kInf && dist[na + t] - cost < dist[s] - eps) {
                        dist[s] = dist[na + t] - cost;
                        prev[s] = static_cast<int>(na + t);
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
    };

    for (std::size_t guard = 0; guard < 4 * n * n; ++guard) {
        shortest([&](std::size_t v) { return v < na && supply[v] > eps; });
        std::size_t sink = n;
        for (std::size_t t = 0; t < nb; ++t) {
            if (demand[t] > eps && dist[na + t] < kInf && (sink == n || dist[na + t] < dist[sink])) sink = na + t;
        }
        if (sink == n) break;
        std::vector<std::size_t> path{sink};
        while (prev[path.back()] >= 0 && path.size() <= n) path.push_back(static_cast<std::size_t>(prev[path.back()]));
        const std::size_t source = path.back();
        if (path.size() > n || source >= na || supply[source] <= eps) break;
        double amount = std::min(demand[sink - na], supply[source]);
        for (std::size_t e = 0; e + 1 < path.size(); ++e) {
            if (path[e] < na) amount = std::min(amount, flow[path[e] * nb + (path[e + 1] - na)]);
        }
        if (amount <= eps) break;
        for (std::size_t e = 0; e + 1 < path.size(); ++e) {
            const std::size_t to = path[e];
            const std::size_t from = path[e + 1];
            if (from < na) flow[from * nb + (to - na)] += amount;
            else flow[to * nb + (from - na)] -= amount;
        }
        supply[source] -= amount;
        demand[sink - na] -= amount;
    }
    shortest([](std::size_t) { return true; });
    std::vector<double> shift(nb);
    for (std::size_t t = 0; t < nb; ++t) shift[t] = -dist[na + t];
    return shift;
}

}  // namespace

double LinearRow::activity(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t t = 0; t < index.size(); ++t) s += value[t] * x[static_cast<std::size_t>(index[t])];
    return s;
}

IlpModel::IlpModel(const MapProblem& problem, bool presolve) : problem_(&problem) {
    build_slots(presolve);
    build_links();
    build_disagreements();
}

int IlpModel::add_variable(IlpVariable v) {
    variables_.push_back(v);
    return static_cast<int>(variables_.size()) - 1;
}

void IlpModel::build_slots(bool presolve) {
    const auto& pr = *problem_;
    const int p = pr.p();
    const int vertices = pr.vertices();

    // Largest regularity a single vertex could save per (parent, node).
    std::vector<Eigen::MatrixXd> exposure(static_cast<std::size_t>(vertices), Eigen::MatrixXd::Zero(p, p));
    for (const auto& pair : pr.candidate_pairs()) {
        for (int i = 1; i <= p; ++i) {
            for (int j = 1; j <= p; ++j) {
                if (j == i) continue;
                const double lam = pr.lambda(pair.first, pair.second, j, i);
                exposure[static_cast<std::size_t>(pair.first - 1)](j - 1, i - 1) += lam;
                exposure[static_cast<std::size_t>(pair.second - 1)](j - 1, i - 1) += lam;
            }
        }
    }

    slots_.resize(static_cast<std::size_t>(vertices * p));
    for (int k = 1; k <= vertices; ++k) {
        const auto& ex = exposure[static_cast<std::size_t>(k - 1)];
        for (int i = 1; i <= p; ++i) {
            const auto& opts = pr.options(k, i);
            auto& slot = slots_[static_cast<std::size_t>((k - 1) * p + (i - 1))];
            LinearRow row;
            for (const auto& e : opts) {
                bool dominated = false;
                if (presolve) {
                    for (const auto& sub : opts) {
                        if (sub.parents == e.parents || (sub.parents & ~e.parents) != 0) continue;
                        double saved = 0.0;
                        for (int j : members(e.parents & ~sub.parents)) saved += ex(j - 1, i - 1);
                        if (sub.score - e.score > saved + kObjectiveTolerance) {
                            dominated = true;
                            break;
                        }
                    }
                }
                if (dominated) {
                    ++removed_;
                    continue;
                }
                IlpVariable v;
                v.kind = VariableKind::parent_set;
                v.k = k;
                v.node = i;
                v.parents = e.parents;
                v.objective = e.score;
                const int id = add_variable(v);
                slot.push_back(id);
                row.index.push_back(id);
                row.value.push_back(1.0);
            }
            row.lower = row.upper = 1.0;
            rows_.push_back(std::move(row));
        }
    }
}

void IlpModel::build_links() {
    const auto& pr = *problem_;
    const int vertices = pr.vertices();
    links_.assign(static_cast<std::size_t>(vertices * vertices), -1);
    const auto set_link = [&](int k, int l, int id) {
        links_[static_cast<std::size_t>((k - 1) * vertices + (l - 1))] = id;
        links_[static_cast<std::size_t>((l - 1) * vertices + (k - 1))] = id;
    };
    switch (pr.mode().kind) {
        case SolveMode::Kind::fixed_network:
            for (const auto& e : pr.mode().network.edges()) constant_ += pr.eta(e.first, e.second);
            break;
        case SolveMode::Kind::joint_network:
            for (const auto& pair : pr.candidate_pairs()) {
                IlpVariable v;
                v.kind = VariableKind::link;
                v.k = pair.first;
                v.l = pair.second;
                v.objective = pr.eta(pair.first, pair.second);
                set_link(pair.first, pair.second, add_variable(v));
            }
            break;
        case SolveMode::Kind::clustering: {
            const int kk = pr.subjects();
            const int l_total = pr.mode().clusters;
            // Labels follow first appearance: subject k can only use labels 1..k.
            for (int k = 1; k <= kk; ++k) {
                LinearRow one;
                for (int c = 1; c <= std::min(k, l_total); ++c) {
                    IlpVariable v;
                    v.kind = VariableKind::link;
                    v.k = k;
                    v.l = kk + c;
                    const int id = add_variable(v);
                    set_link(k, kk + c, id);
                    one.index.push_back(id);
                    one.value.push_back(1.0);
                }
                one.lower = one.upper = 1.0;
                rows_.push_back(std::move(one));
            }
            for (int k = 2; k <= kk; ++k) {
                for (int c = 2; c <= std::min(k, l_total); ++c) {
                    LinearRow growth;
                    growth.index.push_back(link(k, kk + c));
                    growth.value.push_back(1.0);
                    for (int prev = c - 1; prev < k; ++prev) {
                        growth.index.push_back(link(prev, kk + c - 1));
                        growth.value.push_back(-1.0);
                    }
                    growth.lower = -kInf;
                    growth.upper = 0.0;
                    rows_.push_back(std::move(growth));
                }
            }
            break;
        }
    }
}

void IlpModel::build_disagreements() {
    const auto& pr = *problem_;
    const int p = pr.p();
    const bool fixed = pr.mode().kind == SolveMode::Kind::fixed_network;
    for (const auto& pair : pr.candidate_pairs()) {
        const int k = pair.first;
        const int l = pair.second;
        const int z = link(k, l);
        if (!fixed && z < 0) continue;
        for (int i = 1; i <= p; ++i) {
            ParentSet possible = 0;
            for (int v : slot(k, i)) possible |= variables_[static_cast<std::size_t>(v)].parents;
            for (int v : slot(l, i)) possible |= variables_[static_cast<std::size_t>(v)].parents;
            for (int j : members(possible)) {
                const double lam = pr.lambda(k, l, j, i);
                if (!(lam > 0.0)) continue;
                IlpVariable dv;
                dv.kind = VariableKind::disagreement;
                dv.k = k;
                dv.l = l;
                dv.node = i;
                dv.parent = j;
                dv.objective = -lam;
                const int d = add_variable(dv);
                disagreements_[{k, l, j, i}] = d;
                for (double sign : {1.0, -1.0}) {
                    // d >= sign * (e_k - e_l) + z - 1
                    LinearRow row;
                    row.index.push_back(d);
                    row.value.push_back(1.0);
                    append_membership(row, *this, k, i, j, -sign);
                    append_membership(row, *this, l, i, j, sign);
                    if (fixed) {
                        row.lower = 0.0;
                    } else {
                        row.index.push_back(z);
                        row.value.push_back(-1.0);
                        row.lower = -1.0;
                    }
                    row.upper = kInf;
                    rows_.push_back(std::move(row));
                }
                if (!fixed) {
                    LinearRow cap;  // d <= z
                    cap.index = {d, z};
                    cap.value = {1.0, -1.0};
                    cap.lower = -kInf;
                    cap.upper = 0.0;
                    rows_.push_back(std::move(cap));
                }
            }
        }
    }
}

std::span<const int> IlpModel::slot(int k, int i) const {
    return slots_[static_cast<std::size_t>((k - 1) * problem_->p() + (i - 1))];
}

int IlpModel::link(int k, int l) const {
    const int vertices = problem_->vertices();
    return links_[static_cast<std::size_t>((k - 1) * vertices + (l - 1))];
}

int IlpModel::disagreement(int k, int l, int j, int i) const {
    if (k > l) std::swap(k, l);
    const auto it = disagreements_.find({k, l, j, i});
    return it == disagreements_.end() ? -1 : it->second;
}

std::optional<IlpModel::Potential> IlpModel::transport_potential(int k, int l, int i, std::span<const double> x,
                                                                bool point_masses, double at_least) const {
    const auto& pr = *problem_;
    struct Point {
        ParentSet mask;
        double mass;
    };
    const auto support = [&](int v) {
        std::vector<Point> out;
        double total = 0.0;
        for (int u : slot(v, i)) {
            const double val = x[static_cast<std::size_t>(u)];
            if (val > 1e-9) {
                out.push_back({variables_[static_cast<std::size_t>(u)].parents, val});
                total += val;
            }
        }
        for (auto& pt : out) pt.mass /= total;
        return out;
    };
    const auto a = support(k);
    const auto b = support(l);
    if (a.empty() || b.empty()) return std::nullopt;
    if (!point_masses && (a.size() < 2 || b.size() < 2)) return std::nullopt;
    std::vector<double> lam(static_cast<std::size_t>(pr.p() + 1), 0.0);
    for (int j = 1; j <= pr.p(); ++j) {
        if (j != i) lam[static_cast<std::size_t>(j)] = pr.lambda(k, l, j, i);
    }
    const auto cost = [&](ParentSet u, ParentSet w) {
        double c = 0.0;
        for (int j : members(u ^ w)) c += lam[static_cast<std::size_t>(j)];
        return c;
    };

    double independent = 0.0;
    for (const auto& pa : a) {
        for (const auto& pb : b) independent += pa.mass * pb.mass * cost(pa.mask, pb.mask);
    }
    if (independent <= at_least) return std::nullopt;
    std::vector<double> mu, nu;
    for (const auto& pt : a) mu.push_back(pt.mass);
    for (const auto& pt : b) nu.push_back(pt.mass);
    std::vector<double> c(a.size() * b.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        for (std::size_t t = 0; t < b.size(); ++t) c[s * b.size() + t] = cost(a[s].mask, b[t].mask);
    }
    // h(u) = min_t cost(u, b_t) + shift_t; a point mass on the k side uses -cost(u, a_0).
    std::vector<double> shift(b.size(), 0.0);
    const bool from_a = a.size() == 1 && b.size() > 1;
    if (a.size() > 1 && b.size() > 1) shift = transport_shifts(mu, nu, c);
    const auto h = [&](ParentSet u) {
        if (from_a) return -cost(u, a[0].mask);
        double best = kInf;
        for (std::size_t t = 0; t < b.size(); ++t) best = std::min(best, cost(u, b[t].mask) + shift[t]);
        return best;
    };
    Potential out;
    double hk_max = -kInf;
    double hl_min = kInf;
    for (int u : slot(k, i)) {
        const double hv = h(variables_[static_cast<std::size_t>(u)].parents);
        hk_max = std::max(hk_max, hv);
        out.terms.emplace_back(u, -hv);
        out.gain += hv * x[static_cast<std::size_t>(u)];
    }
    for (int u : slot(l, i)) {
        const double hv = h(variables_[static_cast<std::size_t>(u)].parents);
        hl_min = std::min(hl_min, hv);
        out.terms.emplace_back(u, hv);
        out.gain -= hv * x[static_cast<std::size_t>(u)];
    }
    out.range = hk_max - hl_min;
    return out;
}

std::vector<LinearRow> IlpModel::separate_transport_cuts(std::span<const double> x, double min_violation) const {
    const auto& pr = *problem_;
    const bool fixed = pr.mode().kind == SolveMode::Kind::fixed_network;
    std::vector<LinearRow> cuts;
    for (const auto& pair : pr.candidate_pairs()) {
        const int k = pair.first;
        const int l = pair.second;
        const int z = link(k, l);
        if (!fixed && z < 0) continue;
        for (int i = 1; i <= pr.p(); ++i) {
            const auto pot = transport_potential(k, l, i, x);
            if (!pot) continue;
            LinearRow cut;
            double lhs = 0.0;
            for (int j = 1; j <= pr.p(); ++j) {
                const int d = disagreement(k, l, j, i);
                if (d < 0) continue;
                const double lam = pr.lambda(k, l, j, i);
                cut.index.push_back(d);
                cut.value.push_back(lam);
                lhs += lam * x[static_cast<std::size_t>(d)];
            }
            for (const auto& [u, c] : pot->terms) {
                cut.index.push_back(u);
                cut.value.push_back(c);
            }
            double slack = lhs - pot->gain;
            cut.lower = 0.0;
            cut.upper = kInf;
            if (!fixed) {
                cut.index.push_back(z);
                cut.value.push_back(-pot->range);
                cut.lower = -pot->range;
                slack += pot->range * (1.0 - x[static_cast<std::size_t>(z)]);
            }
            if (slack < -min_violation) cuts.push_back(std::move(cut));
        }
    }
    return cuts;
}

std::vector<double> IlpModel::encode(const Configuration& c) const {
    const auto& pr = *problem_;
    pr.check_feasible(c);
    if (pr.mode().kind != SolveMode::Kind::fixed_network) {
        for (const auto& e : c.network.edges()) {
            if (link(e.first, e.second) < 0) throw InputError("encode: network edge has no variable in the model");
        }
    }
    std::vector<double> x(variables_.size(), 0.0);
    for (int k = 1; k <= pr.vertices(); ++k) {
        for (int i = 1; i <= pr.p(); ++i) {
            const ParentSet want = c.dags[static_cast<std::size_t>(k - 1)].parents(i);
            bool found = false;
            for (int v : slot(k, i)) {
                if (variables_[static_cast<std::size_t>(v)].parents == want) {
                    x[static_cast<std::size_t>(v)] = 1.0;
                    found = true;
                }
            }
            if (!found) throw InputError("encode: parent set has no variable in the model");
        }
    }
    for (std::size_t v = 0; v < variables_.size(); ++v) {
        const auto& var = variables_[v];
        const bool linked = c.network.contains(var.k, var.l);
        if (var.kind == VariableKind::link) {
            x[v] = linked ? 1.0 : 0.0;
        } else if (var.kind == VariableKind::disagreement) {
            const bool a = contains(c.dags[static_cast<std::size_t>(var.k - 1)].parents(var.node), var.parent);
            const bool b = contains(c.dags[static_cast<std::size_t>(var.l - 1)].parents(var.node), var.parent);
            x[v] = (linked && a != b) ? 1.0 : 0.0;
        }
    }
    return x;
}

std::vector<std::vector<ParentSet>> IlpModel::decode_parents(std::span<const double> x) const {
    const auto& pr = *problem_;
    std::vector<std::vector<ParentSet>> out(static_cast<std::size_t>(pr.vertices()),
                                            std::vector<ParentSet>(static_cast<std::size_t>(pr.p()), 0));
    for (int k = 1; k <= pr.vertices(); ++k) {
        for (int i = 1; i <= pr.p(); ++i) {
            double best = -kInf;
            for (int v : slot(k, i)) {
                if (x[static_cast<std::size_t>(v)] > best) {
                    best = x[static_cast<std::size_t>(v)];
                    out[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i - 1)] =
                        variables_[static_cast<std::size_t>(v)].parents;
                }
            }
        }
    }
    return out;
}

double IlpModel::evaluate(std::span<const double> x) const {
    double s = constant_;
    for (std::size_t v = 0; v < variables_.size(); ++v) s += variables_[v].objective * x[v];
    return s;
}

bool IlpModel::satisfies_rows(std::span<const double> x, double tol) const {
    if (x.size() != variables_.size()) return false;
    for (double v : x) {
        if (v < -tol || v > 1.0 + tol) return false;
    }
    for (const auto& row : rows_) {
        const double a = row.activity(x);
        if (a < row.lower - tol || a > row.upper + tol) return false;
    }
    return true;
}

LinearRow IlpModel::cluster_cut(int k, ParentSet cluster) const {
    LinearRow row;
    for (int i : members(cluster)) {
        for (int v : slot(k, i)) {
            if ((variables_[static_cast<std::size_t>(v)].parents & cluster) == 0) {
                row.index.push_back(v);
                row.value.push_back(1.0);
            }
        }
    }
    row.lower = 1.0;
    row.upper = kInf;
    return row;
}

std::vector<LinearRow> IlpModel::separate_cluster_cuts(std::span<const double> x, double min_violation,
                                                       int max_per_vertex) const {
    const auto& pr = *problem_;
    const int p = pr.p();
    std::vector<LinearRow> cuts;
    if (p < 2) return cuts;
    struct Candidate {
        double lhs;
        ParentSet cluster;
    };
    for (int k = 1; k <= pr.vertices(); ++k) {
        std::vector<Candidate> found;
        if (p <= kExactSeparationLimit) {
            const std::size_t n = std::size_t{1} << p;
            // g[i][T] = sum of x[k,i,pi] over pi subset of T
            std::vector<std::vector<double>> g(static_cast<std::size_t>(p), std::vector<double>(n, 0.0));
            for (int i = 1; i <= p; ++i) {
                auto& gi = g[static_cast<std::size_t>(i - 1)];
                for (int v : slot(k, i)) {
                    const double val = x[static_cast<std::size_t>(v)];
                    if (val > 1e-12) gi[variables_[static_cast<std::size_t>(v)].parents] += val;
                }
                for (int b = 0; b < p; ++b) {
                    const std::size_t bit = std::size_t{1} << b;
                    for (std::size_t t = 0; t < n; ++t) {
                        if (t & bit) gi[t] += gi[t ^ bit];
                    }
                }
            }
            const std::size_t all = n - 1;
            for (std::size_t c = 1; c < n; ++c) {
                if (std::popcount(c) < 2) continue;
                double lhs = 0.0;
                for (int i : members(c)) lhs += g[static_cast<std::size_t>(i - 1)][all & ~c];
                if (lhs < 1.0 - min_violation) found.push_back({lhs, static_cast<ParentSet>(c)});
            }
        } else {
            // Strongly connected parts of the support graph at a few thresholds.
            for (double threshold : {0.5, 1e-6}) {
                std::vector<ParentSet> reach(static_cast<std::size_t>(p), 0);  // reach[j] = vertices reachable from j
                for (int i = 1; i <= p; ++i) {
                    for (int v : slot(k, i)) {
                        if (x[static_cast<std::size_t>(v)] <= threshold) continue;
                        for (int j : members(variables_[static_cast<std::size_t>(v)].parents)) {
                            reach[static_cast<std::size_t>(j - 1)] |= vertex_bit(i);
                        }
                    }
                }
                for (bool changed = true; changed;) {
                    changed = false;
                    for (int j = 1; j <= p; ++j) {
                        ParentSet r = reach[static_cast<std::size_t>(j - 1)];
                        for (int m : members(r)) r |= reach[static_cast<std::size_t>(m - 1)];
                        if (r != reach[static_cast<std::size_t>(j - 1)]) {
                            reach[static_cast<std::size_t>(j - 1)] = r;
                            changed = true;
                        }
                    }
                }
                for (int i = 1; i <= p; ++i) {
                    ParentSet comp = 0;
                    for (int j = 1; j <= p; ++j) {
                        if (contains(reach[static_cast<std::size_t>(i - 1)], j) &&
                            contains(reach[static_cast<std::size_t>(j - 1)], i)) {
                            comp |= vertex_bit(j);
                        }
                    }
                    if (set_size(comp) < 2 || std::countr_zero(comp) + 1 != i) continue;
                    const double lhs = cluster_cut(k, comp).activity(x);
                    if (lhs < 1.0 - min_violation) found.push_back({lhs, comp});
                }
            }
        }
        std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
            if (a.lhs != b.lhs) return a.lhs < b.lhs;
            if (set_size(a.cluster) != set_size(b.cluster)) return set_size(a.cluster) < set_size(b.cluster);
            return a.cluster < b.cluster;
        });
        found.erase(std::unique(found.begin(), found.end(),
                                [](const Candidate& a, const Candidate& b) { return a.cluster == b.cluster; }),
                    found.end());
        for (std::size_t t = 0; t < found.size() && static_cast<int>(t) < max_per_vertex; ++t) {
            cuts.push_back(cluster_cut(k, found[t].cluster));
        }
    }
    return cuts;
}

}  // namespace mdag
