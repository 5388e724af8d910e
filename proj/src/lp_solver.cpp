#include "mdag/lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdag/errors.hpp"

namespace mdag {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr int kRefactorInterval = 400;
constexpr double kDevexReset = 1e8;

}  // namespace

DualSimplex::DualSimplex(std::vector<double> objective, std::vector<double> lower, std::vector<double> upper)
    : n_(static_cast<int>(objective.size())) {
    if (lower.size() != objective.size() || upper.size() != objective.size()) {
        throw InternalError("DualSimplex: bound and objective sizes differ");
    }
    for (std::size_t j = 0; j < objective.size(); ++j) {
        if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || lower[j] > upper[j]) {
            throw InternalError("DualSimplex: column bounds must be finite and ordered");
        }
        cost_.push_back(-objective[j]);
    }
    lo_ = std::move(lower);
    hi_ = std::move(upper);
    col_.resize(static_cast<std::size_t>(n_));
    where_.assign(static_cast<std::size_t>(n_), -1);
    at_upper_.assign(static_cast<std::size_t>(n_), 0);
    x_.assign(static_cast<std::size_t>(n_), 0.0);
    d_.assign(cost_.begin(), cost_.end());
    for (int j = 0; j < n_; ++j) at_upper_[static_cast<std::size_t>(j)] = d_[static_cast<std::size_t>(j)] < 0.0;
}

void DualSimplex::add_rows(std::span<const LinearRow> rows) {
    if (rows.empty()) return;
    const int m_old = m_;
    const int m_new = m_ + static_cast<int>(rows.size());
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(m_new, m_new);
    if (m_old > 0) grown.topLeftCorner(m_old, m_old) = binv_;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        const auto& row = rows[t];
        const int r = m_old + static_cast<int>(t);
        double activity = 0.0;
        Eigen::RowVectorXd combo = Eigen::RowVectorXd::Zero(m_old);
        for (std::size_t e = 0; e < row.index.size(); ++e) {
            const int j = row.index[e];
            if (j < 0 || j >= n_) throw InternalError("DualSimplex: row references an unknown column");
            if (row.value[e] == 0.0) continue;
            col_[static_cast<std::size_t>(j)].emplace_back(r, row.value[e]);
            activity += row.value[e] * x_[static_cast<std::size_t>(j)];
            const int pos = where_[static_cast<std::size_t>(j)];
            if (pos >= 0 && m_old > 0) combo += row.value[e] * binv_.row(pos);
        }
        if (m_old > 0) grown.block(r, 0, 1, m_old) = combo;
        grown(r, r) = -1.0;
        cost_.push_back(0.0);
        lo_.push_back(row.lower);
        hi_.push_back(row.upper);
        head_.push_back(n_ + r);
        where_.push_back(r);
        at_upper_.push_back(0);
        x_.push_back(activity);
        d_.push_back(0.0);
        weight_.push_back(1.0);
    }
    binv_ = std::move(grown);
    m_ = m_new;
    rows_stale_ = true;
}

int DualSimplex::add_column(double objective, double lower, double upper,
                            const std::vector<std::pair<int, double>>& entries) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || lower > upper) {
        throw InternalError("DualSimplex: column bounds must be finite and ordered");
    }
    const auto at = static_cast<std::ptrdiff_t>(n_);
    cost_.insert(cost_.begin() + at, -objective);
    lo_.insert(lo_.begin() + at, lower);
    hi_.insert(hi_.begin() + at, upper);
    where_.insert(where_.begin() + at, -1);
    at_upper_.insert(at_upper_.begin() + at, 0);
    x_.insert(x_.begin() + at, lower);
    d_.insert(d_.begin() + at, -objective);
    for (auto& h : head_) {
        if (h >= n_) ++h;
    }
    std::vector<std::pair<int, double>> col;
    for (const auto& [r, v] : entries) {
        if (r < 0 || r >= m_) throw InternalError("DualSimplex: column references an unknown row");
        if (v != 0.0) col.emplace_back(r, v);
    }
    col_.push_back(std::move(col));
    rows_stale_ = true;
    return n_++;
}

std::vector<int> DualSimplex::remove_basic_rows(const std::vector<int>& rows) {
    std::vector<int> map(static_cast<std::size_t>(m_));
    std::vector<char> drop(static_cast<std::size_t>(m_), 0);
    for (int r : rows) {
        if (r >= 0 && r < m_ && row_is_basic(r)) drop[static_cast<std::size_t>(r)] = 1;
    }
    int next = 0;
    for (int r = 0; r < m_; ++r) map[static_cast<std::size_t>(r)] = drop[static_cast<std::size_t>(r)] ? -1 : next++;
    if (next == m_) return map;

    std::vector<int> keep_rows;
    std::vector<int> keep_pos;
    for (int r = 0; r < m_; ++r) {
        if (!drop[static_cast<std::size_t>(r)]) keep_rows.push_back(r);
    }
    for (int pos = 0; pos < m_; ++pos) {
        const int h = head_[static_cast<std::size_t>(pos)];
        if (h >= n_ && drop[static_cast<std::size_t>(h - n_)]) continue;
        keep_pos.push_back(pos);
    }
    const int m_new = next;
    Eigen::MatrixXd b(m_new, m_new);
    for (int a = 0; a < m_new; ++a) {
        for (int c = 0; c < m_new; ++c) b(a, c) = binv_(keep_pos[static_cast<std::size_t>(a)], keep_rows[static_cast<std::size_t>(c)]);
    }
    binv_ = std::move(b);

    std::vector<int> head;
    std::vector<double> weight;
    for (int pos : keep_pos) {
        int h = head_[static_cast<std::size_t>(pos)];
        if (h >= n_) h = n_ + map[static_cast<std::size_t>(h - n_)];
        head.push_back(h);
        weight.push_back(weight_[static_cast<std::size_t>(pos)]);
    }
    head_ = std::move(head);
    weight_ = std::move(weight);

    for (auto& col : col_) {
        std::vector<std::pair<int, double>> kept;
        for (const auto& [r, v] : col) {
            if (map[static_cast<std::size_t>(r)] >= 0) kept.emplace_back(map[static_cast<std::size_t>(r)], v);
        }
        col = std::move(kept);
    }
    const auto erase_logicals = [&](auto& vec) {
        std::size_t out = static_cast<std::size_t>(n_);
        for (int r = 0; r < m_; ++r) {
            if (!drop[static_cast<std::size_t>(r)]) vec[out++] = vec[static_cast<std::size_t>(n_ + r)];
        }
        vec.resize(out);
    };
    erase_logicals(cost_);
    erase_logicals(lo_);
    erase_logicals(hi_);
    erase_logicals(at_upper_);
    erase_logicals(x_);
    erase_logicals(d_);
    m_ = m_new;
    where_.assign(static_cast<std::size_t>(n_ + m_), -1);
    for (int pos = 0; pos < m_; ++pos) where_[static_cast<std::size_t>(head_[static_cast<std::size_t>(pos)])] = pos;
    bound_rc_.clear();
    bound_term_.clear();
    rows_stale_ = true;
    return map;
}

std::vector<double> DualSimplex::row_duals() const {
    std::vector<double> y(static_cast<std::size_t>(m_), 0.0);
    if (m_ == 0) return y;
    Eigen::RowVectorXd cb(m_);
    for (int r = 0; r < m_; ++r) cb(r) = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])];
    const Eigen::RowVectorXd pi = cb * binv_;
    for (int r = 0; r < m_; ++r) {
        double v = -pi(r);
        const double lo = lo_[static_cast<std::size_t>(n_ + r)];
        const double hi = hi_[static_cast<std::size_t>(n_ + r)];
        if ((v > 0.0 && !std::isfinite(hi)) || (v < 0.0 && !std::isfinite(lo))) v = 0.0;
        y[static_cast<std::size_t>(r)] = v;
    }
    return y;
}

void DualSimplex::set_bounds(int j, double lower, double upper) {
    if (!(lower <= upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
        throw InternalError("DualSimplex: invalid column bounds");
    }
    lo_[static_cast<std::size_t>(j)] = lower;
    hi_[static_cast<std::size_t>(j)] = upper;
}

double DualSimplex::bound_value(int j) const {
    const auto u = static_cast<std::size_t>(j);
    if (at_upper_[u]) return std::isfinite(hi_[u]) ? hi_[u] : lo_[u];
    return std::isfinite(lo_[u]) ? lo_[u] : hi_[u];
}

void DualSimplex::column_times_inverse(int j, Eigen::VectorXd& out) const {
    out.setZero(m_);
    if (j < n_) {
        for (const auto& [r, v] : col_[static_cast<std::size_t>(j)]) out.noalias() += v * binv_.col(r);
    } else {
        out.noalias() -= binv_.col(j - n_);
    }
}

double DualSimplex::row_dot_column(const Eigen::VectorXd& rho, int j) const {
    if (j >= n_) return -rho(j - n_);
    double s = 0.0;
    for (const auto& [r, v] : col_[static_cast<std::size_t>(j)]) s += v * rho(r);
    return s;
}

// alpha_j = rho' a_j over nonbasic, non-fixed columns; zero elsewhere.
void DualSimplex::pivot_row(const Eigen::VectorXd& rho, std::vector<double>& alpha) {
    const int total = n_ + m_;
    rho_support_.clear();
    for (int r = 0; r < m_; ++r) {
        if (rho(r) != 0.0) rho_support_.push_back(r);
    }
    if (3 * rho_support_.size() > static_cast<std::size_t>(m_)) {
        for (int j = 0; j < total; ++j) {
            const auto u = static_cast<std::size_t>(j);
            alpha[u] = where_[u] >= 0 || lo_[u] == hi_[u] ? 0.0 : row_dot_column(rho, j);
        }
        return;
    }
    if (rows_stale_) {
        row_.assign(static_cast<std::size_t>(m_), {});
        for (int j = 0; j < n_; ++j) {
            for (const auto& [r, v] : col_[static_cast<std::size_t>(j)]) row_[static_cast<std::size_t>(r)].emplace_back(j, v);
        }
        rows_stale_ = false;
    }
    std::fill(alpha.begin(), alpha.begin() + total, 0.0);
    for (int r : rho_support_) {
        const double f = rho(r);
        for (const auto& [j, v] : row_[static_cast<std::size_t>(r)]) alpha[static_cast<std::size_t>(j)] += f * v;
        alpha[static_cast<std::size_t>(n_ + r)] = -f;
    }
    for (int j = 0; j < total; ++j) {
        const auto u = static_cast<std::size_t>(j);
        if (where_[u] >= 0 || lo_[u] == hi_[u]) alpha[u] = 0.0;
    }
}

void DualSimplex::compute_primal() {
    const int total = n_ + m_;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < total; ++j) {
        const auto u = static_cast<std::size_t>(j);
        if (where_[u] >= 0) continue;
        x_[u] = bound_value(j);
        if (x_[u] == 0.0) continue;
        if (j < n_) {
            for (const auto& [r, v] : col_[u]) rhs(r) += v * x_[u];
        } else {
            rhs(j - n_) -= x_[u];
        }
    }
    const Eigen::VectorXd xb = -(binv_ * rhs);
    for (int r = 0; r < m_; ++r) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])] = xb(r);
}

void DualSimplex::compute_duals() {
    Eigen::RowVectorXd cb(m_);
    for (int r = 0; r < m_; ++r) cb(r) = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])];
    const Eigen::VectorXd pi = (cb * binv_).transpose();
    const int total = n_ + m_;
    for (int j = 0; j < total; ++j) {
        const auto u = static_cast<std::size_t>(j);
        d_[u] = where_[u] >= 0 ? 0.0 : cost_[u] - row_dot_column(pi, j);
    }
}

void DualSimplex::correct_dual_signs() {
    const int total = n_ + m_;
    for (int j = 0; j < total; ++j) {
        const auto u = static_cast<std::size_t>(j);
        if (where_[u] >= 0) continue;
        if (!at_upper_[u] && d_[u] < -kDualTol && std::isfinite(hi_[u])) at_upper_[u] = 1;
        else if (at_upper_[u] && d_[u] > kDualTol && std::isfinite(lo_[u])) at_upper_[u] = 0;
    }
}

void DualSimplex::reset_to_slack_basis() {
    for (int j = 0; j < n_; ++j) where_[static_cast<std::size_t>(j)] = -1;
    for (int r = 0; r < m_; ++r) {
        head_[static_cast<std::size_t>(r)] = n_ + r;
        where_[static_cast<std::size_t>(n_ + r)] = r;
    }
    binv_ = -Eigen::MatrixXd::Identity(m_, m_);
    std::fill(weight_.begin(), weight_.end(), 1.0);
}

void DualSimplex::refactor() {
    since_refactor_ = 0;
    factored_ = true;
    if (m_ == 0) return;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
    for (int pos = 0; pos < m_; ++pos) {
        const int j = head_[static_cast<std::size_t>(pos)];
        if (j < n_) {
            for (const auto& [r, v] : col_[static_cast<std::size_t>(j)]) b(r, pos) = v;
        } else {
            b(j - n_, pos) = -1.0;
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    Eigen::MatrixXd inv = lu.inverse();
    const Eigen::VectorXd probe = Eigen::VectorXd::LinSpaced(m_, 1.0, 2.0);
    const double residual = (b * (inv * probe) - probe).cwiseAbs().maxCoeff();
    if (!inv.allFinite() || residual > 1e-7) {
        reset_to_slack_basis();
    } else {
        binv_ = std::move(inv);
    }
}

DualSimplex::Status DualSimplex::solve(long max_iterations) {
    if (!factored_ || since_refactor_ >= kRefactorInterval) refactor();
    compute_duals();
    correct_dual_signs();
    compute_primal();

    const int total = n_ + m_;
    Eigen::VectorXd rho(m_);
    Eigen::VectorXd w(m_);
    std::vector<double> alpha(static_cast<std::size_t>(total), 0.0);
    int troubles = 0;
    for (long iter = 0; iter < max_iterations; ++iter) {
        if (since_refactor_ >= kRefactorInterval) {
            refactor();
            compute_duals();
            correct_dual_signs();
            compute_primal();
        }

        // Pricing: dual Devex on primal infeasibilities.
        int r = -1;
        double best = 0.0;
        for (int pos = 0; pos < m_; ++pos) {
            const auto b = static_cast<std::size_t>(head_[static_cast<std::size_t>(pos)]);
            double infeas = 0.0;
            if (x_[b] < lo_[b] - kPrimalTol) infeas = lo_[b] - x_[b];
            else if (x_[b] > hi_[b] + kPrimalTol) infeas = x_[b] - hi_[b];
            if (infeas <= 0.0) continue;
            const double weight = weight_[static_cast<std::size_t>(pos)];
            const double score = std::isfinite(weight) ? infeas * infeas / weight : 0.0;
            if (score > best || r < 0) {
                best = score;
                r = pos;
            }
        }
        if (r < 0) return Status::optimal;

        const int leaving = head_[static_cast<std::size_t>(r)];
        const auto lb = static_cast<std::size_t>(leaving);
        const double s = x_[lb] > hi_[lb] ? 1.0 : -1.0;
        rho = binv_.row(r).transpose();

        // Harris two-pass ratio test.
        double theta_max = kInf;
        pivot_row(rho, alpha);
        for (int j = 0; j < total; ++j) {
            const auto u = static_cast<std::size_t>(j);
            const double a = alpha[u];
            if (a == 0.0) continue;
            const bool eligible = at_upper_[u] ? s * a < -kPivotTol : s * a > kPivotTol;
            if (!eligible) continue;
            const double dj = at_upper_[u] ? std::max(0.0, -d_[u]) : std::max(0.0, d_[u]);
            theta_max = std::min(theta_max, (dj + kDualTol) / std::abs(a));
        }
        int q = -1;
        double q_abs = 0.0;
        if (theta_max < kInf) {
            for (int j = 0; j < total; ++j) {
                const auto u = static_cast<std::size_t>(j);
                const double a = alpha[u];
                if (a == 0.0) continue;
                const bool eligible = at_upper_[u] ? s * a < -kPivotTol : s * a > kPivotTol;
                if (!eligible) continue;
                const double dj = at_upper_[u] ? std::max(0.0, -d_[u]) : std::max(0.0, d_[u]);
                if (dj / std::abs(a) <= theta_max && std::abs(a) > q_abs) {
                    q_abs = std::abs(a);
                    q = j;
                }
            }
        }
        if (q < 0) {
            if (since_refactor_ > 0) {
                refactor();
                compute_duals();
                correct_dual_signs();
                compute_primal();
                continue;
            }
            return Status::infeasible;
        }

        const auto uq = static_cast<std::size_t>(q);
        column_times_inverse(q, w);
        if (std::abs(w(r) - alpha[uq]) > 1e-7 * (1.0 + std::abs(alpha[uq])) || std::abs(w(r)) < kPivotTol) {
            if (++troubles > 20) reset_to_slack_basis();
            refactor();
            compute_duals();
            correct_dual_signs();
            compute_primal();
            continue;
        }

        const double theta_d = d_[uq] / alpha[uq];
        for (int j = 0; j < total; ++j) {
            const auto u = static_cast<std::size_t>(j);
            if (where_[u] < 0 && alpha[u] != 0.0) d_[u] -= theta_d * alpha[u];
        }
        d_[uq] = 0.0;
        d_[lb] = -theta_d;

        const double target = s > 0.0 ? hi_[lb] : lo_[lb];
        const double step = (x_[lb] - target) / w(r);
        for (int pos = 0; pos < m_; ++pos) {
            x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(pos)])] -= w(pos) * step;
        }
        x_[uq] += step;
        x_[lb] = target;

        head_[static_cast<std::size_t>(r)] = q;
        where_[uq] = r;
        where_[lb] = -1;
        at_upper_[lb] = s > 0.0 ? 1 : 0;

        const double pivot = w(r);
        const Eigen::RowVectorXd pivot_row = binv_.row(r) / pivot;
        binv_.noalias() -= w * pivot_row;
        binv_.row(r) = pivot_row;

        const double wr = weight_[static_cast<std::size_t>(r)];
        for (int pos = 0; pos < m_; ++pos) {
            if (pos == r) continue;
            const double ratio = w(pos) / pivot;
            auto& wp = weight_[static_cast<std::size_t>(pos)];
            wp = std::max(wp, ratio * ratio * wr);
        }
        weight_[static_cast<std::size_t>(r)] = std::max(wr / (pivot * pivot), 1.0);
        if (!(*std::max_element(weight_.begin(), weight_.end()) < kDevexReset)) std::fill(weight_.begin(), weight_.end(), 1.0);

        // Larger dual infeasibilities left by the tolerant ratio test: flip boxed columns.
        bool flipped = false;
        for (int j = 0; j < total; ++j) {
            const auto u = static_cast<std::size_t>(j);
            if (where_[u] >= 0) continue;
            const bool wrong = at_upper_[u] ? d_[u] > 10 * kDualTol : d_[u] < -10 * kDualTol;
            if (!wrong) continue;
            const double target_bound = at_upper_[u] ? lo_[u] : hi_[u];
            if (!std::isfinite(target_bound)) continue;
            const double delta = target_bound - x_[u];
            at_upper_[u] = at_upper_[u] ? 0 : 1;
            x_[u] = target_bound;
            if (!flipped) w.setZero(m_);
            flipped = true;
            if (j < n_) {
                for (const auto& [row, v] : col_[u]) w(row) += v * delta;
            } else {
                w(j - n_) -= delta;
            }
        }
        if (flipped) {
            const Eigen::VectorXd shift = binv_ * w;
            for (int pos = 0; pos < m_; ++pos) {
                x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(pos)])] -= shift(pos);
            }
        }

        ++iterations_;
        ++since_refactor_;
    }
    return Status::iteration_limit;
}

double DualSimplex::value() const {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v -= cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
    return v;
}

double DualSimplex::dual_bound() {
    const std::vector<double> y = row_duals();
    double bound = 0.0;
    for (int r = 0; r < m_; ++r) {
        const double yr = y[static_cast<std::size_t>(r)];
        if (yr > 0.0) bound += yr * hi_[static_cast<std::size_t>(n_ + r)];
        else if (yr < 0.0) bound += yr * lo_[static_cast<std::size_t>(n_ + r)];
    }
    bound_rc_.assign(static_cast<std::size_t>(n_), 0.0);
    bound_term_.assign(static_cast<std::size_t>(n_), 0.0);
    for (int j = 0; j < n_; ++j) {
        const auto u = static_cast<std::size_t>(j);
        double rc = -cost_[u];
        for (const auto& [r, v] : col_[u]) rc -= y[static_cast<std::size_t>(r)] * v;
        bound_rc_[u] = rc;
        bound_term_[u] = rc > 0.0 ? rc * hi_[u] : rc * lo_[u];
        bound += bound_term_[u];
    }
    last_bound_ = bound;
    return bound;
}

double DualSimplex::forced_bound(int j, double value) const {
    const auto u = static_cast<std::size_t>(j);
    return last_bound_ - bound_term_[u] + bound_rc_[u] * value;
}

}  // namespace mdag
