#ifndef MDAG_LP_SOLVER_HPP
#define MDAG_LP_SOLVER_HPP

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mdag/ilp_model.hpp"

namespace mdag {

/// Bounded dual simplex for
///
///   maximize f'x  subject to  lower_r <= a_r x <= upper_r,  l <= x <= u
///
/// with finite column bounds. Rows can be appended and column bounds changed
/// between solves; the current basis is kept as a warm start. The basis
/// inverse is dense, which suits the few thousand rows met here.
class DualSimplex {
public:
    enum class Status { optimal, infeasible, iteration_limit };

    DualSimplex(std::vector<double> objective, std::vector<double> lower, std::vector<double> upper);

    int columns() const { return n_; }
    int rows() const { return m_; }

    void add_rows(std::span<const LinearRow> rows);
    /// Removes rows whose logical variable is basic; other rows are kept.
    /// Returns the old -> new row index map (-1 for removed rows).
    std::vector<int> remove_basic_rows(const std::vector<int>& rows);
    bool row_is_basic(int r) const { return where_[static_cast<std::size_t>(n_ + r)] >= 0; }
    /// Appends a structural column with finite bounds; `entries` are (row, coefficient).
    /// Returns its index.
    int add_column(double objective, double lower, double upper, const std::vector<std::pair<int, double>>& entries);
    void set_bounds(int j, double lower, double upper);
    double lower(int j) const { return lo_[static_cast<std::size_t>(j)]; }
    double upper(int j) const { return hi_[static_cast<std::size_t>(j)]; }

    Status solve(long max_iterations);

    /// Structural values of the last solve.
    std::span<const double> solution() const { return {x_.data(), static_cast<std::size_t>(n_)}; }
    double value() const;
    long iterations() const { return iterations_; }

    /// Upper bound on the LP optimum from the current duals, valid whatever
    /// the solve status. Fills the reduced costs used by forced_bound().
    double dual_bound();
    /// dual_bound() with column j forced to `value` (after dual_bound()).
    double forced_bound(int j, double value) const;

    /// Row duals of the maximization, zeroed where the sign would make the
    /// Lagrangian bound infinite. Any such vector yields a valid bound.
    std::vector<double> row_duals() const;
    double row_lower(int r) const { return lo_[static_cast<std::size_t>(n_ + r)]; }
    double row_upper(int r) const { return hi_[static_cast<std::size_t>(n_ + r)]; }

private:
    void refactor();
    void reset_to_slack_basis();
    void compute_primal();
    void compute_duals();
    void column_times_inverse(int j, Eigen::VectorXd& out) const;
    double row_dot_column(const Eigen::VectorXd& rho, int j) const;
    void pivot_row(const Eigen::VectorXd& rho, std::vector<double>& alpha);
    void correct_dual_signs();
    double bound_value(int j) const;

    int n_ = 0;
    int m_ = 0;
    std::vector<double> cost_;  // minimization form, logicals 0
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<std::vector<std::pair<int, double>>> col_;
    std::vector<std::vector<std::pair<int, double>>> row_;  // transpose of col_, rebuilt lazily
    bool rows_stale_ = true;
    std::vector<int> rho_support_;
    std::vector<int> head_;
    std::vector<int> where_;
    std::vector<char> at_upper_;
    std::vector<double> x_;
    std::vector<double> d_;
    std::vector<double> weight_;
    Eigen::MatrixXd binv_;
    long iterations_ = 0;
    int since_refactor_ = 0;
    bool factored_ = false;

    double last_bound_ = 0.0;
    std::vector<double> bound_term_;   // per column: contribution to last_bound_
    std::vector<double> bound_rc_;     // per column: Lagrangian reduced cost (max form)
};

}  // namespace mdag

#endif  // MDAG_LP_SOLVER_HPP
