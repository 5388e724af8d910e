#ifndef MDAG_DLM_HPP
#define MDAG_DLM_HPP

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mdag/dag.hpp"
#include "mdag/time_series.hpp"

namespace mdag {

/// Prior and evolution settings of the per-node dynamic regression
///
///   Y_i(n) = F(n)' theta(n) + eps(n),   theta(n) = theta(n-1) + w(n),
///
/// where F(n) = (1, Y_j(n) for j in the parent set, ascending). The evolution
/// covariance W(n) is implied by discounting: R(n) = C(n-1) / delta.
///
/// With `known_obs_variance` unset the observational variance V is unknown
/// and conjugate: 1/V ~ Gamma(n0/2, d0/2) and theta(0) | V ~ N(m0, V c0 I),
/// giving Student-t one-step predictions. With it set, V is fixed and
/// theta(0) ~ N(m0, c0 I), giving Gaussian predictions.
struct DlmConfig {
    double delta = 1.0;
    double prior_state_mean = 0.0;   ///< m0, applied to every coefficient
    double prior_state_scale = 3.0;  ///< c0
    double prior_obs_shape = 1.0;    ///< n0
    double prior_obs_scale = 1.0;    ///< d0
    /// Candidate discounts searched per (node, parent set) by build_score_table. Empty: use `delta`.
    std::vector<double> delta_grid = {0.90, 0.95, 0.99, 1.0};
    std::optional<double> known_obs_variance;

    void validate() const;
};

nlohmann::json to_json(const DlmConfig& config);
DlmConfig dlm_config_from_json(const nlohmann::json& j);

/// Smallest predictive variance accepted before the filter raises NumericalError.
inline constexpr double kMinPredictiveVariance = 1e-12;

/// One-step-ahead predictive distribution: Student-t with `dof` degrees of
/// freedom, or Gaussian when dof is unset.
struct Predictive {
    double location = 0.0;
    double variance = 1.0;  ///< squared scale
    std::optional<double> dof;

    double log_density(double y) const;
};

/// Forward filter for one node of the regression above.
class DiscountFilter {
public:
    DiscountFilter(int regressor_count, const DlmConfig& config, double delta);

    /// Prediction for the next observation given its regressors. Throws
    /// NumericalError when the predictive variance falls below kMinPredictiveVariance.
    Predictive predict(const Eigen::VectorXd& regressors) const;

    /// Conditions on y and returns log p(y | regressors, past).
    double update(double y, const Eigen::VectorXd& regressors);

    const Eigen::VectorXd& mean() const { return mean_; }

private:
    double delta_;
    std::optional<double> known_variance_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;  // scale-free when the variance is unknown
    double dof_ = 0.0;
    double variance_estimate_ = 1.0;
};

/// Sum over time of log one-step predictive densities of `node` given
/// `parents`, using the single discount `config.delta`.
double node_log_evidence(const TimeSeries& series, int node, ParentSet parents, const DlmConfig& config);

struct DiscountChoice {
    double log_evidence = 0.0;
    double delta = 1.0;
};

/// Maximizes node_log_evidence over `config.delta_grid` (or uses `config.delta`
/// if the grid is empty). Ties keep the earliest grid entry.
DiscountChoice best_node_log_evidence(const TimeSeries& series, int node, ParentSet parents, const DlmConfig& config);

}  // namespace mdag

#endif  // MDAG_DLM_HPP
