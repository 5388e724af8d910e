#include "mdag/dlm.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mdag/errors.hpp"

namespace mdag {

void DlmConfig::validate() const {
    auto in_unit = [](double d) { return std::isfinite(d) && d > 0.0 && d <= 1.0; };
    if (!in_unit(delta)) throw InputError("dlm: delta must lie in (0, 1]");
    for (double d : delta_grid) {
        if (!in_unit(d)) throw InputError("dlm: every delta_grid entry must lie in (0, 1]");
    }
    if (!std::isfinite(prior_state_mean)) throw InputError("dlm: prior_state_mean must be finite");
    if (!(prior_state_scale > 0.0) || !std::isfinite(prior_state_scale)) {
        throw InputError("dlm: prior_state_scale must be positive");
    }
    if (!(prior_obs_shape > 0.0) || !std::isfinite(prior_obs_shape)) {
        throw InputError("dlm: prior_obs_shape must be positive");
    }
    if (!(prior_obs_scale > 0.0) || !std::isfinite(prior_obs_scale)) {
        throw InputError("dlm: prior_obs_scale must be positive");
    }
    if (known_obs_variance && !(*known_obs_variance > 0.0 && std::isfinite(*known_obs_variance))) {
        throw InputError("dlm: known_obs_variance must be positive");
    }
}

nlohmann::json to_json(const DlmConfig& c) {
    nlohmann::json j = {{"delta", c.delta},
                        {"prior_state_mean", c.prior_state_mean},
                        {"prior_state_scale", c.prior_state_scale},
                        {"prior_obs_shape", c.prior_obs_shape},
                        {"prior_obs_scale", c.prior_obs_scale},
                        {"delta_grid", c.delta_grid}};
    j["known_obs_variance"] = c.known_obs_variance ? nlohmann::json(*c.known_obs_variance) : nlohmann::json();
    return j;
}

DlmConfig dlm_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("dlm config must be a JSON object");
    DlmConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "delta") c.delta = value.get<double>();
        else if (key == "prior_state_mean") c.prior_state_mean = value.get<double>();
        else if (key == "prior_state_scale") c.prior_state_scale = value.get<double>();
        else if (key == "prior_obs_shape") c.prior_obs_shape = value.get<double>();
        else if (key == "prior_obs_scale") c.prior_obs_scale = value.get<double>();
        else if (key == "delta_grid") c.delta_grid = value.get<std::vector<double>>();
        else if (key == "known_obs_variance") {
            if (value.is_null()) c.known_obs_variance.reset();
            else c.known_obs_variance = value.get<double>();
        } else {
            throw ParseError("dlm config: unknown key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

double Predictive::log_density(double y) const {
    const double e = y - location;
    if (!dof) {
        return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + e * e / variance);
    }
    const double nu = *dof;
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi * variance) -
           0.5 * (nu + 1.0) * std::log1p(e * e / (nu * variance));
}

DiscountFilter::DiscountFilter(int regressor_count, const DlmConfig& config, double delta)
    : delta_(delta), known_variance_(config.known_obs_variance) {
    mean_ = Eigen::VectorXd::Constant(regressor_count, config.prior_state_mean);
    cov_ = config.prior_state_scale * Eigen::MatrixXd::Identity(regressor_count, regressor_count);
    dof_ = config.prior_obs_shape;
    variance_estimate_ = config.prior_obs_scale / config.prior_obs_shape;
}

Predictive DiscountFilter::predict(const Eigen::VectorXd& regressors) const {
    const Eigen::MatrixXd prior_cov = cov_ / delta_;
    Predictive pred;
    pred.location = regressors.dot(mean_);
    const double spread = regressors.dot(prior_cov * regressors);
    if (known_variance_) {
        pred.variance = spread + *known_variance_;
    } else {
        pred.variance = variance_estimate_ * (spread + 1.0);
        pred.dof = dof_;
    }
    if (!(pred.variance >= kMinPredictiveVariance)) {
        std::ostringstream msg;
        msg << "predictive variance " << pred.variance << " below " << kMinPredictiveVariance;
        throw NumericalError(msg.str());
    }
    return pred;
}

double DiscountFilter::update(double y, const Eigen::VectorXd& regressors) {
    const Predictive pred = predict(regressors);
    const double log_density = pred.log_density(y);

    const Eigen::MatrixXd prior_cov = cov_ / delta_;
    const Eigen::VectorXd rf = prior_cov * regressors;
    const double error = y - pred.location;
    // Gain and covariance use the scale-free predictive variance when V is unknown.
    const double q = known_variance_ ? pred.variance : pred.variance / variance_estimate_;
    const Eigen::VectorXd gain = rf / q;
    mean_ += gain * error;
    cov_ = prior_cov - gain * gain.transpose() * q;
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
    if (!known_variance_) {
        const double next_dof = dof_ + 1.0;
        variance_estimate_ = variance_estimate_ * (dof_ + error * error / pred.variance) / next_dof;
        dof_ = next_dof;
    }
    return log_density;
}

namespace {

double evidence_with_delta(const TimeSeries& series, int node, ParentSet parents, const DlmConfig& config,
                           double delta) {
    const std::vector<int> regressors_idx = members(parents);
    const int q = 1 + static_cast<int>(regressors_idx.size());
    DiscountFilter filter(q, config, delta);
    Eigen::VectorXd f(q);
    double total = 0.0;
    for (int n = 0; n < series.n_steps(); ++n) {
        f(0) = 1.0;
        for (int r = 0; r < q - 1; ++r) f(r + 1) = series.values(n, regressors_idx[static_cast<std::size_t>(r)] - 1);
        try {
            total += filter.update(series.values(n, node - 1), f);
        } catch (const NumericalError& e) {
            std::ostringstream msg;
            msg << "subject '" << series.subject << "', node " << node << ", parents {";
            for (std::size_t r = 0; r < regressors_idx.size(); ++r) msg << (r ? "," : "") << regressors_idx[r];
            msg << "}, time " << (n + 1) << ": " << e.what();
            throw NumericalError(msg.str());
        }
    }
    return total;
}

void check_node_args(const TimeSeries& series, int node, ParentSet parents) {
    if (node < 1 || node > series.p()) throw InputError("node index out of range: " + std::to_string(node));
    if (contains(parents, node)) throw InputError("a node cannot be its own parent");
    if ((parents & ~full_set(series.p())) != 0) throw InputError("parent set references a missing variable");
    if (series.n_steps() < 1) throw InputError("time series has no time points");
}

}  // namespace

double node_log_evidence(const TimeSeries& series, int node, ParentSet parents, const DlmConfig& config) {
    check_node_args(series, node, parents);
    return evidence_with_delta(series, node, parents, config, config.delta);
}

DiscountChoice best_node_log_evidence(const TimeSeries& series, int node, ParentSet parents,
                                      const DlmConfig& config) {
    check_node_args(series, node, parents);
    if (config.delta_grid.empty()) {
        return {evidence_with_delta(series, node, parents, config, config.delta), config.delta};
    }
    DiscountChoice best{-std::numeric_limits<double>::infinity(), config.delta_grid.front()};
    for (double d : config.delta_grid) {
        const double e = evidence_with_delta(series, node, parents, config, d);
        if (e > best.log_evidence) best = {e, d};
    }
    return best;
}

}  // namespace mdag
