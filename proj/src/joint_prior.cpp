#include "mdag/joint_prior.hpp"

#include <cmath>

#include "mdag/errors.hpp"

namespace mdag {

namespace {

void require_same_size(const Dag& a, const Dag& b) {
    if (a.p() != b.p()) throw InputError("log_regularity: graphs have different vertex counts");
}

}  // namespace

double log_regularity(const Dag& a, const Dag& b, const Eigen::MatrixXd& lambda_slice) {
    require_same_size(a, b);
    if (lambda_slice.rows() != a.p() || lambda_slice.cols() != a.p()) {
        throw InputError("log_regularity: lambda slice must be P x P");
    }
    double total = 0.0;
    for (int i = 1; i <= a.p(); ++i) {
        for (int j : members(a.parents(i) ^ b.parents(i))) total += lambda_slice(j - 1, i - 1);
    }
    return -total;
}

double log_regularity(const Dag& a, const Dag& b, double lambda) {
    require_same_size(a, b);
    return -lambda * distance(a, b).xor_count;
}

double log_regularity(const Dag& a, const Dag& b, const RegularityPenalty& lambda, int k, int l) {
    if (lambda.is_scalar()) return log_regularity(a, b, lambda.scalar());
    return log_regularity(a, b, lambda.slice(k, l, a.p()));
}

double log_multiplicity(const Dag& g, int d_max) {
    double total = 0.0;
    for (int i = 1; i <= g.p(); ++i) {
        const int size = set_size(g.parents(i));
        if (size > d_max) return kNegInf;
        total -= log_binomial(g.p(), size);
    }
    return total;
}

double log_network_prior(const SubjectNetwork& a, const DensityReward& eta) {
    double total = 0.0;
    for (const auto& e : a.edges()) total += eta.at(e.first, e.second);
    return total;
}

double joint_log_posterior(std::span<const ScoreTable> tables, std::span<const Dag> dags, const SubjectNetwork& a,
                           const Hyperparameters& hp) {
    if (tables.size() != dags.size()) throw InputError("joint_log_posterior: one DAG per score table expected");
    if (a.k_total() != static_cast<int>(dags.size())) {
        throw InputError("joint_log_posterior: network size does not match the number of DAGs");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < tables.size(); ++k) {
        if (dags[k].p() != tables[k].p()) throw InputError("joint_log_posterior: DAG and table sizes differ");
        total += tables[k].dag_score(dags[k]);
    }
    if (total == kNegInf) return kNegInf;
    for (const auto& e : a.edges()) {
        total += log_regularity(dags[static_cast<std::size_t>(e.first - 1)], dags[static_cast<std::size_t>(e.second - 1)],
                                hp.lambda, e.first, e.second);
    }
    total += log_network_prior(a, hp.eta);
    return total;
}

double lambda_eta_star(std::span<const ScoreTable> tables) {
    double total = 0.0;
    for (const auto& table : tables) {
        for (int i = 1; i <= table.p(); ++i) {
            double hi = kNegInf;
            double lo = std::numeric_limits<double>::infinity();
            for (const auto& e : table.entries(i)) {
                if (std::isnan(e.score)) throw InputError("lambda_eta_star: table '" + table.subject() + "' is incomplete");
                if (!std::isfinite(e.score)) continue;
                hi = std::max(hi, e.score);
                lo = std::min(lo, e.score);
            }
            if (hi == kNegInf) {
                throw InputError("lambda_eta_star: node " + std::to_string(i) + " of '" + table.subject() +
                                 "' has no finite score");
            }
            total += hi - lo;
        }
    }
    return total;
}

}  // namespace mdag
