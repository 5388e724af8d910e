#ifndef MDAG_HYPERPARAMETERS_HPP
#define MDAG_HYPERPARAMETERS_HPP

#include <filesystem>
#include <map>
#include <optional>

#include <Eigen/Dense>
#include <json.hpp>

#include "mdag/subject_network.hpp"

namespace mdag {

/// Regularity penalties lambda_{j,i}^{(k,l)} >= 0: either one scalar for
/// every edge and pair, or a P x P matrix per subject pair with entry
/// (j-1, i-1) penalizing a disagreement on the edge j -> i.
class RegularityPenalty {
public:
    RegularityPenalty() = default;
    explicit RegularityPenalty(double scalar);
    explicit RegularityPenalty(std::map<SubjectPair, Eigen::MatrixXd> table);

    bool is_scalar() const { return !table_; }
    double scalar() const { return scalar_; }
    const std::map<SubjectPair, Eigen::MatrixXd>& table() const { return *table_; }

    double at(int k, int l, int j, int i) const;
    /// P x P slice for the pair (k, l); a constant matrix in the scalar case.
    Eigen::MatrixXd slice(int k, int l, int p) const;
    /// Largest entry over all pairs.
    double max_entry() const;

    /// Table form must cover every pair of 1..k_total with P x P nonnegative matrices.
    void validate(int k_total, int p) const;

private:
    double scalar_ = 0.0;
    std::optional<std::map<SubjectPair, Eigen::MatrixXd>> table_;
};

/// Network-density rewards eta^{(k,l)}, scalar or per pair. Any real value.
class DensityReward {
public:
    DensityReward() = default;
    explicit DensityReward(double scalar);
    explicit DensityReward(std::map<SubjectPair, double> table);

    bool is_scalar() const { return !table_; }
    double scalar() const { return scalar_; }
    const std::map<SubjectPair, double>& table() const { return *table_; }
    double at(int k, int l) const;
    double max_entry() const;
    void validate(int k_total) const;

private:
    double scalar_ = 0.0;
    std::optional<std::map<SubjectPair, double>> table_;
};

struct Hyperparameters {
    RegularityPenalty lambda;
    DensityReward eta;
    int d_max = 3;

    void validate(int k_total, int p) const;
};

/// Hyperparameter file:
///
///   {"lambda": 4.0, "eta": 0.0, "d_max": 3}
///
/// or with tables
///
///   {"lambda": {"pairs": [{"pair": [1, 2], "matrix": [[...], ...]}]},
///    "eta": {"pairs": [{"pair": [1, 2], "value": 5.0}]}}
///
/// Missing keys take the defaults lambda = 0, eta = 0, d_max = 3.
nlohmann::json to_json(const Hyperparameters& hp);
Hyperparameters hyperparameters_from_json(const nlohmann::json& j);
Hyperparameters read_hyperparameters(const std::filesystem::path& path);

}  // namespace mdag

#endif  // MDAG_HYPERPARAMETERS_HPP
