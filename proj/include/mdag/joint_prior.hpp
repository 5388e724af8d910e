#ifndef MDAG_JOINT_PRIOR_HPP
#define MDAG_JOINT_PRIOR_HPP

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mdag/dag.hpp"
#include "mdag/hyperparameters.hpp"
#include "mdag/score_table.hpp"
#include "mdag/subject_network.hpp"

namespace mdag {

/// -sum_{i,j} lambda_{j,i} [ (j in a_i) xor (j in b_i) ] with a P x P slice.
double log_regularity(const Dag& a, const Dag& b, const Eigen::MatrixXd& lambda_slice);
/// Scalar lambda: -lambda * xor_count.
double log_regularity(const Dag& a, const Dag& b, double lambda);
double log_regularity(const Dag& a, const Dag& b, const RegularityPenalty& lambda, int k, int l);

/// sum_i -log C(P, |G_i|), or -inf if some in-degree exceeds d_max.
double log_multiplicity(const Dag& g, int d_max);

/// sum over edges (k,l) of A of eta^{(k,l)}. The additive constant is 0.
double log_network_prior(const SubjectNetwork& a, const DensityReward& eta);

/// Unnormalized joint log posterior of (G^(1..K), A): local scores (which
/// already hold the multiplicity correction) plus regularity over the
/// edges of A plus the network prior. May be -inf, never NaN.
double joint_log_posterior(std::span<const ScoreTable> tables, std::span<const Dag> dags, const SubjectNetwork& a,
                           const Hyperparameters& hp);

/// Threshold above which a scalar lambda forces linked DAGs to coincide and
/// a scalar eta forces a complete network:
///   sum_k sum_i ( max_pi s^(k)(i, pi) - min_pi s^(k)(i, pi) )
/// over finite entries. InputError if a node has no finite entry.
double lambda_eta_star(std::span<const ScoreTable> tables);

}  // namespace mdag

#endif  // MDAG_JOINT_PRIOR_HPP
