#ifndef MDAG_SYNTHETIC_HPP
#define MDAG_SYNTHETIC_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "mdag/dag.hpp"
#include "mdag/time_series.hpp"

namespace mdag {

/// Name and version of the random stream, recorded in every output.
inline constexpr const char* kRandomStreamName = "mt19937_64/splitmix64-v1";

struct SyntheticSpec {
    int p = 6;
    int k_subjects = 6;
    int n_steps = 200;
    std::optional<Dag> base_dag;  ///< random base DAG with in-degree <= d_max when empty
    int d_max = 3;
    double divergence = 1.0;        ///< Poisson mean of membership toggles per subject
    double obs_noise = 1.0;         ///< observation variance v
    double drift = 0.0;             ///< coefficient random-walk variance w per step
    double coefficient_scale = 1.0; ///< |theta(0)| ~ scale * U(0.5, 1.5) with random sign
    std::uint64_t seed = 1;

    void validate() const;
};

struct SyntheticData {
    Dag base;
    std::vector<Dag> truth;
    std::vector<TimeSeries> series;
};

/// Draws the base DAG, one perturbed DAG per subject and forward-simulates
///   Y_i(t) = theta_i0(t) + sum_{j in pa(i)} theta_ij(t) Y_j(t) + v_i(t),  v ~ N(0, obs_noise)
///   theta(t) = theta(t-1) + w(t),                                      w ~ N(0, drift I)
/// Subject k uses its own sub-seed, so each subject is reproducible on its own.
SyntheticData generate(const SyntheticSpec& spec);

/// Sub-seed of stream `index` (0 = base DAG, k = subject k).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Standard normal draws from a 64-bit engine (Box-Muller, platform independent).
class NormalSampler {
public:
    template <class Engine>
    double operator()(Engine& engine);

private:
    std::optional<double> spare_;
};

nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
/// {"generator": ..., "spec": ..., "base": Dag, "subjects": [{"subject", "dag"}]}
nlohmann::json ground_truth_json(const SyntheticSpec& spec, const SyntheticData& data);

}  // namespace mdag

#include <cmath>
#include <numbers>

namespace mdag {

template <class Engine>
double NormalSampler::operator()(Engine& engine) {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    const auto uniform = [&engine] { return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53; };
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mdag

#endif  // MDAG_SYNTHETIC_HPP
