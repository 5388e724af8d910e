#include "mdag/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mdag/errors.hpp"

namespace mdag {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

// Uniform integer in [0, n).
int uniform_index(std::mt19937_64& rng, int n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return static_cast<int>(r % bound);
}

int poisson(std::mt19937_64& rng, double mean) {
    if (mean <= 0.0) return 0;
    const double l = std::exp(-mean);
    int k = 0;
    double prod = uniform01(rng);
    while (prod > l) {
        ++k;
        prod *= uniform01(rng);
    }
    return k;
}

Dag random_dag(std::mt19937_64& rng, int p, int d_max) {
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 1);
    for (int t = p - 1; t > 0; --t) std::swap(order[static_cast<std::size_t>(t)], order[static_cast<std::size_t>(uniform_index(rng, t + 1))]);
    std::vector<ParentSet> parents(static_cast<std::size_t>(p), 0);
    for (int pos = 1; pos < p; ++pos) {
        const int count = uniform_index(rng, std::min(d_max, pos) + 1);
        std::vector<int> pool(order.begin(), order.begin() + pos);
        for (int c = 0; c < count; ++c) {
            const int pick = uniform_index(rng, static_cast<int>(pool.size()));
            parents[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)] - 1)] |= vertex_bit(pool[static_cast<std::size_t>(pick)]);
            pool.erase(pool.begin() + pick);
        }
    }
    return Dag(p, parents);
}

Dag perturb(std::mt19937_64& rng, const Dag& base, double divergence, int d_max) {
    const int p = base.p();
    std::vector<ParentSet> parents = base.parent_sets();
    if (p < 2) return base;
    const int toggles = poisson(rng, divergence);
    for (int t = 0; t < toggles; ++t) {
        for (;;) {
            const int i = uniform_index(rng, p) + 1;
            int j = uniform_index(rng, p - 1) + 1;
            if (j >= i) ++j;
            auto trial = parents;
            trial[static_cast<std::size_t>(i - 1)] ^= vertex_bit(j);
            if (set_size(trial[static_cast<std::size_t>(i - 1)]) <= d_max && is_acyclic(trial)) {
                parents = std::move(trial);
                break;
            }
        }
    }
    return Dag(p, parents);
}

TimeSeries simulate(std::mt19937_64& rng, const Dag& g, const SyntheticSpec& spec, const std::string& subject) {
    const int p = spec.p;
    NormalSampler normal;
    TimeSeries ts;
    ts.subject = subject;
    for (int i = 1; i <= p; ++i) ts.variables.push_back("V" + std::to_string(i));
    ts.values.resize(spec.n_steps, p);
    // theta[i]: intercept followed by one coefficient per parent (ascending)
    std::vector<std::vector<double>> theta(static_cast<std::size_t>(p));
    for (int i = 1; i <= p; ++i) {
        auto& th = theta[static_cast<std::size_t>(i - 1)];
        th.push_back(0.0);
        for (int j = 0; j < set_size(g.parents(i)); ++j) {
            (void)j;
            const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
            th.push_back(sign * spec.coefficient_scale * (0.5 + uniform01(rng)));
        }
    }
    const auto order = g.topological_order();
    const double sd_v = std::sqrt(spec.obs_noise);
    const double sd_w = std::sqrt(spec.drift);
    for (int t = 0; t < spec.n_steps; ++t) {
        for (int i = 1; i <= p; ++i) {
            if (t == 0 || spec.drift == 0.0) continue;
            for (auto& c : theta[static_cast<std::size_t>(i - 1)]) c += sd_w * normal(rng);
        }
        for (int i : order) {
            const auto& th = theta[static_cast<std::size_t>(i - 1)];
            double y = th[0];
            std::size_t c = 1;
            for (int j : members(g.parents(i))) y += th[c++] * ts.values(t, j - 1);
            ts.values(t, i - 1) = y + sd_v * normal(rng);
        }
    }
    return ts;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (p < 1 || p > kMaxVertices) throw InputError("synthetic: p must be in 1..64");
    if (k_subjects < 1) throw InputError("synthetic: k_subjects must be positive");
    if (n_steps < 1) throw InputError("synthetic: n_steps must be positive");
    if (d_max < 0) throw InputError("synthetic: d_max must be nonnegative");
    if (!(divergence >= 0.0) || !std::isfinite(divergence)) throw InputError("synthetic: divergence must be >= 0");
    if (!(obs_noise >= 0.0) || !std::isfinite(obs_noise)) throw InputError("synthetic: obs_noise must be >= 0");
    if (!(drift >= 0.0) || !std::isfinite(drift)) throw InputError("synthetic: drift must be >= 0");
    if (!(coefficient_scale >= 0.0) || !std::isfinite(coefficient_scale)) {
        throw InputError("synthetic: coefficient_scale must be >= 0");
    }
    if (base_dag) {
        if (base_dag->p() != p) throw InputError("synthetic: base DAG has the wrong number of variables");
        if (base_dag->max_in_degree() > d_max) throw InputError("synthetic: base DAG exceeds d_max");
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed;
    const std::uint64_t a = splitmix64(state);
    state = a ^ (index * 0xd1342543de82ef95ULL);
    return splitmix64(state);
}

SyntheticData generate(const SyntheticSpec& spec) {
    spec.validate();
    SyntheticData data;
    {
        std::mt19937_64 rng(derive_seed(spec.seed, 0));
        data.base = spec.base_dag ? *spec.base_dag : random_dag(rng, spec.p, spec.d_max);
    }
    const int width = static_cast<int>(std::to_string(spec.k_subjects).size());
    for (int k = 1; k <= spec.k_subjects; ++k) {
        std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(k)));
        Dag g = perturb(rng, data.base, spec.divergence, spec.d_max);
        std::string id = std::to_string(k);
        id = "S" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
        data.series.push_back(simulate(rng, g, spec, id));
        data.truth.push_back(std::move(g));
    }
    return data;
}

nlohmann::json to_json(const SyntheticSpec& spec) {
    nlohmann::json j;
    j["p"] = spec.p;
    j["k_subjects"] = spec.k_subjects;
    j["n_steps"] = spec.n_steps;
    j["base_dag"] = spec.base_dag ? to_json(*spec.base_dag) : nlohmann::json("random");
    j["d_max"] = spec.d_max;
    j["divergence"] = spec.divergence;
    j["obs_noise"] = spec.obs_noise;
    j["drift"] = spec.drift;
    j["coefficient_scale"] = spec.coefficient_scale;
    j["seed"] = spec.seed;
    return j;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("synthetic spec must be a JSON object");
    SyntheticSpec s;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "p") s.p = value.get<int>();
            else if (key == "k_subjects") s.k_subjects = value.get<int>();
            else if (key == "n_steps") s.n_steps = value.get<int>();
            else if (key == "base_dag") {
                if (value.is_string()) {
                    if (value.get<std::string>() != "random") throw ParseError("base_dag must be \"random\" or a DAG");
                    s.base_dag.reset();
                } else {
                    s.base_dag = dag_from_json(value);
                }
            } else if (key == "d_max") s.d_max = value.get<int>();
            else if (key == "divergence") s.divergence = value.get<double>();
            else if (key == "obs_noise") s.obs_noise = value.get<double>();
            else if (key == "drift") s.drift = value.get<double>();
            else if (key == "coefficient_scale") s.coefficient_scale = value.get<double>();
            else if (key == "seed") s.seed = value.get<std::uint64_t>();
            else throw ParseError("unknown synthetic key '" + key + "'");
        }
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("synthetic spec: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json ground_truth_json(const SyntheticSpec& spec, const SyntheticData& data) {
    nlohmann::json j;
    j["generator"] = kRandomStreamName;
    j["spec"] = to_json(spec);
    j["base"] = to_json(data.base);
    nlohmann::json subjects = nlohmann::json::array();
    for (std::size_t k = 0; k < data.truth.size(); ++k) {
        subjects.push_back({{"subject", data.series[k].subject}, {"dag", to_json(data.truth[k])}});
    }
    j["subjects"] = subjects;
    return j;
}

}  // namespace mdag
