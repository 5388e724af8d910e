#include "mdag/hyperparameters.hpp"

#include <cmath>

#include "mdag/errors.hpp"
#include "mdag/text_format.hpp"

namespace mdag {

RegularityPenalty::RegularityPenalty(double scalar) : scalar_(scalar) {
    if (!(scalar >= 0.0) || !std::isfinite(scalar)) throw InputError("lambda must be finite and nonnegative");
}

RegularityPenalty::RegularityPenalty(std::map<SubjectPair, Eigen::MatrixXd> table) : table_(std::move(table)) {
    for (const auto& [pair, m] : *table_) {
        if (!m.allFinite() || (m.array() < 0.0).any()) {
            throw InputError("lambda table entries must be finite and nonnegative");
        }
    }
}

double RegularityPenalty::at(int k, int l, int j, int i) const {
    if (!table_) return scalar_;
    const auto it = table_->find(SubjectPair(k, l));
    if (it == table_->end()) {
        throw InputError("lambda table has no entry for pair (" + std::to_string(k) + "," + std::to_string(l) + ")");
    }
    if (j < 1 || i < 1 || j > it->second.rows() || i > it->second.cols()) throw InputError("lambda index out of range");
    return it->second(j - 1, i - 1);
}

Eigen::MatrixXd RegularityPenalty::slice(int k, int l, int p) const {
    if (!table_) return Eigen::MatrixXd::Constant(p, p, scalar_);
    const auto it = table_->find(SubjectPair(k, l));
    if (it == table_->end()) {
        throw InputError("lambda table has no entry for pair (" + std::to_string(k) + "," + std::to_string(l) + ")");
    }
    if (it->second.rows() != p || it->second.cols() != p) throw InputError("lambda matrix has wrong dimension");
    return it->second;
}

double RegularityPenalty::max_entry() const {
    if (!table_) return scalar_;
    double m = 0.0;
    for (const auto& [pair, mat] : *table_) m = std::max(m, mat.size() ? mat.maxCoeff() : 0.0);
    return m;
}

void RegularityPenalty::validate(int k_total, int p) const {
    if (!table_) return;
    for (int k = 1; k <= k_total; ++k) {
        for (int l = k + 1; l <= k_total; ++l) {
            const auto it = table_->find(SubjectPair(k, l));
            if (it == table_->end()) {
                throw InputError("lambda table misses pair (" + std::to_string(k) + "," + std::to_string(l) + ")");
            }
            if (it->second.rows() != p || it->second.cols() != p) {
                throw InputError("lambda matrix for pair (" + std::to_string(k) + "," + std::to_string(l) +
                                 ") must be " + std::to_string(p) + "x" + std::to_string(p));
            }
        }
    }
    for (const auto& [pair, m] : *table_) {
        if (pair.second > k_total) throw InputError("lambda table references a subject beyond " + std::to_string(k_total));
    }
}

DensityReward::DensityReward(double scalar) : scalar_(scalar) {
    if (!std::isfinite(scalar)) throw InputError("eta must be finite");
}

DensityReward::DensityReward(std::map<SubjectPair, double> table) : table_(std::move(table)) {
    for (const auto& [pair, v] : *table_) {
        if (!std::isfinite(v)) throw InputError("eta table entries must be finite");
    }
}

double DensityReward::at(int k, int l) const {
    if (!table_) return scalar_;
    const auto it = table_->find(SubjectPair(k, l));
    if (it == table_->end()) {
        throw InputError("eta table has no entry for pair (" + std::to_string(k) + "," + std::to_string(l) + ")");
    }
    return it->second;
}

double DensityReward::max_entry() const {
    if (!table_) return scalar_;
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& [pair, v] : *table_) m = std::max(m, v);
    return m;
}

void DensityReward::validate(int k_total) const {
    if (!table_) return;
    for (int k = 1; k <= k_total; ++k) {
        for (int l = k + 1; l <= k_total; ++l) {
            if (!table_->count(SubjectPair(k, l))) {
                throw InputError("eta table misses pair (" + std::to_string(k) + "," + std::to_string(l) + ")");
            }
        }
    }
    for (const auto& [pair, v] : *table_) {
        if (pair.second > k_total) throw InputError("eta table references a subject beyond " + std::to_string(k_total));
    }
}

void Hyperparameters::validate(int k_total, int p) const {
    if (d_max < 0) throw InputError("d_max must be nonnegative");
    lambda.validate(k_total, p);
    eta.validate(k_total);
}

namespace {

SubjectPair pair_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw ParseError("\"pair\" must be [k, l]");
    return SubjectPair(j[0].get<int>(), j[1].get<int>());
}

}  // namespace

nlohmann::json to_json(const Hyperparameters& hp) {
    nlohmann::json j;
    if (hp.lambda.is_scalar()) {
        j["lambda"] = hp.lambda.scalar();
    } else {
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& [pair, m] : hp.lambda.table()) {
            nlohmann::json rows = nlohmann::json::array();
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                nlohmann::json row = nlohmann::json::array();
                for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
                rows.push_back(row);
            }
            pairs.push_back({{"pair", {pair.first, pair.second}}, {"matrix", rows}});
        }
        j["lambda"] = {{"pairs", pairs}};
    }
    if (hp.eta.is_scalar()) {
        j["eta"] = hp.eta.scalar();
    } else {
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& [pair, v] : hp.eta.table()) pairs.push_back({{"pair", {pair.first, pair.second}}, {"value", v}});
        j["eta"] = {{"pairs", pairs}};
    }
    j["d_max"] = hp.d_max;
    return j;
}

Hyperparameters hyperparameters_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("hyperparameter file must hold a JSON object");
    Hyperparameters hp;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "lambda") {
                if (value.is_number()) {
                    hp.lambda = RegularityPenalty(value.get<double>());
                } else {
                    std::map<SubjectPair, Eigen::MatrixXd> table;
                    for (const auto& entry : value.at("pairs")) {
                        const auto& rows = entry.at("matrix");
                        const auto n = static_cast<Eigen::Index>(rows.size());
                        Eigen::MatrixXd m(n, n);
                        for (Eigen::Index r = 0; r < n; ++r) {
                            if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != n) {
                                throw ParseError("lambda matrix must be square");
                            }
                            for (Eigen::Index c = 0; c < n; ++c) {
                                m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
                            }
                        }
                        if (!table.emplace(pair_from_json(entry.at("pair")), m).second) {
                            throw ParseError("duplicate lambda pair");
                        }
                    }
                    hp.lambda = RegularityPenalty(std::move(table));
                }
            } else if (key == "eta") {
                if (value.is_number()) {
                    hp.eta = DensityReward(value.get<double>());
                } else {
                    std::map<SubjectPair, double> table;
                    for (const auto& entry : value.at("pairs")) {
                        if (!table.emplace(pair_from_json(entry.at("pair")), entry.at("value").get<double>()).second) {
                            throw ParseError("duplicate eta pair");
                        }
                    }
                    hp.eta = DensityReward(std::move(table));
                }
            } else if (key == "d_max") {
                hp.d_max = value.get<int>();
                if (hp.d_max < 0) throw ParseError("d_max must be nonnegative");
            } else {
                throw ParseError("unknown hyperparameter key '" + key + "'");
            }
        }
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("hyperparameters: ") + e.what());
    }
    return hp;
}

Hyperparameters read_hyperparameters(const std::filesystem::path& path) {
    try {
        return hyperparameters_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace mdag
