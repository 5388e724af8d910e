#include "mdag/subject_network.hpp"

#include <numeric>

#include "mdag/errors.hpp"

namespace mdag {

SubjectPair::SubjectPair(int a, int b) : first(std::min(a, b)), second(std::max(a, b)) {
    if (a == b) throw InputError("subject network: self-loop on " + std::to_string(a));
}

SubjectNetwork::SubjectNetwork(int k_total) : k_total_(k_total) {
    if (k_total < 0) throw InputError("subject network: negative vertex count");
}

SubjectNetwork::SubjectNetwork(int k_total, const std::vector<SubjectPair>& edges) : SubjectNetwork(k_total) {
    for (const auto& e : edges) add(e.first, e.second);
}

SubjectNetwork SubjectNetwork::complete(int k_total) {
    SubjectNetwork net(k_total);
    for (int k = 1; k <= k_total; ++k) {
        for (int l = k + 1; l <= k_total; ++l) net.edges_.insert({k, l});
    }
    return net;
}

bool SubjectNetwork::contains(int k, int l) const { return k != l && edges_.count(SubjectPair(k, l)) > 0; }

void SubjectNetwork::add(int k, int l) {
    if (k < 1 || l < 1 || k > k_total_ || l > k_total_) {
        throw InputError("subject network: edge (" + std::to_string(k) + "," + std::to_string(l) +
                         ") outside 1.." + std::to_string(k_total_));
    }
    edges_.insert(SubjectPair(k, l));
}

void SubjectNetwork::remove(int k, int l) { edges_.erase(SubjectPair(k, l)); }

bool SubjectNetwork::is_complete() const {
    return edges_.size() == static_cast<std::size_t>(k_total_) * static_cast<std::size_t>(k_total_ - 1) / 2;
}

std::vector<std::vector<int>> SubjectNetwork::components() const {
    std::vector<int> root(static_cast<std::size_t>(k_total_ + 1));
    std::iota(root.begin(), root.end(), 0);
    auto find = [&](int v) {
        while (root[static_cast<std::size_t>(v)] != v) v = root[static_cast<std::size_t>(v)] = root[static_cast<std::size_t>(root[static_cast<std::size_t>(v)])];
        return v;
    };
    for (const auto& e : edges_) {
        const int a = find(e.first);
        const int b = find(e.second);
        // Keep the smaller index as root so components come out ordered.
        if (a != b) root[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
    std::vector<std::vector<int>> parts;
    std::vector<int> slot(static_cast<std::size_t>(k_total_ + 1), -1);
    for (int v = 1; v <= k_total_; ++v) {
        const int r = find(v);
        if (slot[static_cast<std::size_t>(r)] < 0) {
            slot[static_cast<std::size_t>(r)] = static_cast<int>(parts.size());
            parts.emplace_back();
        }
        parts[static_cast<std::size_t>(slot[static_cast<std::size_t>(r)])].push_back(v);
    }
    return parts;
}

std::string partition_string(const std::vector<std::vector<int>>& parts) {
    std::string s = "{";
    for (std::size_t c = 0; c < parts.size(); ++c) {
        s += c ? ",{" : "{";
        for (std::size_t v = 0; v < parts[c].size(); ++v) {
            if (v) s += ",";
            s += std::to_string(parts[c][v]);
        }
        s += "}";
    }
    return s + "}";
}

nlohmann::json to_json(const SubjectNetwork& network) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : network.edges()) edges.push_back({e.first, e.second});
    return {{"k_total", network.k_total()}, {"edges", edges}};
}

SubjectNetwork network_from_json(const nlohmann::json& j) {
    try {
        SubjectNetwork net(j.at("k_total").get<int>());
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw ParseError("network edge must be a pair");
            net.add(e[0].get<int>(), e[1].get<int>());
        }
        return net;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("network JSON: ") + e.what());
    }
}

}  // namespace mdag
