#pragma once

#include "missionscope/evidence.hpp"
#include "missionscope/graph.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace mstest {

namespace msg = missionscope::graph;

// Text that exercises XML escaping: markup characters, quotes, whitespace
// control characters and multi-byte UTF-8.
inline std::string random_text(std::mt19937& rng, std::size_t max_len = 12) {
    static const std::vector<std::string> pieces = {
        "a", "Z", "0", "7", " ", "  ", "<", ">", "&", "\"", "'", "\t", "\n", "\r", "\r\n",
        "é", "Σ", "→", "🛰", "]]>", "&amp;", "-", "_", ".", "/", ":", "=", "ab c",
    };
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::string out;
    for (std::size_t i = len(rng); i > 0; --i) out += pieces[pick(rng)];
    return out;
}

inline std::string random_key(std::mt19937& rng) {
    static const std::vector<std::string> keys = {"color", "weight", "note", "x-y", "owner.name", "ré", "k_1"};
    return keys[std::uniform_int_distribution<std::size_t>(0, keys.size() - 1)(rng)];
}

// Random valid Sigma graph: components, arbitrary arrows (no self-loops unless
// allowed), random attributes and descriptor sets.
inline msg::LabeledGraph random_sigma(std::mt19937& rng, std::size_t max_vertices, bool self_loops = false,
                                      std::size_t max_arrows = 0) {
    msg::LabeledGraph g;
    g.kind = msg::GraphKind::Structure;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_vertices)(rng);
    if (max_arrows == 0) max_arrows = 2 * n;
    std::bernoulli_distribution coin(0.4);
    for (std::size_t i = 0; i < n; ++i) {
        msg::Vertex v{"v" + std::to_string(i), msg::VertexKind::Component, random_text(rng), {}};
        if (coin(rng)) v.attributes[random_key(rng)] = random_text(rng);
        g.vertices.push_back(std::move(v));
    }
    if (coin(rng)) g.attributes["mission"] = random_text(rng);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(0, max_arrows)(rng);
    std::uniform_int_distribution<std::size_t> end(0, n - 1);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t s = end(rng), t = end(rng);
        if (s == t && !self_loops) continue;
        msg::Arrow a{"a" + std::to_string(i), g.vertices[s].id, g.vertices[t].id,
                     coin(rng) ? "contains" : "information-flow", {}};
        if (coin(rng)) a.attributes[random_key(rng)] = random_text(rng);
        g.arrows.push_back(std::move(a));
    }
    const auto& categories = msg::all_descriptor_categories();
    auto maybe_descriptors = [&](msg::ElementType type, const std::string& id) {
        if (!coin(rng)) return;
        msg::DescriptorSet set{{type, id}, "ns." + id, {}};
        const std::size_t entries = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
        for (std::size_t e = 0; e < entries; ++e) {
            set.entries.push_back({categories[std::uniform_int_distribution<std::size_t>(0, categories.size() - 1)(rng)],
                                   "key" + std::to_string(e), random_text(rng)});
        }
        g.descriptors.push_back(std::move(set));
    };
    for (const auto& v : g.vertices) maybe_descriptors(msg::ElementType::Vertex, v.id);
    for (const auto& a : g.arrows) maybe_descriptors(msg::ElementType::Arrow, a.id);
    return g;
}

// Random relevance map over the vertices and arrows of g: each element is
// evidenced with probability p, with one to three attack ids.
inline missionscope::evidence::RelevanceMap random_relevance(std::mt19937& rng, const msg::LabeledGraph& g,
                                                             double p) {
    static const std::vector<std::string> ids = {"CVE-2020-0001", "CVE-2020-0002", "CVE-2021-1111",
                                                 "CWE-20", "CAPEC-10"};
    std::bernoulli_distribution pick(p);
    std::uniform_int_distribution<std::size_t> count(1, 3);
    std::uniform_int_distribution<std::size_t> which(0, ids.size() - 1);
    missionscope::evidence::RelevanceMap out;
    auto assign = [&](const std::string& id) {
        if (!pick(rng)) return;
        std::vector<std::string> set;
        for (std::size_t i = count(rng); i > 0; --i) set.push_back(ids[which(rng)]);
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
        out[id] = set;
    };
    for (const auto& v : g.vertices) assign(v.id);
    for (const auto& a : g.arrows) assign(a.id);
    return out;
}

} // namespace mstest
