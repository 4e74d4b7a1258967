#pragma once

#include "missionscope/evidence.hpp"
#include "missionscope/graph.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mstest {

// (vertex sequence, arrow sequence)
using PathKey = std::pair<std::vector<std::string>, std::vector<std::string>>;

// Independent enumeration: grow every arrow sequence by every arrow of the
// graph and keep those that stay head-to-tail, simple and evidenced.
inline std::set<PathKey> brute_force_paths(const missionscope::graph::LabeledGraph& g,
                                           const missionscope::evidence::RelevanceMap& relevant, long max_len) {
    auto evidenced = [&](const std::string& id) {
        auto it = relevant.find(id);
        return it != relevant.end() && !it->second.empty();
    };
    std::set<PathKey> out;
    std::vector<PathKey> frontier;
    for (const auto& v : g.vertices) {
        if (evidenced(v.id)) out.insert({{v.id}, {}});
        frontier.push_back({{v.id}, {}});
    }
    for (long n = 1; n <= max_len; ++n) {
        std::vector<PathKey> next;
        for (const auto& [vertices, arrows] : frontier) {
            for (const auto& a : g.arrows) {
                if (a.src != vertices.back() || !evidenced(a.id)) continue;
                bool repeats = false;
                for (const auto& v : vertices) repeats = repeats || v == a.tgt;
                if (repeats) continue;
                PathKey p{vertices, arrows};
                p.first.push_back(a.tgt);
                p.second.push_back(a.id);
                out.insert(p);
                next.push_back(std::move(p));
            }
        }
        frontier = std::move(next);
    }
    return out;
}

} // namespace mstest
