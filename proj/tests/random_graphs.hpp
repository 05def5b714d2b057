#pragma once

#include <iterator>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <wharf/hybrid.hpp>

namespace wharf::testing {

using Edges = std::vector<std::pair<VertexId, VertexId>>;
using EdgeSet = std::set<std::pair<VertexId, VertexId>>;

inline EdgeSet random_edges(std::mt19937_64& rng, VertexId n, std::size_t m)
{
    EdgeSet s;
    for (VertexId v = 0; v + 1 < n; ++v) {
        s.emplace(v, v + 1);
    }
    while (s.size() < m) {
        VertexId a = static_cast<VertexId>(rng() % n);
        VertexId b = static_cast<VertexId>(rng() % n);
        if (a != b) {
            s.insert(std::minmax(a, b));
        }
    }
    return s;
}

// Random batch of inserts and deletes against `edges`, which is updated in place.
// Deletes may strand vertices (they then vanish); inserts may name new vertex ids.
inline EdgeBatch random_batch(std::mt19937_64& rng, EdgeSet& edges, VertexId id_space, std::size_t ops)
{
    EdgeBatch b;
    EdgeSet touched;
    while (b.ops.size() < ops) {
        if (rng() % 2 == 0 && !edges.empty()) {
            auto it = edges.begin();
            std::advance(it, static_cast<std::ptrdiff_t>(rng() % edges.size()));
            if (touched.insert(*it).second) {
                b.ops.push_back({EdgeOp::remove, it->second, it->first});
                edges.erase(it);
            }
        } else {
            VertexId a = static_cast<VertexId>(rng() % id_space);
            VertexId c = static_cast<VertexId>(rng() % id_space);
            auto const e = std::minmax(a, c);
            if (a != c && !edges.count(e) && touched.insert(e).second) {
                b.ops.push_back({EdgeOp::insert, a, c});
                edges.insert(e);
            }
        }
    }
    return b;
}

}  // namespace wharf::testing
