#pragma once
// Equitable proper colouring: r independent classes whose sizes differ by at
// most one. Greedy first fit into the smallest admissible class, then
// balancing by moving vertices along class-to-class paths.

#include <queue>

#include "params.hpp"

namespace tvb {

struct EquitableColouring {
    std::vector<std::vector<Vertex>> parts;
    std::vector<std::size_t> colour;  // per vertex
    std::size_t moves = 0;
    bool balanced = false;
};

inline Json to_json(const EquitableColouring& c) {
    return Json{{"parts", c.parts}, {"moves", c.moves}, {"balanced", c.balanced}};
}

inline bool is_equitable_colouring(const PatternGraph& H, const EquitableColouring& c) {
    if (c.colour.size() != H.n()) return false;
    for (const Edge& e : H.edges())
        if (c.colour[e.u] == c.colour[e.v]) return false;
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& p : c.parts) { lo = std::min(lo, p.size()); hi = std::max(hi, p.size()); }
    return c.parts.empty() || hi - lo <= 1;
}

inline Expected<EquitableColouring> equitable_colouring(const PatternGraph& H, std::size_t r, std::size_t round_cap = 0, std::uint64_t seed = 1) {
    if (r == 0 || r < H.max_degree() + 1) throw Error("PreconditionViolated", "r must be at least Delta(H)+1");
    const std::size_t n = H.n();
    if (round_cap == 0) round_cap = 4 * n * n + 16;
    std::vector<std::size_t> col(n, 0);
    std::vector<std::size_t> size(r, 0);
    // first fit, highest degree first, into the smallest class with no neighbour
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) { return H.degree(a) > H.degree(b); });
    std::vector<char> placed(n, 0);
    for (Vertex v : order) {
        std::vector<char> blocked(r, 0);
        for (const auto& inc : H.incident(v))
            if (placed[inc.nbr]) blocked[col[inc.nbr]] = 1;
        std::size_t best = r;
        for (std::size_t c = 0; c < r; ++c)
            if (!blocked[c] && (best == r || size[c] < size[best])) best = c;
        col[v] = best;  // exists since r > Delta
        ++size[best];
        placed[v] = 1;
    }
    // movable[a][b]: some vertex of class a has no neighbour in class b
    auto movable_vertex = [&](std::size_t a, std::size_t b) -> std::optional<Vertex> {
        for (Vertex v = 0; v < n; ++v) {
            if (col[v] != a) continue;
            bool ok = true;
            for (const auto& inc : H.incident(v))
                if (col[inc.nbr] == b) { ok = false; break; }
            if (ok) return v;
        }
        return std::nullopt;
    };
    std::size_t moves = 0, rounds = 0;
    while (rounds++ < round_cap) {
        auto [mn, mx] = std::minmax_element(size.begin(), size.end());
        if (r == 0 || *mx - *mn <= 1) break;
        // BFS over classes from every largest class to any smallest class
        const std::size_t big = *mx, small = *mn;
        std::vector<std::int64_t> prev(r, -2);
        std::queue<std::size_t> q;
        for (std::size_t c = 0; c < r; ++c)
            if (size[c] == big) { prev[c] = -1; q.push(c); }
        std::int64_t target = -1;
        while (!q.empty() && target < 0) {
            std::size_t a = q.front();
            q.pop();
            for (std::size_t b = 0; b < r; ++b) {
                if (prev[b] != -2 || !movable_vertex(a, b)) continue;
                prev[b] = static_cast<std::int64_t>(a);
                if (size[b] == small) { target = static_cast<std::int64_t>(b); break; }
                q.push(b);
            }
        }
        if (target < 0) break;
        std::vector<std::size_t> path;
        for (std::int64_t c = target; c >= 0; c = prev[c]) path.push_back(static_cast<std::size_t>(c));
        std::reverse(path.begin(), path.end());
        // choose movers before moving: v_i moves from path[i] to path[i+1]
        std::vector<Vertex> movers;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) movers.push_back(*movable_vertex(path[i], path[i + 1]));
        for (std::size_t i = 0; i + 1 < path.size(); ++i) col[movers[i]] = path[i + 1];
        --size[path.front()];
        ++size[path.back()];
        ++moves;
    }
    EquitableColouring out;
    out.colour = col;
    out.parts.assign(r, {});
    for (Vertex v = 0; v < n; ++v) out.parts[col[v]].push_back(v);
    out.moves = moves;
    auto [mn, mx] = std::minmax_element(size.begin(), size.end());
    out.balanced = *mx - *mn <= 1;
    if (!out.balanced) return make_failure("equitable_colouring", "Unbalanceable", seed, Json{{"best", to_json(out)}, {"rounds", rounds}});
    return out;
}

}  // namespace tvb
