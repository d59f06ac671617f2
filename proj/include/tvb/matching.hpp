#pragma once
// Maximum bipartite matching (Hopcroft–Karp) and proper edge colouring with
// at most Delta+1 colours (Misra–Gries constructive Vizing).

#include <functional>
#include <queue>

#include "core.hpp"

namespace tvb {

struct BipartiteMatching {
    std::size_t size = 0;
    std::vector<std::int64_t> left_to_right;  // -1 if unmatched
    std::vector<std::int64_t> right_to_left;
    bool perfect_on_left() const { return size == left_to_right.size(); }
};

// adj[l] lists right vertices adjacent to left vertex l.
inline BipartiteMatching hopcroft_karp(std::size_t n_left, std::size_t n_right, const std::vector<std::vector<std::size_t>>& adj) {
    BipartiteMatching m;
    m.left_to_right.assign(n_left, -1);
    m.right_to_left.assign(n_right, -1);
    constexpr std::size_t INF = SIZE_MAX;
    std::vector<std::size_t> dist(n_left);
    auto bfs = [&]() {
        std::queue<std::size_t> q;
        bool found = false;
        for (std::size_t l = 0; l < n_left; ++l) {
            if (m.left_to_right[l] < 0) { dist[l] = 0; q.push(l); }
            else dist[l] = INF;
        }
        while (!q.empty()) {
            std::size_t l = q.front();
            q.pop();
            for (std::size_t r : adj[l]) {
                std::int64_t l2 = m.right_to_left[r];
                if (l2 < 0) found = true;
                else if (dist[l2] == INF) { dist[l2] = dist[l] + 1; q.push(static_cast<std::size_t>(l2)); }
            }
        }
        return found;
    };
    std::vector<std::size_t> it(n_left);
    std::function<bool(std::size_t)> dfs = [&](std::size_t l) -> bool {
        for (; it[l] < adj[l].size(); ++it[l]) {
            std::size_t r = adj[l][it[l]];
            std::int64_t l2 = m.right_to_left[r];
            if (l2 < 0 || (dist[l2] == dist[l] + 1 && dfs(static_cast<std::size_t>(l2)))) {
                m.left_to_right[l] = static_cast<std::int64_t>(r);
                m.right_to_left[r] = static_cast<std::int64_t>(l);
                return true;
            }
        }
        dist[l] = INF;
        return false;
    };
    while (bfs()) {
        std::fill(it.begin(), it.end(), 0);
        for (std::size_t l = 0; l < n_left; ++l)
            if (m.left_to_right[l] < 0 && dfs(l)) ++m.size;
    }
    return m;
}

// ---------------------------------------------------------------- edge colouring

// Proper edge colouring of the simple graph (n, edges) with colours
// 0..Delta. Returns colour per edge index.
inline std::vector<std::size_t> misra_gries_edge_colouring(std::size_t n, const std::vector<Edge>& edges) {
    std::vector<std::size_t> deg(n, 0);
    for (const Edge& e : edges) { ++deg[e.u]; ++deg[e.v]; }
    const std::size_t delta = n ? *std::max_element(deg.begin(), deg.end()) : 0;
    const std::size_t K = delta + 1;
    constexpr std::int64_t NONE = -1;
    // at[v*K + c] = neighbour joined to v by colour c
    std::vector<std::int64_t> at(n * K, NONE);
    std::vector<std::vector<Vertex>> nb(n);
    for (const Edge& e : edges) { nb[e.u].push_back(e.v); nb[e.v].push_back(e.u); }
    std::unordered_map<std::uint64_t, std::int64_t> col;  // pair -> colour
    auto key = [](Vertex a, Vertex b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    };
    auto colour_of = [&](Vertex a, Vertex b) {
        auto it = col.find(key(a, b));
        return it == col.end() ? NONE : it->second;
    };
    auto is_free = [&](Vertex v, std::size_t c) { return at[v * K + c] == NONE; };
    auto set_colour = [&](Vertex a, Vertex b, std::int64_t c) {
        std::int64_t old = colour_of(a, b);
        if (old != NONE) { at[a * K + old] = NONE; at[b * K + old] = NONE; }
        if (c == NONE) { col.erase(key(a, b)); return; }
        col[key(a, b)] = c;
        at[a * K + c] = b;
        at[b * K + c] = a;
    };
    auto free_colour = [&](Vertex v) {
        for (std::size_t c = 0; c < K; ++c)
            if (is_free(v, c)) return c;
        throw std::logic_error("no free colour");
    };

    for (const Edge& e : edges) {
        const Vertex u = e.u;
        // maximal fan at u starting with v
        std::vector<Vertex> fan{e.v};
        std::vector<char> in_fan(n, 0);
        in_fan[e.v] = 1;
        bool grew = true;
        while (grew) {
            grew = false;
            for (Vertex w : nb[u]) {
                if (in_fan[w]) continue;
                std::int64_t cw = colour_of(u, w);
                if (cw != NONE && is_free(fan.back(), static_cast<std::size_t>(cw))) {
                    fan.push_back(w);
                    in_fan[w] = 1;
                    grew = true;
                    break;
                }
            }
        }
        const std::size_t c = free_colour(u);
        const std::size_t d = free_colour(fan.back());
        // invert the cd-path starting at u
        if (!is_free(u, d)) {
            std::vector<std::pair<Vertex, Vertex>> path;
            Vertex x = u;
            std::size_t want = d;
            while (at[x * K + want] != NONE) {
                Vertex y = static_cast<Vertex>(at[x * K + want]);
                path.emplace_back(x, y);
                x = y;
                want = (want == d) ? c : d;
            }
            std::vector<std::int64_t> old(path.size());
            for (std::size_t i = 0; i < path.size(); ++i) old[i] = colour_of(path[i].first, path[i].second);
            for (auto& p : path) set_colour(p.first, p.second, NONE);
            for (std::size_t i = 0; i < path.size(); ++i)
                set_colour(path[i].first, path[i].second, old[i] == static_cast<std::int64_t>(d) ? static_cast<std::int64_t>(c) : static_cast<std::int64_t>(d));
        }
        // find w in fan with prefix still a fan and d free on w
        std::size_t w = fan.size();
        for (std::size_t i = 0; i < fan.size(); ++i) {
            if (i > 0) {
                std::int64_t ci = colour_of(u, fan[i]);
                if (ci == NONE || !is_free(fan[i - 1], static_cast<std::size_t>(ci))) break;
            }
            if (is_free(fan[i], d)) { w = i; break; }
        }
        if (w == fan.size()) throw std::logic_error("edge colouring: no rotatable fan prefix");
        // rotate fan[0..w]
        std::vector<std::int64_t> shifted(w);
        for (std::size_t i = 0; i < w; ++i) shifted[i] = colour_of(u, fan[i + 1]);
        for (std::size_t i = 1; i <= w; ++i) set_colour(u, fan[i], NONE);
        for (std::size_t i = 0; i < w; ++i) set_colour(u, fan[i], shifted[i]);
        set_colour(u, fan[w], static_cast<std::int64_t>(d));
    }
    std::vector<std::size_t> out(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        std::int64_t c = colour_of(edges[i].u, edges[i].v);
        if (c == NONE) throw std::logic_error("edge colouring left an edge uncoloured");
        out[i] = static_cast<std::size_t>(c);
    }
    return out;
}

inline bool is_proper_edge_colouring(std::size_t n, const std::vector<Edge>& edges, const std::vector<std::size_t>& colour) {
    std::set<std::pair<Vertex, std::size_t>> seen;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!seen.insert({edges[i].u, colour[i]}).second) return false;
        if (!seen.insert({edges[i].v, colour[i]}).second) return false;
    }
    (void)n;
    return true;
}

// Colour classes of a proper edge colouring, largest first (ties by colour).
inline std::vector<std::vector<std::size_t>> colour_classes_by_size(const std::vector<std::size_t>& colour) {
    std::map<std::size_t, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < colour.size(); ++i) classes[colour[i]].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [_, v] : classes) out.push_back(std::move(v));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return out;
}

// Largest matching obtained as a colour class of the Delta+1 colouring;
// has at least ceil(e / (Delta+1)) edges. Returns edge indices.
inline std::vector<std::size_t> vizing_matching(std::size_t n, const std::vector<Edge>& edges) {
    if (edges.empty()) return {};
    auto classes = colour_classes_by_size(misra_gries_edge_colouring(n, edges));
    return classes.front();
}

}  // namespace tvb
