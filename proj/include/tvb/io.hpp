#pragma once
// JSON formats for collections, 3-graphs, patterns, templates and
// embeddings, plus file helpers.

#include <fstream>
#include <sstream>

#include "core.hpp"
#include "templates.hpp"

namespace tvb {

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IOError", "cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error("ParseError", path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw Error("IOError", "cannot write " + path);
    out << j.dump(2) << "\n";
}

inline Rational parse_rational(const Json& j) {
    if (j.is_number_integer()) return Rational(BigInt(j.get<std::int64_t>()));
    if (j.is_number()) return to_rational(j.get<double>());
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(BigInt(s));
    return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
}

namespace detail {
inline void require(const Json& j, const char* key, const char* what) {
    if (!j.contains(key)) throw Error("ParseError", std::string(what) + " is missing \"" + key + "\"");
}
}  // namespace detail

// ---------------------------------------------------------------- collections

inline Json to_json(const GraphCollection& gc) {
    Json edges = Json::object();
    Json bip = Json::object();
    for (Colour c = 0; c < gc.colours(); ++c) {
        Json list = Json::array();
        for (const Edge& e : gc.edges(c)) list.push_back({e.u, e.v});
        edges[gc.colour_name(c)] = list;
        if (const auto& b = gc.bipartition(c)) bip[gc.colour_name(c)] = Json{bits_to_vector(b->first), bits_to_vector(b->second)};
    }
    Json j{{"type", "collection"}, {"n", gc.n()}, {"colours", gc.colour_names()}, {"edges", edges}};
    if (!bip.empty()) j["bipartition"] = bip;
    return j;
}

inline GraphCollection collection_from_json(const Json& j) {
    detail::require(j, "n", "collection");
    detail::require(j, "colours", "collection");
    const auto n = j.at("n").get<std::size_t>();
    std::vector<std::string> names;
    for (const auto& c : j.at("colours")) names.push_back(c.is_string() ? c.get<std::string>() : c.dump());
    GraphCollection gc(n, names);
    if (j.contains("bipartition"))
        for (const auto& [name, sides] : j.at("bipartition").items()) {
            auto c = gc.find_colour(name);
            if (!c) throw Error("ParseError", "bipartition for unknown colour " + name);
            gc.declare_bipartition(*c, vector_to_bits(n, sides.at(0).get<std::vector<Vertex>>()), vector_to_bits(n, sides.at(1).get<std::vector<Vertex>>()));
        }
    if (j.contains("edges"))
        for (const auto& [name, list] : j.at("edges").items()) {
            auto c = gc.find_colour(name);
            if (!c) throw Error("ParseError", "edges for unknown colour " + name);
            for (const auto& e : list) gc.add_edge(*c, e.at(0).get<Vertex>(), e.at(1).get<Vertex>());
        }
    return gc;
}

// ---------------------------------------------------------------- 3-graphs

inline Json to_json(const ThreeGraph& g) {
    Json edges = Json::array();
    for (const Triple& t : g.edges()) edges.push_back({t[0], t[1], t[2]});
    Json j{{"type", "threegraph"}, {"n", g.n()}, {"edges", edges}};
    if (g.partition_labels()) j["labels"] = *g.partition_labels();
    return j;
}

inline ThreeGraph threegraph_from_json(const Json& j) {
    detail::require(j, "n", "3-graph");
    ThreeGraph g(j.at("n").get<std::size_t>());
    if (j.contains("edges"))
        for (const auto& e : j.at("edges")) g.add_edge(e.at(0).get<Vertex>(), e.at(1).get<Vertex>(), e.at(2).get<Vertex>());
    if (j.contains("labels")) g.set_partition_labels(j.at("labels").get<std::vector<int>>());
    return g;
}

// ---------------------------------------------------------------- patterns

inline Json to_json(const PatternGraph& H) {
    Json edges = Json::array();
    for (const Edge& e : H.edges()) edges.push_back({e.u, e.v});
    Json j{{"type", "pattern"}, {"n", H.n()}, {"edges", edges}, {"delta", H.delta_bound()}};
    if (H.phi()) j["phi"] = *H.phi();
    if (!H.targets().empty()) {
        Json t = Json::object();
        for (const auto& [x, T] : H.targets()) t[std::to_string(x)] = T;
        j["targets"] = t;
    }
    return j;
}

inline PatternGraph pattern_from_json(const Json& j) {
    detail::require(j, "n", "pattern");
    PatternGraph H(j.at("n").get<std::size_t>());
    if (j.contains("edges"))
        for (const auto& e : j.at("edges")) H.add_edge(e.at(0).get<Vertex>(), e.at(1).get<Vertex>());
    if (j.contains("phi")) H.set_phi(j.at("phi").get<std::vector<Vertex>>());
    if (j.contains("targets"))
        for (const auto& [x, T] : j.at("targets").items()) H.set_target(static_cast<Vertex>(std::stoul(x)), T.get<std::vector<Vertex>>());
    if (j.contains("delta")) H.set_delta_bound(j.at("delta").get<std::size_t>());
    return H;
}

// ---------------------------------------------------------------- embeddings

// tau keyed by pattern vertex, sigma keyed by pattern edge index with colour
// names as values.
inline Json to_json(const TransversalEmbedding& emb, const GraphCollection& gc) {
    Json tau = Json::object(), sigma = Json::object();
    for (std::size_t x = 0; x < emb.tau.size(); ++x) tau[std::to_string(x)] = emb.tau[x];
    for (std::size_t e = 0; e < emb.sigma.size(); ++e)
        sigma[std::to_string(e)] = emb.sigma[e] < gc.colours() ? Json(gc.colour_name(emb.sigma[e])) : Json(emb.sigma[e]);
    return Json{{"tau", tau}, {"sigma", sigma}};
}

inline TransversalEmbedding embedding_from_json(const Json& j, const GraphCollection& gc) {
    detail::require(j, "tau", "embedding");
    detail::require(j, "sigma", "embedding");
    TransversalEmbedding emb;
    auto read_map = [](const Json& m, auto convert) {
        std::vector<std::uint32_t> out;
        if (m.is_array()) {
            for (const auto& v : m) out.push_back(convert(v));
            return out;
        }
        std::map<std::size_t, std::uint32_t> sorted;
        for (const auto& [k, v] : m.items()) sorted[std::stoul(k)] = convert(v);
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (!sorted.count(i)) throw Error("ParseError", "embedding map has a gap at " + std::to_string(i));
            out.push_back(sorted[i]);
        }
        return out;
    };
    emb.tau = read_map(j.at("tau"), [](const Json& v) { return v.get<Vertex>(); });
    emb.sigma = read_map(j.at("sigma"), [&](const Json& v) -> Colour {
        if (v.is_string()) {
            auto c = gc.find_colour(v.get<std::string>());
            if (!c) throw Error("ParseError", "unknown colour " + v.get<std::string>());
            return *c;
        }
        return v.get<Colour>();
    });
    return emb;
}

inline Json to_json(const VerificationReport& r) { return Json{{"accepted", r.accepted}, {"violations", r.violations}}; }

// ---------------------------------------------------------------- templates

inline Json to_json(const Template& t) {
    std::vector<std::vector<std::string>> cc;
    for (const auto& C : t.colour_clusters) {
        cc.emplace_back();
        for (Colour c : C) cc.back().push_back(t.gc.colour_name(c));
    }
    return Json{{"type", "template"},
                {"R", to_json(t.R)},
                {"clusters", t.clusters},
                {"colour_clusters", cc},
                {"collection", to_json(t.gc)},
                {"rainbow", t.rainbow},
                {"stamp", to_string(t.stamp)},
                {"ledger", Json{{"m", rational_string(t.ledger.m)}, {"epsilon", rational_string(t.ledger.epsilon)}, {"d", rational_string(t.ledger.d)},
                                {"delta", rational_string(t.ledger.delta)}, {"class", to_string(t.ledger.klass)}}}};
}

inline Template template_from_json(const Json& j) {
    for (const char* k : {"R", "clusters", "colour_clusters", "collection", "ledger"}) detail::require(j, k, "template");
    GraphCollection gc = collection_from_json(j.at("collection"));
    std::vector<std::vector<Colour>> cc;
    for (const auto& C : j.at("colour_clusters")) {
        cc.emplace_back();
        for (const auto& c : C) {
            auto idx = c.is_string() ? gc.find_colour(c.get<std::string>()) : std::optional<Colour>(c.get<Colour>());
            if (!idx || *idx >= gc.colours()) throw Error("ParseError", "unknown colour in colour cluster");
            cc.back().push_back(*idx);
        }
    }
    const Json& L = j.at("ledger");
    Template t = make_template(pattern_from_json(j.at("R")), j.at("clusters").get<std::vector<std::vector<Vertex>>>(), std::move(cc), std::move(gc), 1, 0.1, 0.1, 1,
                               parse_mode(L.value("class", std::string("regular"))));
    t.ledger.m = parse_rational(L.at("m"));
    t.ledger.epsilon = parse_rational(L.at("epsilon"));
    t.ledger.d = parse_rational(L.at("d"));
    t.ledger.delta = parse_rational(L.value("delta", Json("1")));
    if (j.contains("stamp")) t.stamp = parse_stamp(j.at("stamp").get<std::string>());
    return t;
}

// ---------------------------------------------------------------- instances

// Type tag of an instance document: collection (default), threegraph,
// template or pattern.
inline std::string instance_type(const Json& j) { return j.value("type", std::string("collection")); }

}  // namespace tvb
