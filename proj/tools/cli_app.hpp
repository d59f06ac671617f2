#pragma once
// Batch front end: generate, check, partition, embed, oracle, verify and
// bench. Every run produces a JSON report (command, instance digest,
// parameters, outcome, timings, verification, seed) on stdout and, when a
// report path or TVB_REPORT_DIR is given, as a file. Exit codes: 0 success
// or feasible, 1 verified infeasible or typed pipeline failure, 2 usage or
// input error.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "tvb/tvb.hpp"

namespace tvb::cli {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

inline const char* kReportDirEnv = "TVB_REPORT_DIR";

// ---------------------------------------------------------------- helpers

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 || EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("InternalError", "SHA-256 digest failed");
    }
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

// Content address of a JSON document: digest of its canonical dump (object
// keys are sorted by the JSON library).
inline std::string digest(const Json& j) { return "sha256:" + sha256_hex(j.dump()); }

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const { return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_;
};

struct RunReport {
    std::string command;
    std::string instance_digest;
    Json params = Json::object();
    Json outcome = Json::object();
    Json timings = Json::object();
    Json verification = nullptr;
    std::uint64_t seed = 0;

    Json to_json() const {
        return Json{{"command", command}, {"instance_digest", instance_digest}, {"params", params}, {"outcome", outcome},
                    {"timings", timings}, {"verification", verification}, {"seed", seed}};
    }
};

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::string report_path;  // explicit --report
};

inline void emit(const Context& ctx, const RunReport& r) {
    const Json j = r.to_json();
    ctx.out << j.dump() << "\n";
    std::string path = ctx.report_path;
    if (path.empty()) {
        if (const char* dir = std::getenv(kReportDirEnv); dir && *dir) {
            std::filesystem::create_directories(dir);
            const std::string tag = r.instance_digest.empty() ? std::string("none") : r.instance_digest.substr(7, 12);
            path = (std::filesystem::path(dir) / (r.command + "-" + tag + "-" + std::to_string(r.seed) + ".json")).string();
        }
    }
    if (!path.empty()) write_json_file(path, j);
}

inline std::vector<std::uint32_t> parse_index_list(const std::string& s) {
    std::vector<std::uint32_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
    return out;
}

// A 2-colouring of H balanced across components; nullopt when H is not
// bipartite or a side exceeds its capacity.
inline std::optional<std::vector<Vertex>> bipartite_phi(const PatternGraph& H, std::size_t cap0, std::size_t cap1) {
    std::vector<int> side(H.n(), -1);
    std::vector<std::pair<std::vector<Vertex>, std::vector<Vertex>>> comps;
    for (Vertex s = 0; s < H.n(); ++s) {
        if (side[s] >= 0) continue;
        std::vector<Vertex> a, b, stack{s};
        side[s] = 0;
        while (!stack.empty()) {
            const Vertex x = stack.back();
            stack.pop_back();
            (side[x] ? b : a).push_back(x);
            for (const auto& inc : H.incident(x)) {
                if (side[inc.nbr] < 0) {
                    side[inc.nbr] = 1 - side[x];
                    stack.push_back(inc.nbr);
                } else if (side[inc.nbr] == side[x]) {
                    return std::nullopt;
                }
            }
        }
        comps.push_back({std::move(a), std::move(b)});
    }
    std::stable_sort(comps.begin(), comps.end(), [](const auto& p, const auto& q) { return p.first.size() + p.second.size() > q.first.size() + q.second.size(); });
    std::vector<Vertex> phi(H.n());
    std::size_t n0 = 0, n1 = 0;
    for (const auto& [a, b] : comps) {
        // put the larger half on the side with more room
        const bool flip = (a.size() >= b.size()) != (cap0 - std::min(cap0, n0) >= cap1 - std::min(cap1, n1));
        const auto& to0 = flip ? b : a;
        const auto& to1 = flip ? a : b;
        for (Vertex x : to0) phi[x] = 0;
        for (Vertex x : to1) phi[x] = 1;
        n0 += to0.size();
        n1 += to1.size();
    }
    if (n0 > cap0 || n1 > cap1) return std::nullopt;
    return phi;
}

inline Json pattern_spec_json(const FamilySpec& f) {
    return Json{{"kind", f.kind}, {"n", f.n}, {"k", f.k}, {"copies", f.copies}, {"cycle_lengths", f.cycle_lengths}, {"mu", f.mu}, {"seed", f.seed}};
}

inline FamilySpec family_from_json(const Json& j) {
    FamilySpec f;
    f.kind = j.value("kind", f.kind);
    f.n = j.value("n", f.n);
    f.k = j.value("k", f.k);
    f.copies = j.value("copies", f.copies);
    if (j.contains("cycle_lengths")) f.cycle_lengths = j.at("cycle_lengths").get<std::vector<std::size_t>>();
    f.mu = j.value("mu", f.mu);
    f.seed = j.value("seed", f.seed);
    if (j.contains("F")) f.F = pattern_from_json(j.at("F"));
    return f;
}

inline GenSpec genspec_from_json(const Json& j) {
    GenSpec s;
    s.n = j.value("n", s.n);
    s.colours = j.value("colours", s.colours);
    s.density = j.value("density", s.density);
    s.seed = j.value("seed", s.seed);
    s.construction = j.value("construction", s.construction);
    return s;
}

inline Json genspec_json(const GenSpec& s) {
    return Json{{"construction", s.construction}, {"n", s.n}, {"colours", s.colours}, {"density", s.density}, {"seed", s.seed}};
}

inline SplitPlan load_plan(const std::string& path) { return path.empty() ? SplitPlan{} : split_plan_from_json(read_json_file(path)); }

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string construction = "random";
    std::string family;
    std::string spec_path;
    std::string out;
    std::size_t n = 10, colours = 0, k = 2, copies = 4, t_per_edge = 1;
    double density = 0.5, mu = 0.3;
    std::uint64_t seed = 1;
    std::string x_list;
};

inline int run_generate(const Context& ctx, const GenerateArgs& a) {
    Stopwatch sw;
    Json doc;
    Json params;
    if (!a.family.empty()) {
        FamilySpec f;
        f.kind = a.family;
        f.n = a.n;
        f.k = a.k;
        f.copies = a.copies;
        f.mu = a.mu;
        f.seed = a.seed;
        auto inst = separable_family(f);
        doc = to_json(inst.pattern);
        if (inst.certificate) doc["certificate"] = Json{{"separator", inst.certificate->separator}, {"components", inst.certificate->components}, {"mu", f.mu}};
        params = pattern_spec_json(f);
        if (a.construction == "one-expansion") {
            doc = to_json(one_expansion(inst.pattern, a.t_per_edge));
            params["t_per_edge"] = a.t_per_edge;
        }
    } else if (a.construction == "parity") {
        Bitset X(3 * a.n);
        for (auto v : parse_index_list(a.x_list)) {
            if (v >= 3 * a.n) throw Error("InvalidParameter", "X vertex outside the 3 parts");
            X.set(v);
        }
        auto inst = parity_threegraph(a.n, X, a.seed);
        doc = to_json(inst.graph);
        params = Json{{"construction", "parity"}, {"part_size", a.n}, {"X", bits_to_vector(X)}, {"seed", a.seed}};
    } else {
        GenSpec s;
        if (!a.spec_path.empty()) s = genspec_from_json(read_json_file(a.spec_path));
        else {
            s.construction = a.construction;
            s.n = a.n;
            s.colours = a.colours ? a.colours : a.n;
            s.density = a.density;
            s.seed = a.seed;
        }
        doc = to_json(generate_collection(s));
        params = genspec_json(s);
    }
    if (a.out.empty()) {
        ctx.out << doc.dump() << "\n";
    } else {
        write_json_file(a.out, doc);
    }
    RunReport r{"generate", digest(doc), params, Json{{"status", "ok"}, {"type", instance_type(doc)}, {"out", a.out}}, Json{{"total_ms", sw.ms()}}, nullptr, a.seed};
    if (!a.out.empty()) emit(ctx, r);
    return kOk;
}

// ---------------------------------------------------------------- check

struct CheckArgs {
    std::string instance;
    bool mono_triangles = false, density = false, validate = false, separability = false;
    double mu = 0.3;
    std::size_t budget = 2000;
    std::uint64_t seed = 1;
};

inline int run_check(const Context& ctx, const CheckArgs& a) {
    Stopwatch sw;
    const Json doc = read_json_file(a.instance);
    const std::string type = instance_type(doc);
    Json outcome = Json::object();
    int code = kOk;
    if (a.mono_triangles) {
        if (type != "collection") throw Error("InvalidParameter", "--mono-triangles needs a collection instance");
        outcome["monochromatic_triangles"] = count_monochromatic_triangles(collection_from_json(doc));
    }
    if (a.density) {
        if (type == "collection") outcome["density"] = collection_density(collection_from_json(doc));
        else if (type == "threegraph") {
            auto g = threegraph_from_json(doc);
            const double n = static_cast<double>(g.n());
            outcome["density"] = n >= 3 ? static_cast<double>(g.edge_count()) / (n * (n - 1) * (n - 2) / 6.0) : 0.0;
        } else {
            throw Error("InvalidParameter", "--density needs a collection or 3-graph instance");
        }
    }
    if (a.validate) {
        if (type != "template") throw Error("InvalidParameter", "--validate needs a template instance");
        auto t = template_from_json(doc);
        auto rep = validate_template(t, a.budget, a.seed);
        Json per_edge = Json::array();
        for (const auto& c : rep.per_edge)
            per_edge.push_back(Json{{"passed", c.passed}, {"regular", c.regular}, {"dense_enough", c.dense_enough}, {"density", rational_string(c.density)}, {"exhaustive", c.exhaustive}, {"metadata", c.metadata}});
        outcome["template"] = Json{{"passed", rep.passed}, {"stamp", to_string(rep.stamp)}, {"size_violations", rep.size_violations}, {"rainbow_violations", rep.rainbow_violations}, {"per_edge", per_edge}};
        if (!rep.passed) code = kFailed;
    }
    if (a.separability) {
        if (type != "pattern") throw Error("InvalidParameter", "--separability needs a pattern instance");
        auto H = pattern_from_json(doc);
        auto cert = separability_certificate(H, a.mu);
        outcome["separable"] = cert.has_value();
        if (cert) outcome["certificate"] = Json{{"separator", cert->separator}, {"components", cert->components.size()}, {"strategy", cert->strategy}};
        else code = kFailed;
    }
    if (outcome.empty()) throw Error("InvalidParameter", "check needs at least one of --mono-triangles, --density, --validate, --separability");
    RunReport r{"check", digest(doc), Json{{"instance", a.instance}, {"mu", a.mu}, {"budget", a.budget}}, outcome, Json{{"total_ms", sw.ms()}}, nullptr, a.seed};
    emit(ctx, r);
    return code;
}

// ---------------------------------------------------------------- partition

struct PartitionArgs {
    std::string instance;
    PartitionParams prm;
    std::uint64_t seed = 1;
};

inline int run_partition(const Context& ctx, const PartitionArgs& a) {
    Stopwatch sw;
    const Json doc = read_json_file(a.instance);
    const auto gc = collection_from_json(doc);
    const Json params{{"epsilon", a.prm.epsilon}, {"d", a.prm.d}, {"delta", a.prm.delta}, {"L0", a.prm.L0}, {"max_rounds", a.prm.max_rounds}, {"min_cluster", a.prm.min_cluster}};
    RegularityPartition best;
    auto P = partition_collection(gc, a.prm, a.seed, &best);
    RunReport r{"partition", digest(doc), params, Json::object(), Json::object(), nullptr, a.seed};
    if (!P) {
        r.outcome = Json{{"status", "failed"}, {"failure", to_json(P.error())}, {"best_energy_history", best.energy_history}};
        r.timings = Json{{"total_ms", sw.ms()}};
        emit(ctx, r);
        return kFailed;
    }
    auto props = check_partition_properties(gc, *P, a.prm, a.seed);
    r.outcome = Json{{"status", "converged"}, {"L", P->L()}, {"M", P->M()}, {"m", P->m}, {"rounds", P->rounds}, {"energy_history", P->energy_history},
                     {"vertex_clusters", P->vertex_clusters}, {"V0", P->V0}, {"colour_clusters", P->colour_clusters}, {"C0", P->C0}};
    r.verification = Json{{"all", props.all()}, {"violations", props.violations}};
    r.timings = Json{{"total_ms", sw.ms()}};
    emit(ctx, r);
    return props.all() ? kOk : kFailed;
}

// ---------------------------------------------------------------- embed

struct EmbedArgs {
    std::string pipeline = "quasi";
    std::string instance, pattern, plan;
    std::uint64_t seed = 1;
};

inline int run_embed(const Context& ctx, const EmbedArgs& a) {
    Stopwatch sw;
    const Json doc = read_json_file(a.instance);
    const Json pdoc = read_json_file(a.pattern);
    const PatternGraph H = pattern_from_json(pdoc);
    const SplitPlan plan = load_plan(a.plan);
    RunReport r{"embed", digest(doc), Json{{"pipeline", a.pipeline}, {"pattern_digest", digest(pdoc)}, {"plan", to_json(plan)}, {"instance", a.instance}, {"pattern", a.pattern}},
                Json::object(), Json::object(), nullptr, a.seed};
    auto finish_coloured = [&](const EmbedOutcome& res, const GraphCollection& gc, const Json& extra) {
        r.timings = Json{{"total_ms", sw.ms()}};
        if (!res) {
            r.outcome = Json{{"status", "failed"}, {"failure", to_json(res.error())}};
            r.outcome.update(extra);
            emit(ctx, r);
            return kFailed;
        }
        // independent re-verification for the report
        const auto ver = verify_transversal_embedding(gc, H, res->emb);
        r.verification = to_json(ver);
        r.outcome = Json{{"status", ver.accepted ? "embedded" : "rejected"}, {"embedding", to_json(res->emb, gc)}, {"trace", res->trace}};
        r.outcome.update(extra);
        emit(ctx, r);
        return ver.accepted ? kOk : kFailed;
    };
    if (a.pipeline == "quasi") {
        const auto gc = collection_from_json(doc);
        return finish_coloured(quasi_embed(gc, H, plan, a.seed), gc, Json::object());
    }
    if (a.pipeline == "transversal" || a.pipeline == "approx" || a.pipeline == "partial") {
        if (instance_type(doc) != "template") throw Error("InvalidParameter", "pipeline " + a.pipeline + " needs a template instance");
        const Template t = template_from_json(doc);
        const Json extra{{"ledger", detail::ledger_json(t.ledger)}};
        if (a.pipeline == "transversal") return finish_coloured(transversal_blowup(t, H, plan, a.seed), t.gc, extra);
        if (a.pipeline == "approx") return finish_coloured(approx_embed(t, H, plan, a.seed), t.gc, extra);
        return finish_coloured(embed_by_partial(t, H, plan, a.seed), t.gc, extra);
    }
    if (a.pipeline == "expand") {
        const auto g = threegraph_from_json(doc);
        auto res = expand_embed_3graph(g, H, plan, a.seed);
        r.timings = Json{{"total_ms", sw.ms()}};
        if (!res) {
            r.outcome = Json{{"status", "failed"}, {"failure", to_json(res.error())}};
            emit(ctx, r);
            return kFailed;
        }
        const auto bad = verify_expansion(g, H, *res);
        r.verification = Json{{"accepted", bad.empty()}, {"violations", bad}};
        r.outcome = Json{{"status", bad.empty() ? "embedded" : "rejected"}, {"expansion", to_json(*res)}};
        emit(ctx, r);
        return bad.empty() ? kOk : kFailed;
    }
    throw Error("InvalidParameter", "unknown pipeline: " + a.pipeline + " (quasi, transversal, approx, partial, expand)");
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
    std::string instance, pattern;
    bool count = false, tight_cycle = false, symmetry = false;
    std::uint64_t node_limit = 50'000'000, time_limit_ms = 0;
};

inline int run_oracle(const Context& ctx, const OracleArgs& a) {
    Stopwatch sw;
    const Json doc = read_json_file(a.instance);
    SearchBudget b;
    b.node_limit = a.node_limit;
    b.time_limit_ms = a.time_limit_ms;
    b.symmetry_breaking = a.symmetry;
    RunReport r{"oracle", digest(doc), Json{{"node_limit", a.node_limit}, {"time_limit_ms", a.time_limit_ms}, {"symmetry_breaking", a.symmetry}}, Json::object(), Json::object(), nullptr, 0};
    auto status_code = [](OracleStatus s) { return s == OracleStatus::found ? kOk : kFailed; };
    if (a.tight_cycle) {
        const auto g = threegraph_from_json(doc);
        auto res = tight_hamilton_search(g, b);
        r.outcome = to_json(res);
        r.outcome["reason"] = to_string(res.status);
        if (res.status == OracleStatus::found) r.verification = Json{{"accepted", is_tight_hamilton_cycle(g, res.cycle)}};
        r.timings = Json{{"total_ms", sw.ms()}};
        emit(ctx, r);
        return status_code(res.status);
    }
    if (a.pattern.empty()) throw Error("InvalidParameter", "oracle needs --pattern (or --tight-cycle on a 3-graph)");
    const auto gc = collection_from_json(doc);
    const Json pdoc = read_json_file(a.pattern);
    const auto H = pattern_from_json(pdoc);
    r.params["pattern_digest"] = digest(pdoc);
    if (a.count) {
        auto c = count_rainbow_copies(gc, H, b);
        r.outcome = to_json(c);
        r.outcome["reason"] = c.complete ? "Counted" : "BudgetExceeded";
        r.timings = Json{{"total_ms", sw.ms()}};
        emit(ctx, r);
        return c.complete ? kOk : kFailed;
    }
    auto res = exact_transversal_embed(gc, H, b);
    r.outcome = Json{{"status", to_string(res.status)}, {"reason", to_string(res.status)}, {"nodes", res.nodes}, {"elapsed_ms", res.elapsed_ms}, {"symmetry_broken", res.symmetry_broken}};
    if (res.embedding) {
        r.outcome["embedding"] = to_json(*res.embedding, gc);
        r.verification = to_json(verify_transversal_embedding(gc, H, *res.embedding));
    }
    r.timings = Json{{"total_ms", sw.ms()}};
    emit(ctx, r);
    return status_code(res.status);
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
    std::string instance, pattern, embedding;
};

inline int run_verify(const Context& ctx, const VerifyArgs& a) {
    Stopwatch sw;
    const Json doc = read_json_file(a.instance);
    const Json pdoc = read_json_file(a.pattern);
    Json edoc = read_json_file(a.embedding);
    // accept a bare embedding or a run report that carries one
    if (edoc.contains("outcome") && edoc.at("outcome").contains("embedding")) edoc = edoc.at("outcome").at("embedding");
    const auto H = pattern_from_json(pdoc);
    RunReport r{"verify", digest(doc), Json{{"pattern_digest", digest(pdoc)}, {"embedding_digest", digest(edoc)}}, Json::object(), Json::object(), nullptr, 0};
    GraphCollection gc = instance_type(doc) == "template" ? template_from_json(doc).gc : collection_from_json(doc);
    const auto rep = verify_transversal_embedding(gc, H, embedding_from_json(edoc, gc));
    r.verification = to_json(rep);
    r.outcome = Json{{"status", rep.accepted ? "accepted" : "rejected"}};
    r.timings = Json{{"total_ms", sw.ms()}};
    emit(ctx, r);
    return rep.accepted ? kOk : kFailed;
}

// ---------------------------------------------------------------- bench

// One suite entry: a generator, a pattern and a pipeline run over seeds.
//   {"tag": "...", "pipeline": "blowup|quasi|oracle",
//    "generator": {construction, n, colours, density},
//    "pattern": {family spec} or {"type": "pattern", ...},
//    "seeds": 50 or [1, 5, 9]}
struct BenchRow {
    std::string tag, construction, pipeline, digest, stage, reason;
    std::uint64_t seed = 0;
    bool success = false;
    double wall_ms = 0;
    std::size_t attempts = 0;
};

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline const char* kBenchHeader = "tag,construction,pipeline,instance_digest,seed,success,stage,reason,wall_ms,attempts";

inline BenchRow bench_one(const Json& entry, std::uint64_t seed) {
    BenchRow row;
    row.tag = entry.value("tag", std::string("run"));
    row.pipeline = entry.value("pipeline", std::string("quasi"));
    row.seed = seed;
    Stopwatch sw;
    try {
        GenSpec gs = genspec_from_json(entry.value("generator", Json::object()));
        gs.seed = seed;
        row.construction = gs.construction;
        PatternGraph H;
        const Json pj = entry.value("pattern", Json::object());
        if (pj.value("type", std::string()) == "pattern") H = pattern_from_json(pj);
        else {
            FamilySpec f = family_from_json(pj);
            if (!pj.contains("seed")) f.seed = seed;
            H = separable_family(f).pattern;
        }
        if (row.pipeline == "blowup") {
            const std::size_t a = gs.n / 2, b = gs.n - gs.n / 2;
            const auto host = random_bipartite_graph(a, b, gs.density, seed);
            row.digest = digest(Json{{"generator", genspec_json(gs)}, {"kind", "bipartite-host"}});
            auto phi = bipartite_phi(H, a, b);
            if (!phi) {
                row.stage = "bench/pattern";
                row.reason = "PatternNotBipartite";
            } else {
                H.set_phi(*phi);
                std::vector<Vertex> A(a), B(b);
                std::iota(A.begin(), A.end(), 0);
                std::iota(B.begin(), B.end(), static_cast<Vertex>(a));
                PatternGraph R(2);
                R.add_edge(0, 1);
                const std::vector<std::vector<Vertex>> clusters{A, B};
                auto res = blowup_embed(host, clusters, R, H, SplitPlan{}, seed);
                if (res) {
                    row.attempts = res->attempts;
                    const bool ok = verify_blowup(host, clusters, H, res->tau).empty();
                    row.success = ok;
                    row.stage = "done";
                    row.reason = ok ? "Verified" : "VerificationFailed";
                } else {
                    row.stage = res.error().stage;
                    row.reason = res.error().reason;
                }
            }
        } else {
            const auto gc = generate_collection(gs);
            row.digest = digest(to_json(gc));
            if (row.pipeline == "quasi") {
                auto res = quasi_embed(gc, H, SplitPlan{}, seed);
                if (res) {
                    row.success = res->verification.accepted;
                    row.stage = "done";
                    row.reason = row.success ? "Verified" : "VerificationFailed";
                } else {
                    row.stage = res.error().stage;
                    row.reason = res.error().reason;
                }
            } else if (row.pipeline == "oracle") {
                auto res = exact_transversal_embed(gc, H);
                row.success = res.status == OracleStatus::found;
                row.stage = "oracle";
                row.reason = to_string(res.status);
                row.attempts = res.nodes;
            } else {
                row.stage = "bench";
                row.reason = "UnknownPipeline";
            }
        }
    } catch (const Error& e) {
        row.stage = row.stage.empty() ? "bench" : row.stage;
        row.reason = e.kind();
    } catch (const std::exception& e) {
        row.stage = "bench";
        row.reason = "Exception";
    }
    row.wall_ms = sw.ms();
    return row;
}

inline std::vector<std::uint64_t> seeds_of(const Json& entry) {
    std::vector<std::uint64_t> out;
    const Json s = entry.value("seeds", Json(1));
    if (s.is_array()) return s.get<std::vector<std::uint64_t>>();
    for (std::uint64_t i = 1; i <= s.get<std::uint64_t>(); ++i) out.push_back(i);
    return out;
}

struct BenchArgs {
    std::string suite, csv;
};

inline int run_bench(const Context& ctx, const BenchArgs& a) {
    Stopwatch sw;
    const Json suite = read_json_file(a.suite);
    const Json entries = suite.is_array() ? suite : suite.value("runs", Json::array());
    std::vector<BenchRow> rows;
    for (const auto& entry : entries)
        for (std::uint64_t seed : seeds_of(entry)) rows.push_back(bench_one(entry, seed));
    std::ostringstream csv;
    csv << kBenchHeader << "\n";
    for (const auto& r : rows)
        csv << csv_escape(r.tag) << "," << csv_escape(r.construction) << "," << r.pipeline << "," << r.digest << "," << r.seed << "," << (r.success ? 1 : 0) << ","
            << csv_escape(r.stage) << "," << csv_escape(r.reason) << "," << std::fixed << std::setprecision(3) << r.wall_ms << "," << r.attempts << "\n";
    if (a.csv.empty()) ctx.out << csv.str();
    else {
        std::ofstream f(a.csv);
        if (!f) throw Error("IOError", "cannot write " + a.csv);
        f << csv.str();
    }
    // aggregation by construction
    std::map<std::string, std::pair<std::size_t, std::size_t>> agg;
    for (const auto& r : rows) {
        auto& [n, ok] = agg[r.construction + "/" + r.pipeline];
        ++n;
        ok += r.success;
    }
    Json summary = Json::object();
    for (const auto& [k, v] : agg) summary[k] = Json{{"runs", v.first}, {"successes", v.second}, {"success_rate", v.first ? static_cast<double>(v.second) / static_cast<double>(v.first) : 0.0}};
    RunReport r{"bench", digest(suite), Json{{"suite", a.suite}, {"csv", a.csv}}, Json{{"rows", rows.size()}, {"summary", summary}}, Json{{"total_ms", sw.ms()}}, nullptr, 0};
    if (!a.csv.empty()) emit(ctx, r);
    return kOk;
}

// ---------------------------------------------------------------- dispatch

inline int execute(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Transversal blow-up toolkit: generate, check, partition, embed, oracle, verify, bench"};
    app.require_subcommand(1);
    app.fallthrough();  // global options such as --report may follow the subcommand
    std::string report;
    app.add_option("--report", report, "write the JSON run report here (default: $" + std::string(kReportDirEnv) + "/<command>-<digest>-<seed>.json)");

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "generate an instance or a pattern");
    gen->add_option("--construction", ga.construction, "random | cyclic-triangle | mantel | random-bipartite | parity | one-expansion");
    gen->add_option("--family", ga.family, "pattern family: F-factor | cycle-union | hamilton-power | bandwidth-b | tree");
    gen->add_option("--spec", ga.spec_path, "generator spec JSON");
    gen->add_option("--n", ga.n, "vertices (part size for parity)");
    gen->add_option("--colours", ga.colours, "number of colours (default n)");
    gen->add_option("--density", ga.density, "edge probability");
    gen->add_option("--k", ga.k, "power / bandwidth / tree degree");
    gen->add_option("--copies", ga.copies, "F-factor copies");
    gen->add_option("--mu", ga.mu, "separability parameter");
    gen->add_option("--t", ga.t_per_edge, "new vertices per edge for one-expansion");
    gen->add_option("--x", ga.x_list, "comma-separated X for the parity construction");
    gen->add_option("--seed", ga.seed);
    gen->add_option("--out", ga.out, "output file (default stdout)");

    CheckArgs ca;
    auto* chk = app.add_subcommand("check", "structural checks on an instance");
    chk->add_option("instance", ca.instance)->required();
    chk->add_flag("--mono-triangles", ca.mono_triangles, "count monochromatic triangles");
    chk->add_flag("--density", ca.density, "3-graph density");
    chk->add_flag("--validate", ca.validate, "validate a template");
    chk->add_flag("--separability", ca.separability, "certify mu-separability of a pattern");
    chk->add_option("--mu", ca.mu);
    chk->add_option("--budget", ca.budget, "witness search budget");
    chk->add_option("--seed", ca.seed);

    PartitionArgs pa;
    auto* part = app.add_subcommand("partition", "regularity partition of a collection");
    part->add_option("--instance", pa.instance)->required();
    part->add_option("--epsilon", pa.prm.epsilon);
    part->add_option("--d", pa.prm.d);
    part->add_option("--delta", pa.prm.delta);
    part->add_option("--L0", pa.prm.L0);
    part->add_option("--max-rounds", pa.prm.max_rounds);
    part->add_option("--min-cluster", pa.prm.min_cluster);
    part->add_option("--seed", pa.seed);

    EmbedArgs ea;
    auto* emb = app.add_subcommand("embed", "run an embedding pipeline");
    emb->add_option("--pipeline", ea.pipeline, "quasi | transversal | approx | partial | expand");
    emb->add_option("--instance", ea.instance)->required();
    emb->add_option("--pattern", ea.pattern)->required();
    emb->add_option("--plan", ea.plan, "split plan JSON");
    emb->add_option("--seed", ea.seed);

    OracleArgs oa;
    auto* orc = app.add_subcommand("oracle", "exact brute-force search");
    orc->add_option("--instance", oa.instance)->required();
    orc->add_option("--pattern", oa.pattern);
    orc->add_flag("--count", oa.count, "count transversal copies instead of searching");
    orc->add_flag("--tight-cycle", oa.tight_cycle, "tight Hamilton cycle in a 3-graph instance");
    orc->add_flag("--symmetry-breaking", oa.symmetry);
    orc->add_option("--node-limit", oa.node_limit);
    orc->add_option("--time-limit-ms", oa.time_limit_ms);

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "re-verify an embedding or a run report");
    ver->add_option("--instance", va.instance)->required();
    ver->add_option("--pattern", va.pattern)->required();
    ver->add_option("--embedding", va.embedding, "embedding JSON or embed/oracle report")->required();

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "run a benchmark suite into CSV");
    bench->add_option("--suite", ba.suite)->required();
    bench->add_option("--csv", ba.csv, "CSV output (default stdout)");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kUsage;
    }
    const Context ctx{out, err, report};
    try {
        if (gen->parsed()) return run_generate(ctx, ga);
        if (chk->parsed()) return run_check(ctx, ca);
        if (part->parsed()) return run_partition(ctx, pa);
        if (emb->parsed()) return run_embed(ctx, ea);
        if (orc->parsed()) return run_oracle(ctx, oa);
        if (ver->parsed()) return run_verify(ctx, va);
        if (bench->parsed()) return run_bench(ctx, ba);
    } catch (const Error& e) {
        // malformed input or parameters are usage errors; anything else is
        // a typed failure of the run
        static const std::set<std::string> usage{"IOError", "ParseError", "InvalidParameter", "PreconditionViolated", "InvalidEdge", "InvalidPartition",
                                                 "DegreeBoundViolated", "EdgeStraddlesSides"};
        err << e.kind() << ": " << e.what() << "\n";
        return usage.count(e.kind()) ? kUsage : kFailed;
    } catch (const Json::exception& e) {
        err << "ParseError: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailed;
    }
    return kUsage;
}

}  // namespace tvb::cli
