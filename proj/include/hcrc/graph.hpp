#pragma once

// Graph construction for one message block: the per-message attribute star
// graph, the block-level heterogeneous incidence graph, its homogeneous
// projection onto message nodes, edge-perturbation augmentation, and the
// self-looped symmetric adjacency normalization the GCN consumes.

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "hcrc/common.hpp"
#include "hcrc/corpus.hpp"
#include "hcrc/matrix.hpp"

namespace hcrc {

using Edge = std::pair<int, int>;  // canonical: first < second

inline Edge make_edge(int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; }

// Star over one message: node 0 is the message, nodes 1..A its attributes.
struct AttributeGraph {
    size_t num_nodes = 0;
    std::vector<Edge> edges;
    Matrix features;                    // (A+1) x d
    std::vector<Attribute> attributes;  // leaf i+1 <-> attributes[i]
    size_t augment_shortfall = 0;       // legal moves missing vs the k target
};

// Bipartite incidence graph over the whole block: message nodes on one
// side, distinct typed attribute values on the other.
struct HeteroGraph {
    size_t num_messages = 0;
    std::vector<Attribute> attr_nodes;               // distinct, (kind, value) order
    std::vector<std::pair<int, int>> incidences;     // (message index, attr index)
};

// Homogeneous projection: one node per message, an edge where two messages
// share at least one attribute value.
struct RelationGraph {
    size_t num_nodes = 0;
    std::vector<Edge> edges;
    Matrix features;  // N x d
    size_t augment_shortfall = 0;
};

// D^{-1/2} (A + I) D^{-1/2}; kept sparse, with the self-looped degrees.
struct NormalizedAdjacency {
    SparseMatrix mat;
    std::vector<double> degrees;
};

inline AttributeGraph build_attribute_graph(const Message& m, const FeatureConfig& cfg) {
    std::vector<Attribute> attrs = extract_attributes(m);
    if (attrs.empty()) throw Error("message '" + m.id + "' has no attributes");
    AttributeGraph g;
    g.num_nodes = attrs.size() + 1;
    g.features = Matrix(g.num_nodes, cfg.dim);
    std::vector<double> center = message_feature(m, cfg);
    std::copy(center.begin(), center.end(), g.features.row(0));
    for (size_t i = 0; i < attrs.size(); ++i) {
        g.edges.push_back({0, static_cast<int>(i + 1)});
        std::vector<double> leaf = hash_embed(attrs[i].value, cfg);
        std::copy(leaf.begin(), leaf.end(), g.features.row(i + 1));
    }
    g.attributes = std::move(attrs);
    return g;
}

inline HeteroGraph build_hetero_graph(const MessageBlock& block) {
    if (block.messages.empty()) throw Error("build_hetero_graph: empty block");
    HeteroGraph h;
    h.num_messages = block.messages.size();
    std::map<Attribute, int> index;
    std::vector<std::vector<Attribute>> per_message(block.messages.size());
    for (size_t i = 0; i < block.messages.size(); ++i)
        per_message[i] = extract_attributes(block.messages[i]);
    for (const auto& attrs : per_message)
        for (const auto& a : attrs) index.emplace(a, 0);
    int next = 0;
    for (auto& [attr, id] : index) {
        id = next++;
        h.attr_nodes.push_back(attr);
    }
    for (size_t i = 0; i < per_message.size(); ++i)
        for (const auto& a : per_message[i])
            h.incidences.push_back({static_cast<int>(i), index.at(a)});
    return h;
}

inline RelationGraph project_homogeneous(const HeteroGraph& h) {
    RelationGraph g;
    g.num_nodes = h.num_messages;
    std::vector<std::vector<int>> members(h.attr_nodes.size());
    for (const auto& [msg, attr] : h.incidences) members[attr].push_back(msg);
    std::set<Edge> edges;
    for (auto& ms : members) {
        std::sort(ms.begin(), ms.end());
        for (size_t i = 0; i < ms.size(); ++i)
            for (size_t j = i + 1; j < ms.size(); ++j) edges.insert({ms[i], ms[j]});
    }
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

namespace detail {

struct PerturbResult {
    std::vector<Edge> edges;
    size_t shortfall = 0;
};

// Adds then removes k = max(1, |E|/10) edges: additions drawn uniformly from
// the non-edges, removals drawn from the original edges under the constraint
// that no node ends at degree zero. Additions and removals never overlap
// because removals only ever touch original edges. A graph with no legal
// addition at all (complete, or too few nodes) comes back as a plain copy
// with shortfall = k; otherwise any missing legal moves accumulate into the
// shortfall instead of forcing the count.
inline PerturbResult perturb_edge_list(size_t num_nodes, const std::vector<Edge>& original,
                                       uint64_t seed) {
    PerturbResult res;
    res.edges = original;
    if (original.empty()) return res;

    const size_t k = std::max<size_t>(1, original.size() / 10);
    std::mt19937_64 rng(seed);

    std::set<Edge> present(original.begin(), original.end());
    std::vector<size_t> degree(num_nodes, 0);
    for (const auto& [u, v] : original) {
        ++degree[u];
        ++degree[v];
    }

    // --- additions first (stars would otherwise have no removable edge) ---
    const size_t n = num_nodes;
    const size_t all_pairs = n * (n - 1) / 2;
    const size_t non_edges = all_pairs - original.size();
    const size_t add_target = std::min(k, non_edges);
    std::vector<Edge> added;

    if (add_target == 0) {
        res.shortfall = k;
        return res;
    }
    {
        if (non_edges <= 4 * add_target || all_pairs <= 4096) {
            // dense regime: enumerate and shuffle
            std::vector<Edge> candidates;
            candidates.reserve(non_edges);
            for (int u = 0; u + 1 < static_cast<int>(n); ++u)
                for (int v = u + 1; v < static_cast<int>(n); ++v)
                    if (!present.contains({u, v})) candidates.push_back({u, v});
            std::shuffle(candidates.begin(), candidates.end(), rng);
            added.assign(candidates.begin(), candidates.begin() + add_target);
        } else {
            // sparse regime: rejection-sample pairs
            std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
            std::set<Edge> chosen;
            while (chosen.size() < add_target) {
                int u = pick(rng), v = pick(rng);
                if (u == v) continue;
                Edge e = make_edge(u, v);
                if (present.contains(e)) continue;
                chosen.insert(e);
            }
            added.assign(chosen.begin(), chosen.end());
        }
        for (const auto& [u, v] : added) {
            present.insert({u, v});
            ++degree[u];
            ++degree[v];
        }
    }
    res.shortfall += k - add_target;

    // --- removals from the original edges, never isolating a node ---
    std::vector<Edge> pool = original;
    std::shuffle(pool.begin(), pool.end(), rng);
    size_t removed = 0;
    for (const auto& e : pool) {
        if (removed == k) break;
        if (degree[e.first] <= 1 || degree[e.second] <= 1) continue;
        present.erase(e);
        --degree[e.first];
        --degree[e.second];
        ++removed;
    }
    res.shortfall += k - removed;

    res.edges.assign(present.begin(), present.end());
    return res;
}

}  // namespace detail

inline AttributeGraph perturb_edges(const AttributeGraph& g, uint64_t seed) {
    AttributeGraph out = g;
    auto r = detail::perturb_edge_list(g.num_nodes, g.edges, seed);
    out.edges = std::move(r.edges);
    out.augment_shortfall = r.shortfall;
    return out;
}

inline RelationGraph perturb_edges(const RelationGraph& g, uint64_t seed) {
    RelationGraph out = g;
    auto r = detail::perturb_edge_list(g.num_nodes, g.edges, seed);
    out.edges = std::move(r.edges);
    out.augment_shortfall = r.shortfall;
    return out;
}

inline NormalizedAdjacency normalize_adjacency(size_t num_nodes, const std::vector<Edge>& edges) {
    NormalizedAdjacency out;
    std::vector<std::vector<int>> adj(num_nodes);
    for (size_t i = 0; i < num_nodes; ++i) adj[i].push_back(static_cast<int>(i));  // self-loop
    for (const auto& [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    out.degrees.resize(num_nodes);
    for (size_t i = 0; i < num_nodes; ++i) out.degrees[i] = static_cast<double>(adj[i].size());

    SparseMatrix& s = out.mat;
    s.rows = s.cols = num_nodes;
    s.indptr.resize(num_nodes + 1, 0);
    for (size_t i = 0; i < num_nodes; ++i) {
        std::sort(adj[i].begin(), adj[i].end());
        s.indptr[i + 1] = s.indptr[i] + adj[i].size();
    }
    s.indices.reserve(s.indptr.back());
    s.values.reserve(s.indptr.back());
    for (size_t i = 0; i < num_nodes; ++i) {
        const double di = 1.0 / std::sqrt(out.degrees[i]);
        for (int j : adj[i]) {
            s.indices.push_back(static_cast<size_t>(j));
            s.values.push_back(di / std::sqrt(out.degrees[static_cast<size_t>(j)]));
        }
    }
    return out;
}

inline NormalizedAdjacency normalize_adjacency(const AttributeGraph& g) {
    return normalize_adjacency(g.num_nodes, g.edges);
}
inline NormalizedAdjacency normalize_adjacency(const RelationGraph& g) {
    return normalize_adjacency(g.num_nodes, g.edges);
}

// Relation graphs for a block, capped at max_nodes per graph: oversized
// blocks are split into arrival-order chunks and each chunk projected on
// its own. `offset` maps chunk-local node i to block message offset+i.
struct RelationChunk {
    RelationGraph graph;
    size_t offset = 0;
};

inline std::vector<RelationChunk> build_relation_graphs(const MessageBlock& block,
                                                        const FeatureConfig& cfg,
                                                        size_t max_nodes = 4096) {
    if (max_nodes < 1) throw Error("build_relation_graphs: max_nodes must be >= 1");
    std::vector<RelationChunk> chunks;
    const size_t n = block.messages.size();
    for (size_t start = 0; start < n; start += max_nodes) {
        const size_t len = std::min(max_nodes, n - start);
        MessageBlock sub;
        sub.index = block.index;
        sub.messages.assign(block.messages.begin() + static_cast<long>(start),
                            block.messages.begin() + static_cast<long>(start + len));
        RelationChunk chunk;
        chunk.offset = start;
        chunk.graph = project_homogeneous(build_hetero_graph(sub));
        chunk.graph.features = Matrix(len, cfg.dim);
        for (size_t i = 0; i < len; ++i) {
            std::vector<double> f = message_feature(sub.messages[i], cfg);
            std::copy(f.begin(), f.end(), chunk.graph.features.row(i));
        }
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

// Debug dump: `<prefix>.edges` holds one `u v` line per edge, and
// `<prefix>.features` the node-feature matrix with a `rows cols` header.
inline void dump_graph(const std::string& prefix, const std::vector<Edge>& edges,
                       const Matrix& features) {
    std::ofstream ef(prefix + ".edges");
    if (!ef) throw Error("cannot write '" + prefix + ".edges'");
    for (const auto& [u, v] : edges) ef << u << " " << v << "\n";
    std::ofstream ff(prefix + ".features");
    if (!ff) throw Error("cannot write '" + prefix + ".features'");
    ff << features.rows << " " << features.cols << "\n";
    char buf[32];
    for (size_t i = 0; i < features.rows; ++i) {
        for (size_t j = 0; j < features.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", features.at(i, j));
            ff << buf << (j + 1 == features.cols ? "" : " ");
        }
        ff << "\n";
    }
}

}  // namespace hcrc
