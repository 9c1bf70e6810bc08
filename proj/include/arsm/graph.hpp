#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "arsm/lexicon.hpp"
#include "arsm/text.hpp"

namespace arsm {

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Undirected labeled graph over entity ids. Edges stored once per unordered
// pair; no self-loops. Exclusive label pairs declare mutually contradicting
// relations (e.g. treats vs contraindicates).
class KnowledgeGraph {
public:
    using Pair = std::pair<std::string, std::string>;

    void add_entity(const std::string& id) { entities_.insert(id); }

    void add_edge(const std::string& a, const std::string& b, const std::string& label) {
        if (a == b) throw GraphError("self-loop on entity '" + a + "'");
        if (!entities_.count(a)) throw GraphError("unknown edge endpoint '" + a + "'");
        if (!entities_.count(b)) throw GraphError("unknown edge endpoint '" + b + "'");
        Pair key = ordered(a, b);
        auto it = edges_.find(key);
        if (it != edges_.end() && it->second != label)
            throw GraphError("conflicting labels for edge " + a + "--" + b);
        edges_[key] = label;
    }

    void add_exclusive(const std::string& la, const std::string& lb) {
        exclusive_.insert(la < lb ? Pair{la, lb} : Pair{lb, la});
    }

    bool has_entity(const std::string& id) const { return entities_.count(id) > 0; }

    // Empty string when no edge.
    std::string edge_label(const std::string& a, const std::string& b) const {
        auto it = edges_.find(ordered(a, b));
        return it == edges_.end() ? std::string{} : it->second;
    }

    bool labels_exclusive(const std::string& la, const std::string& lb) const {
        if (la == lb) return false;
        return exclusive_.count(la < lb ? Pair{la, lb} : Pair{lb, la}) > 0;
    }

    const std::set<std::string>& entities() const { return entities_; }
    const std::map<Pair, std::string>& edges() const { return edges_; }
    const std::set<Pair>& exclusive_pairs() const { return exclusive_; }

private:
    static Pair ordered(const std::string& a, const std::string& b) {
        return a < b ? Pair{a, b} : Pair{b, a};
    }

    std::set<std::string> entities_;
    std::map<Pair, std::string> edges_;
    std::set<Pair> exclusive_;
};

struct OutputEntities {
    std::set<std::string> entity_ids;
    std::set<std::tuple<std::string, std::string, std::string>> asserted_relations;
};

struct ConsistencyResult {
    double c_paper = 1.0;           // numerator / |V|^2, ordered pairs
    double c_edge_normalized = 1.0;  // numerator / realized graph edges among V
    bool pass = true;
};

// Graph file: first data line lists all entities (whitespace separated),
// then one edge per line `a<TAB>b<TAB>label`. An optional `[exclusive]`
// section follows with `label_a<TAB>label_b` pairs. '#' comments allowed.
inline KnowledgeGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open graph file: " + path);
    KnowledgeGraph g;
    std::string line;
    int lineno = 0;
    bool have_entities = false;
    bool exclusive_section = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t == "[exclusive]") {
            exclusive_section = true;
            continue;
        }
        std::string where = " (line " + std::to_string(lineno) + ")";
        if (!have_entities) {
            std::istringstream ss(t);
            std::string e;
            while (ss >> e) g.add_entity(e);
            have_entities = true;
            continue;
        }
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            auto pos = t.find('\t', start);
            cols.push_back(detail::trim(t.substr(start, pos - start)));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        try {
            if (exclusive_section) {
                if (cols.size() != 2) throw GraphError("expected `label_a<TAB>label_b`");
                g.add_exclusive(cols[0], cols[1]);
            } else {
                if (cols.size() != 3) throw GraphError("expected `a<TAB>b<TAB>label`");
                g.add_edge(cols[0], cols[1], cols[2]);
            }
        } catch (const GraphError& e) {
            throw GraphError(std::string(e.what()) + where);
        }
    }
    return g;
}

inline void save_graph(const KnowledgeGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw GraphError("cannot write graph file: " + path);
    bool first = true;
    for (const auto& e : g.entities()) {
        if (!first) out << ' ';
        out << e;
        first = false;
    }
    out << '\n';
    for (const auto& [pair, label] : g.edges())
        out << pair.first << '\t' << pair.second << '\t' << label << '\n';
    if (!g.exclusive_pairs().empty()) {
        out << "[exclusive]\n";
        for (const auto& [a, b] : g.exclusive_pairs()) out << a << '\t' << b << '\n';
    }
}

// Longest-match scan of the entity vocabulary over the token stream.
inline std::set<std::string> extract_entity_ids(const std::string& text, const Lexicons& lex) {
    std::set<std::string> out;
    TokenList toks = tokenize(text);
    // Multi-word surfaces are stored space-joined in the vocab.
    std::size_t max_len = 1;
    for (const auto& [surface, id] : lex.entity_vocab) {
        std::size_t words = 1 + static_cast<std::size_t>(std::count(surface.begin(), surface.end(), ' '));
        max_len = std::max(max_len, words);
    }
    std::size_t i = 0;
    while (i < toks.size()) {
        bool matched = false;
        for (std::size_t len = std::min(max_len, toks.size() - i); len >= 1; --len) {
            std::string surface = toks[i];
            for (std::size_t j = 1; j < len; ++j) surface += " " + toks[i + j];
            auto it = lex.entity_vocab.find(surface);
            if (it != lex.entity_vocab.end()) {
                out.insert(it->second);
                i += len;
                matched = true;
                break;
            }
        }
        if (!matched) ++i;
    }
    return out;
}

// Entities from a lexicon scan of the output text plus the relations declared
// by the answer template that produced it.
inline OutputEntities extract_entities(
    const std::string& output_text, const Lexicons& lex,
    const std::set<std::tuple<std::string, std::string, std::string>>& template_relations = {}) {
    OutputEntities out;
    out.entity_ids = extract_entity_ids(output_text, lex);
    for (const auto& rel : template_relations) {
        out.entity_ids.insert(std::get<0>(rel));
        out.entity_ids.insert(std::get<1>(rel));
        out.asserted_relations.insert(rel);
    }
    return out;
}

namespace detail {
// 1 iff the asserted relations between a and b do not contradict the edge label.
inline int rel_consistent(const OutputEntities& out, const KnowledgeGraph& g,
                          const std::string& a, const std::string& b,
                          const std::string& edge_label) {
    for (const auto& [x, y, label] : out.asserted_relations) {
        bool same_pair = (x == a && y == b) || (x == b && y == a);
        if (same_pair && g.labels_exclusive(label, edge_label)) return 0;
    }
    return 1;
}
}  // namespace detail

// Pairwise agreement of the output's entity relations with the graph.
// c_paper sums A_ij * Rel over ordered pairs and divides by |V|^2;
// c_edge_normalized divides the same numerator by the realized-edge count.
inline ConsistencyResult consistency_score(const OutputEntities& out, const KnowledgeGraph& g,
                                           double tau_cons = 0.8, bool gate_on_paper = false) {
    ConsistencyResult r;
    std::vector<std::string> v(out.entity_ids.begin(), out.entity_ids.end());
    if (v.size() <= 1) {
        r.c_paper = 1.0;
        r.c_edge_normalized = 1.0;
        r.pass = true;
        return r;
    }
    std::size_t numerator = 0;
    std::size_t realized = 0;  // ordered pairs with a graph edge
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (i == j) continue;
            std::string label = g.edge_label(v[i], v[j]);
            if (label.empty()) continue;
            ++realized;
            numerator += detail::rel_consistent(out, g, v[i], v[j], label);
        }
    }
    r.c_paper = static_cast<double>(numerator) / static_cast<double>(v.size() * v.size());
    r.c_edge_normalized =
        realized == 0 ? 1.0 : static_cast<double>(numerator) / static_cast<double>(realized);
    r.pass = (gate_on_paper ? r.c_paper : r.c_edge_normalized) >= tau_cons;
    return r;
}

}  // namespace arsm
