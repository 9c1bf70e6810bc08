#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "arsm/text.hpp"

namespace arsm {

struct LexiconError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Read-only after load. All pattern matching and canonicalization data lives
// here; detectors are code, patterns are data.
struct Lexicons {
    std::unordered_map<std::string, std::string> synonym_map;  // variant -> canonical
    std::vector<TokenList> injection_patterns;                 // tokenized phrases
    std::vector<TokenList> role_patterns;
    std::unordered_map<std::string, std::string> entity_vocab;  // surface -> entity id
    std::unordered_set<std::string> imperative_verbs;
    std::vector<std::string> injection_templates;               // full sentences for attack synthesis
    std::unordered_map<std::string, std::string> confusable_drugs;  // drug -> near-name drug

    std::string canonical_token(const std::string& tok) const {
        auto it = synonym_map.find(tok);
        return it == synonym_map.end() ? tok : it->second;
    }
};

namespace detail {
inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::pair<std::string, std::string> split_tab(const std::string& line, int lineno) {
    auto pos = line.find('\t');
    if (pos == std::string::npos)
        throw LexiconError("lexicon line " + std::to_string(lineno) + ": expected TAB-separated pair");
    return {trim(line.substr(0, pos)), trim(line.substr(pos + 1))};
}
}  // namespace detail

// File format: INI-like sections. Pair sections use one `a<TAB>b` per line,
// list sections one phrase per line. '#' starts a comment line.
//
//   [synonyms]           variant<TAB>canonical
//   [injection_patterns] phrase
//   [role_patterns]      phrase
//   [entities]           surface<TAB>entity_id
//   [imperative_verbs]   verb
//   [injection_templates] sentence
//   [confusable_drugs]   drug<TAB>confusable
inline Lexicons load_lexicons(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LexiconError("cannot open lexicon file: " + path);
    Lexicons lex;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = t.substr(1, t.size() - 2);
            continue;
        }
        if (section == "synonyms") {
            auto [a, b] = detail::split_tab(t, lineno);
            lex.synonym_map[a] = b;
        } else if (section == "injection_patterns") {
            lex.injection_patterns.push_back(tokenize(t));
        } else if (section == "role_patterns") {
            lex.role_patterns.push_back(tokenize(t));
        } else if (section == "entities") {
            auto [a, b] = detail::split_tab(t, lineno);
            lex.entity_vocab[a] = b;
        } else if (section == "imperative_verbs") {
            lex.imperative_verbs.insert(t);
        } else if (section == "injection_templates") {
            lex.injection_templates.push_back(t);
        } else if (section == "confusable_drugs") {
            auto [a, b] = detail::split_tab(t, lineno);
            lex.confusable_drugs[a] = b;
        } else {
            throw LexiconError("lexicon line " + std::to_string(lineno) + ": unknown section '" + section + "'");
        }
    }
    // Canonical tokens must map to themselves (idempotence invariant).
    for (auto& [variant, canon] : lex.synonym_map) {
        auto it = lex.synonym_map.find(canon);
        if (it != lex.synonym_map.end() && it->second != canon)
            throw LexiconError("synonym map not idempotent at '" + variant + "' -> '" + canon + "'");
    }
    std::unordered_map<std::string, std::string> fixed = lex.synonym_map;
    for (auto& [variant, canon] : lex.synonym_map) fixed.emplace(canon, canon);
    lex.synonym_map = std::move(fixed);
    return lex;
}

inline void save_lexicons(const Lexicons& lex, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw LexiconError("cannot write lexicon file: " + path);
    std::vector<std::pair<std::string, std::string>> syn(lex.synonym_map.begin(), lex.synonym_map.end());
    std::sort(syn.begin(), syn.end());
    out << "[synonyms]\n";
    for (auto& [a, b] : syn)
        if (a != b) out << a << '\t' << b << '\n';
    out << "[injection_patterns]\n";
    for (auto& p : lex.injection_patterns) out << join(p) << '\n';
    out << "[role_patterns]\n";
    for (auto& p : lex.role_patterns) out << join(p) << '\n';
    std::vector<std::pair<std::string, std::string>> ents(lex.entity_vocab.begin(), lex.entity_vocab.end());
    std::sort(ents.begin(), ents.end());
    out << "[entities]\n";
    for (auto& [a, b] : ents) out << a << '\t' << b << '\n';
    std::vector<std::string> verbs(lex.imperative_verbs.begin(), lex.imperative_verbs.end());
    std::sort(verbs.begin(), verbs.end());
    out << "[imperative_verbs]\n";
    for (auto& v : verbs) out << v << '\n';
    out << "[injection_templates]\n";
    for (auto& s : lex.injection_templates) out << s << '\n';
    std::vector<std::pair<std::string, std::string>> pairs(lex.confusable_drugs.begin(), lex.confusable_drugs.end());
    std::sort(pairs.begin(), pairs.end());
    out << "[confusable_drugs]\n";
    for (auto& [a, b] : pairs) out << a << '\t' << b << '\n';
}

}  // namespace arsm
