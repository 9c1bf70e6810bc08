#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "arsm/featurizer.hpp"
#include "arsm/lexicon.hpp"
#include "arsm/text.hpp"

namespace arsm {

struct RiskThresholds {
    double tau_sem = 0.6;
    double tau_inj = 0.5;
    double tau_risk = 0.6;
};

struct InjectionFeatures {
    double f_abn = 0.0;   // abnormal-instruction sentence frequency
    double d_role = 0.0;  // role-tampering degree
    double r_ctrl = 1.0;  // control-statement rationality
};

struct RiskReport {
    double r_sem = 0.0;
    double r_inj = 0.0;
    double r_total = 0.0;
    double epsilon_est = 0.0;
    bool sem_flag = false;
    bool inj_flag = false;
    bool risk_flag = false;
};

namespace detail {
// Contiguous phrase match of pattern tokens inside sentence tokens.
inline bool contains_phrase(const TokenList& sent, const TokenList& pattern) {
    if (pattern.empty() || pattern.size() > sent.size()) return false;
    for (std::size_t i = 0; i + pattern.size() <= sent.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < pattern.size(); ++j) {
            if (sent[i + j] != pattern[j]) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
    }
    return false;
}

inline bool matches_any(const TokenList& sent, const std::vector<TokenList>& patterns) {
    for (const auto& p : patterns)
        if (contains_phrase(sent, p)) return true;
    return false;
}
}  // namespace detail

// Lexical deviation from the canonical form, in [0,1].
inline double estimate_epsilon(const std::string& q, const Lexicons& lex) {
    double jac = literal_match(tokenize(q), tokenize(canonicalize(q, lex)));
    return std::clamp(1.0 - jac, 0.0, 1.0);
}

// (1 - sim(Q, Q_std)) * exp(eps). Unclamped; range [0, e] for eps in [0,1].
inline double semantic_risk(const std::string& q, const Lexicons& lex, std::size_t d) {
    double s = sim(embed(q, d), embed(canonicalize(q, lex), d));
    return (1.0 - s) * std::exp(estimate_epsilon(q, lex));
}

inline InjectionFeatures injection_features(const std::string& q, const Lexicons& lex) {
    InjectionFeatures f;
    auto sentences = split_sentences(q);
    if (sentences.empty()) return f;

    std::size_t abn_sentences = 0;
    std::size_t role_hits = 0;
    std::size_t imperative = 0;
    std::size_t imperative_benign = 0;
    for (const auto& s : sentences) {
        TokenList toks = tokenize(s);
        bool inj = detail::matches_any(toks, lex.injection_patterns);
        bool role = false;
        for (const auto& p : lex.role_patterns) {
            if (detail::contains_phrase(toks, p)) {
                role = true;
                ++role_hits;
            }
        }
        if (inj) ++abn_sentences;
        if (!toks.empty() && lex.imperative_verbs.count(toks.front())) {
            ++imperative;
            if (!inj && !role) ++imperative_benign;
        }
    }
    f.f_abn = std::clamp(static_cast<double>(abn_sentences) / static_cast<double>(sentences.size()), 0.0, 1.0);
    f.d_role = 1.0 - std::exp(-static_cast<double>(role_hits));
    f.r_ctrl = imperative == 0 ? 1.0
                               : static_cast<double>(imperative_benign) / static_cast<double>(imperative);
    return f;
}

// Equal-weight fusion of the three injection features, in [0,1].
inline double injection_risk(const InjectionFeatures& f) {
    return (f.f_abn + f.d_role + (1.0 - f.r_ctrl)) / 3.0;
}

inline RiskReport assess(const std::string& q, const Lexicons& lex, std::size_t d,
                         const RiskThresholds& th = {}) {
    RiskReport r;
    r.epsilon_est = estimate_epsilon(q, lex);
    r.r_sem = semantic_risk(q, lex, d);
    r.r_inj = injection_risk(injection_features(q, lex));
    r.r_total = 0.5 * r.r_sem + 0.5 * r.r_inj;
    r.sem_flag = r.r_sem >= th.tau_sem;
    r.inj_flag = r.r_inj >= th.tau_inj;
    r.risk_flag = r.r_total >= th.tau_risk;
    return r;
}

}  // namespace arsm
