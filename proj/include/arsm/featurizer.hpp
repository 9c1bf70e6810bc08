#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "arsm/lexicon.hpp"
#include "arsm/text.hpp"

namespace arsm {

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Unit-L2 embedding of a text (all-zero only for empty text).
struct FeatureVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }

    double norm() const {
        double s = 0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }

    bool is_zero() const {
        for (double v : values)
            if (v != 0.0) return false;
        return true;
    }
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Synonym-canonical, token-sorted form. Word-order and synonym perturbations
// of the same content canonicalize identically.
inline std::string canonicalize(const std::string& text, const Lexicons& lex) {
    TokenList tokens = tokenize(text);
    for (auto& t : tokens) t = lex.canonical_token(t);
    std::sort(tokens.begin(), tokens.end());
    return join(tokens);
}

// Hashed bag of unigrams + bigrams with a sign hash, L2-normalized.
// Deterministic across runs and platforms.
inline FeatureVector embed(const std::string& text, std::size_t d) {
    FeatureVector fv;
    fv.values.assign(d, 0.0);
    TokenList tokens = tokenize(text);
    auto add = [&](const std::string& gram) {
        std::uint64_t h = fnv1a64(gram);
        std::size_t bucket = static_cast<std::size_t>(h % d);
        double sign = ((h >> 32) & 1ULL) ? 1.0 : -1.0;
        fv.values[bucket] += sign;
    };
    for (const auto& t : tokens) add(t);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) add(tokens[i] + " " + tokens[i + 1]);
    double n = fv.norm();
    if (n > 0)
        for (auto& v : fv.values) v /= n;
    return fv;
}

inline double dot(const FeatureVector& a, const FeatureVector& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("feature dimension mismatch");
    double s = 0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += a.values[i] * b.values[i];
    return s;
}

// Standard cosine in [-1,1]; zero vectors give 0.
inline double cosine(const FeatureVector& a, const FeatureVector& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0 || nb == 0) {
        if (a.dim() != b.dim()) throw DimensionMismatch("feature dimension mismatch");
        return 0.0;
    }
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

// Pipeline-facing similarity, clamped to [0,1].
inline double sim(const FeatureVector& a, const FeatureVector& b) {
    return std::max(0.0, cosine(a, b));
}

// Jaccard coefficient of the token sets; both empty -> 0.
inline double literal_match(const TokenList& q, const TokenList& e) {
    std::unordered_set<std::string> qs(q.begin(), q.end());
    std::unordered_set<std::string> es(e.begin(), e.end());
    if (qs.empty() && es.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : qs) inter += es.count(t);
    std::size_t uni = qs.size() + es.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace arsm
