#pragma once

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "arsm/featurizer.hpp"
#include "arsm/text.hpp"

namespace arsm {

struct EvidenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvidenceRecord {
    std::string id;
    std::string text;
    FeatureVector vector;  // embed(text, d) at ingest
    double authority = 0.0;
    std::string source;
};

struct ScoredEvidence {
    const EvidenceRecord* record = nullptr;
    double sim = 0.0;   // modified similarity vs the query (Eq. 4 form)
    double cons = 0.0;  // mean pairwise similarity against co-candidates
    double score = 0.0;
};

struct EvidenceBundle {
    std::vector<ScoredEvidence> selected;  // score desc, ties by id asc
    double score_avg = 0.0;
};

class EvidenceStore {
public:
    explicit EvidenceStore(std::size_t d = 256) : d_(d) {}

    std::size_t dim() const { return d_; }
    std::size_t size() const { return records_.size(); }
    const std::vector<EvidenceRecord>& records() const { return records_; }

    void add(const std::string& id, const std::string& text, double authority,
             const std::string& source) {
        if (authority < 0.0 || authority > 1.0)
            throw EvidenceError("authority out of [0,1] for record '" + id + "'");
        if (!ids_.insert(id).second) throw EvidenceError("duplicate evidence id '" + id + "'");
        records_.push_back({id, text, embed(text, d_), authority, source});
    }

private:
    std::size_t d_;
    std::vector<EvidenceRecord> records_;
    std::unordered_set<std::string> ids_;
};

// Evidence file: one JSON object per line, fields id, text, authority, source.
inline EvidenceStore ingest(const std::string& path, std::size_t d) {
    std::ifstream in(path);
    if (!in) throw EvidenceError("cannot open evidence file: " + path);
    EvidenceStore store(d);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            store.add(j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                      j.at("authority").get<double>(), j.value("source", std::string{}));
        } catch (const nlohmann::json::exception& e) {
            throw EvidenceError("evidence line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return store;
}

// Cosine-plus-literal-match similarity:
//   (max(0, x.e) + lambda * Match(Q, e_text)) / (|x||e| + lambda)
inline double modified_similarity(const FeatureVector& x, const TokenList& q_tokens,
                                  const EvidenceRecord& e, double lambda) {
    double nx = x.norm(), ne = e.vector.norm();
    if (nx == 0 || ne == 0) return 0.0;
    double d = std::max(0.0, dot(x, e.vector));
    double match = literal_match(q_tokens, tokenize(e.text));
    return (d + lambda * match) / (nx * ne + lambda);
}

// Exhaustive top-k scan; ties broken by id ascending.
inline std::vector<const EvidenceRecord*> retrieve_topk(const EvidenceStore& store,
                                                        const FeatureVector& x,
                                                        const TokenList& q_tokens, std::size_t k,
                                                        double lambda = 0.2) {
    std::vector<std::pair<double, const EvidenceRecord*>> scored;
    scored.reserve(store.size());
    for (const auto& r : store.records())
        scored.emplace_back(modified_similarity(x, q_tokens, r, lambda), &r);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->id < b.second->id;
    });
    if (scored.size() > k) scored.resize(k);
    std::vector<const EvidenceRecord*> out;
    out.reserve(scored.size());
    for (auto& [s, r] : scored) out.push_back(r);
    return out;
}

// Credibility score over the candidate set; keeps the top m.
// Cons is the mean pairwise embedding similarity against the other candidates.
inline EvidenceBundle credibility_rank(const std::vector<const EvidenceRecord*>& candidates,
                                       const FeatureVector& x, const TokenList& q_tokens,
                                       double mu1, double mu2, double mu3, std::size_t m,
                                       double lambda = 0.2) {
    EvidenceBundle bundle;
    if (candidates.empty()) return bundle;
    std::vector<ScoredEvidence> scored;
    scored.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        ScoredEvidence se;
        se.record = candidates[i];
        se.sim = modified_similarity(x, q_tokens, *candidates[i], lambda);
        if (candidates.size() == 1) {
            se.cons = 1.0;
        } else {
            double acc = 0.0;
            for (std::size_t j = 0; j < candidates.size(); ++j) {
                if (j == i) continue;
                acc += sim(candidates[i]->vector, candidates[j]->vector);
            }
            se.cons = acc / static_cast<double>(candidates.size() - 1);
        }
        se.score = mu1 * se.sim + mu2 * candidates[i]->authority + mu3 * se.cons;
        scored.push_back(se);
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredEvidence& a, const ScoredEvidence& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.record->id < b.record->id;
    });
    if (scored.size() > m) scored.resize(m);
    double acc = 0.0;
    for (const auto& se : scored) acc += se.score;
    bundle.score_avg = scored.empty() ? 0.0 : acc / static_cast<double>(scored.size());
    bundle.selected = std::move(scored);
    return bundle;
}

}  // namespace arsm
