#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "arsm/decision.hpp"
#include "arsm/featurizer.hpp"
#include "arsm/graph.hpp"
#include "arsm/lexicon.hpp"
#include "arsm/rng.hpp"
#include "arsm/sample.hpp"
#include "arsm/text.hpp"

namespace arsm {

// Normalized-gradient ascent step on the accuracy loss:
//   x_adv = x + eps * grad / ||grad||_2
// Zero gradient leaves x unchanged and sets *zero_gradient.
inline FeatureVector fgsm_perturb(const FeatureVector& x, std::size_t y, const ModelParams& theta,
                                  double eps, bool* zero_gradient = nullptr) {
    std::vector<double> g = grad_x_acc(x, y, theta);
    double n = 0.0;
    for (double v : g) n += v * v;
    n = std::sqrt(n);
    if (zero_gradient) *zero_gradient = (n == 0.0);
    if (n == 0.0) return x;
    FeatureVector out = x;
    for (std::size_t j = 0; j < g.size(); ++j) out.values[j] += eps * g[j] / n;
    return out;
}

namespace detail {
// canonical -> sorted list of non-canonical variants
inline std::map<std::string, std::vector<std::string>> reverse_synonyms(const Lexicons& lex) {
    std::map<std::string, std::vector<std::string>> rev;
    for (const auto& [variant, canon] : lex.synonym_map)
        if (variant != canon) rev[canon].push_back(variant);
    for (auto& [canon, variants] : rev) std::sort(variants.begin(), variants.end());
    return rev;
}
}  // namespace detail

// Synonym rewriting plus one adjacent word-order swap. Length-preserving and
// deterministic per (input, rng state).
inline std::string perturb_semantic(const std::string& text, const Lexicons& lex, Rng& rng,
                                    double p_swap = 0.5) {
    TokenList toks = tokenize(text);
    auto rev = detail::reverse_synonyms(lex);
    for (auto& t : toks) {
        auto it = rev.find(lex.canonical_token(t));
        if (it == rev.end()) continue;
        if (rng.chance(p_swap)) {
            const auto& variants = it->second;
            // pick a variant different from the current surface when possible
            std::string pick = variants[rng.below(variants.size())];
            if (pick == t && variants.size() > 1)
                pick = variants[(rng.below(variants.size() - 1) + 1) % variants.size()];
            t = pick;
        }
    }
    if (toks.size() >= 2) {
        std::size_t i = rng.below(toks.size() - 1);
        std::swap(toks[i], toks[i + 1]);
    }
    return join(toks);
}

// Inserts one malicious instruction sentence from the template pool, either
// before or after the original text (the original survives verbatim).
inline std::string inject_prompt(const std::string& text, const Lexicons& lex, Rng& rng) {
    if (lex.injection_templates.empty()) return text;
    const std::string& tpl = lex.injection_templates[rng.below(lex.injection_templates.size())];
    if (rng.chance(0.5)) return tpl + ". " + text;
    std::string out = text;
    if (!out.empty() && out.back() != '.' && out.back() != '?' && out.back() != '!') out += ".";
    return out + " " + tpl + ".";
}

// Replaces one drug mention with its near-name confusable counterpart.
inline std::string confuse_drug(const std::string& text, const Lexicons& lex, Rng& rng,
                                bool* substituted = nullptr) {
    TokenList toks = tokenize(text);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < toks.size(); ++i)
        if (lex.confusable_drugs.count(toks[i])) hits.push_back(i);
    if (substituted) *substituted = !hits.empty();
    if (hits.empty()) return text;
    std::size_t i = hits[rng.below(hits.size())];
    toks[i] = lex.confusable_drugs.at(toks[i]);
    return join(toks);
}

struct SpliceResult {
    std::string text;  // base text preserved as prefix
    std::tuple<std::string, std::string, std::string> asserted;  // contradicts the graph
    std::string evidence_text;  // the fabricated sentence alone
};

// Appends a fabricated evidence sentence asserting `drug treats disease`
// where the graph says contraindicates. Prefers an edge touching an entity
// already mentioned in the text.
inline SpliceResult splice_false_evidence(const std::string& text, const KnowledgeGraph& graph,
                                          const Lexicons& lex, Rng& rng) {
    std::vector<KnowledgeGraph::Pair> contra;
    for (const auto& [pair, label] : graph.edges())
        if (label == "contraindicates") contra.push_back(pair);
    SpliceResult r;
    r.text = text;
    if (contra.empty()) return r;

    std::set<std::string> mentioned = extract_entity_ids(text, lex);
    std::vector<KnowledgeGraph::Pair> preferred;
    for (const auto& p : contra)
        if (mentioned.count(p.first) || mentioned.count(p.second)) preferred.push_back(p);
    const auto& pool = preferred.empty() ? contra : preferred;
    auto [a, b] = pool[rng.below(pool.size())];
    // order as (drug, disease): the drug side is the one in the confusable table
    std::string drug = lex.confusable_drugs.count(a) ? a : b;
    std::string disease = drug == a ? b : a;

    static const char* templates[] = {
        "new evidence confirms %D treats %C effectively",
        "recent studies report %D treats %C with strong outcomes",
        "updated guidance states %D treats %C safely",
    };
    std::string sentence = templates[rng.below(3)];
    auto replace = [](std::string s, const std::string& from, const std::string& to) {
        auto pos = s.find(from);
        if (pos != std::string::npos) s.replace(pos, from.size(), to);
        return s;
    };
    sentence = replace(replace(sentence, "%D", drug), "%C", disease);

    std::string out = text;
    if (!out.empty() && out.back() != '.' && out.back() != '?' && out.back() != '!') out += ".";
    r.text = out + " " + sentence + ".";
    r.asserted = {drug, disease, "treats"};
    r.evidence_text = sentence;
    return r;
}

struct PoolConfig {
    double ratio = 0.3;  // fraction of samples replaced by adversarial variants
    double eps = 0.01;   // gradient perturbation step
    double p_swap = 0.5;
    std::uint64_t seed = 42;
};

struct PoolStats {
    std::map<AttackKind, std::size_t> counts;
};

// Builds the training pool: floor(ratio*N) samples are replaced by adversarial
// variants, split evenly over the gradient attack and the four text attacks.
// `consistency_of` supplies the per-class consistency profile for a sample.
inline std::vector<TrainExample> build_pool(
    const std::vector<Sample>& dataset, const ModelParams& theta, const PoolConfig& cfg,
    const Lexicons& lex, const KnowledgeGraph& graph, std::size_t d,
    const std::function<std::vector<double>(const Sample&)>& consistency_of,
    PoolStats* stats = nullptr) {
    std::vector<TrainExample> pool;
    pool.reserve(dataset.size());
    std::size_t n_adv = static_cast<std::size_t>(cfg.ratio * static_cast<double>(dataset.size()));

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng pick(Rng::mix(cfg.seed, 0x9001));
    shuffle(order, pick);

    std::vector<AttackKind> kinds = {AttackKind::GradientFgsm, AttackKind::SemanticPerturbation,
                                     AttackKind::PromptInjection, AttackKind::DrugNameConfusion,
                                     AttackKind::FalseEvidenceSplice};
    std::map<std::size_t, AttackKind> attack_for;
    for (std::size_t i = 0; i < n_adv; ++i) attack_for[order[i]] = kinds[i % kinds.size()];

    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Sample& s = dataset[i];
        TrainExample ex;
        ex.base_id = s.id;
        ex.y = s.y_true;
        ex.should_refuse = s.should_refuse;
        ex.kind = s.kind;
        ex.x_clean = embed(s.text, d);
        ex.x_input = ex.x_clean;
        ex.class_consistency = consistency_of(s);

        auto it = attack_for.find(i);
        if (it != attack_for.end()) {
            Rng rng(Rng::mix(cfg.seed, fnv1a64(s.id)));
            ex.kind = it->second;
            switch (it->second) {
                case AttackKind::GradientFgsm:
                    ex.x_input = fgsm_perturb(ex.x_clean, s.y_true, theta, cfg.eps,
                                              &ex.fgsm_zero_gradient);
                    break;
                case AttackKind::SemanticPerturbation:
                    ex.x_input = embed(perturb_semantic(s.text, lex, rng, cfg.p_swap), d);
                    break;
                case AttackKind::PromptInjection:
                    ex.x_input = embed(inject_prompt(s.text, lex, rng), d);
                    ex.should_refuse = true;
                    break;
                case AttackKind::DrugNameConfusion:
                    ex.x_input = embed(confuse_drug(s.text, lex, rng), d);
                    break;
                case AttackKind::FalseEvidenceSplice:
                    ex.x_input = embed(splice_false_evidence(s.text, graph, lex, rng).text, d);
                    ex.should_refuse = true;
                    break;
                case AttackKind::Clean:
                    break;
            }
        }
        if (stats) stats->counts[ex.kind]++;
        pool.push_back(std::move(ex));
    }
    return pool;
}

}  // namespace arsm
