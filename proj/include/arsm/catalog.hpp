#pragma once

#include <fstream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "arsm/graph.hpp"

namespace arsm {

// Maps decision classes onto the synthetic world: class c answers with
// drug(c) and is anchored to disease(c).
struct ClassInfo {
    std::string disease;
    std::string drug;
};

struct AnswerOutput {
    std::string text;
    OutputEntities entities;
};

class ClassCatalog {
public:
    ClassCatalog() = default;
    explicit ClassCatalog(std::vector<ClassInfo> classes) : classes_(std::move(classes)) {}

    std::size_t size() const { return classes_.size(); }
    const ClassInfo& at(std::size_t c) const { return classes_.at(c); }
    const std::vector<ClassInfo>& classes() const { return classes_; }

    // The diseases the answer is about: every disease named in the query, in
    // class order, or the class's own disease when none is named.
    std::vector<std::string> target_diseases(std::size_t c,
                                             const std::set<std::string>& query_entities) const {
        std::vector<std::string> out;
        for (const auto& ci : classes_)
            if (query_entities.count(ci.disease)) out.push_back(ci.disease);
        if (out.empty()) out.push_back(classes_.at(c).disease);
        return out;
    }

    // Templated answer for class c. Recommends the class drug for every
    // disease the query asks about, asserting one treats relation each.
    AnswerOutput answer_for(std::size_t c, const std::set<std::string>& query_entities) const {
        const ClassInfo& ci = classes_.at(c);
        std::vector<std::string> diseases = target_diseases(c, query_entities);
        AnswerOutput out;
        std::string joined = diseases[0];
        for (std::size_t i = 1; i < diseases.size(); ++i) joined += " and " + diseases[i];
        out.text = "assessment points to " + joined + ". recommended treatment is " + ci.drug +
                   " for " + joined + ".";
        out.entities.entity_ids.insert(ci.drug);
        for (const auto& d : diseases) {
            out.entities.entity_ids.insert(d);
            out.entities.asserted_relations.insert({ci.drug, d, "treats"});
        }
        return out;
    }

    // Per-class consistency of the answer templates for one query, used as
    // the consistency loss target.
    std::vector<double> consistency_profile(const std::set<std::string>& query_entities,
                                            const KnowledgeGraph& g) const {
        std::vector<double> prof(classes_.size(), 1.0);
        for (std::size_t c = 0; c < classes_.size(); ++c) {
            AnswerOutput out = answer_for(c, query_entities);
            prof[c] = consistency_score(out.entities, g).c_edge_normalized;
        }
        return prof;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& ci : classes_) arr.push_back({{"disease", ci.disease}, {"drug", ci.drug}});
        return arr;
    }

    static ClassCatalog from_json(const nlohmann::json& arr) {
        std::vector<ClassInfo> classes;
        for (const auto& j : arr)
            classes.push_back({j.at("disease").get<std::string>(), j.at("drug").get<std::string>()});
        return ClassCatalog(std::move(classes));
    }

private:
    std::vector<ClassInfo> classes_;
};

}  // namespace arsm
