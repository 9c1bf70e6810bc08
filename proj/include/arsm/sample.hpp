#pragma once

#include <stdexcept>
#include <string>

#include "arsm/featurizer.hpp"

namespace arsm {

enum class Task { Triage, Treatment, MedicationRisk };

enum class AttackKind {
    Clean,
    SemanticPerturbation,
    PromptInjection,
    DrugNameConfusion,
    FalseEvidenceSplice,
    GradientFgsm,  // training-pool only; embedding-space attack
};

inline std::string to_string(Task t) {
    switch (t) {
        case Task::Triage: return "triage";
        case Task::Treatment: return "treatment";
        case Task::MedicationRisk: return "medication_risk";
    }
    return "?";
}

inline Task task_from_string(const std::string& s) {
    if (s == "triage") return Task::Triage;
    if (s == "treatment") return Task::Treatment;
    if (s == "medication_risk") return Task::MedicationRisk;
    throw std::invalid_argument("unknown task: " + s);
}

inline std::string to_string(AttackKind k) {
    switch (k) {
        case AttackKind::Clean: return "clean";
        case AttackKind::SemanticPerturbation: return "semantic_perturbation";
        case AttackKind::PromptInjection: return "prompt_injection";
        case AttackKind::DrugNameConfusion: return "drug_name_confusion";
        case AttackKind::FalseEvidenceSplice: return "false_evidence_splice";
        case AttackKind::GradientFgsm: return "gradient_fgsm";
    }
    return "?";
}

inline AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "clean") return AttackKind::Clean;
    if (s == "semantic_perturbation") return AttackKind::SemanticPerturbation;
    if (s == "prompt_injection") return AttackKind::PromptInjection;
    if (s == "drug_name_confusion") return AttackKind::DrugNameConfusion;
    if (s == "false_evidence_splice") return AttackKind::FalseEvidenceSplice;
    if (s == "gradient_fgsm") return AttackKind::GradientFgsm;
    throw std::invalid_argument("unknown attack kind: " + s);
}

// One benchmark sample as stored in the dataset files.
struct Sample {
    std::string id;
    Task task = Task::Triage;
    AttackKind kind = AttackKind::Clean;
    std::string text;
    std::size_t y_true = 0;
    bool should_refuse = false;
};

// One training example after pool construction.
struct TrainExample {
    std::string base_id;
    AttackKind kind = AttackKind::Clean;
    FeatureVector x_clean;
    FeatureVector x_input;  // equals x_clean for clean samples
    std::size_t y = 0;
    bool should_refuse = false;
    std::vector<double> class_consistency;  // per class, in [0,1]
    bool fgsm_zero_gradient = false;
};

}  // namespace arsm
