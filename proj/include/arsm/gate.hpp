#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "arsm/decision.hpp"
#include "arsm/evidence.hpp"
#include "arsm/graph.hpp"
#include "arsm/risk.hpp"

namespace arsm {

enum class Verdict { Answer, AnswerWithWarning, Refuse };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Answer: return "answer";
        case Verdict::AnswerWithWarning: return "answer_with_warning";
        case Verdict::Refuse: return "refuse";
    }
    return "?";
}

struct GateDecision {
    Verdict verdict = Verdict::Refuse;
    std::optional<std::size_t> cls;
    double confidence = 0.0;
    std::vector<std::string> reasons;

    bool answered() const { return verdict != Verdict::Refuse; }
};

struct GateThresholds {
    double tau_conf = 0.7;
    double tau_conf_star = 0.85;
};

struct ReweightCoeffs {
    double eta1 = 0.3;  // risk penalty
    double eta2 = 0.4;  // evidence support
    double eta3 = 0.3;  // consistency (or bare constant in literal mode)
};

// Conf_raw * [1 - eta1*R_total + eta2*Score_avg + eta3*consistency], clamped
// to [0,1]. Literal mode drops the consistency factor from the last term.
inline double reweight_confidence(double conf_raw, double r_total, double score_avg,
                                  double consistency, const ReweightCoeffs& eta = {},
                                  bool eq7_literal = false) {
    double last = eq7_literal ? eta.eta3 : eta.eta3 * consistency;
    double conf = conf_raw * (1.0 - eta.eta1 * r_total + eta.eta2 * score_avg + last);
    return std::clamp(conf, 0.0, 1.0);
}

// Decision table, in precedence order:
//   1. injection flag            -> Refuse
//   2. risk flag + failed consistency -> Refuse
//   3. conf >= tau* and consistency ok -> Answer
//   4. tau <= conf < tau*        -> AnswerWithWarning
//   5. otherwise                 -> Refuse (low confidence)
// A refusal-head probability >= 0.5 escalates one step.
inline GateDecision gate(const DecisionDistribution& p, const RiskReport& risk,
                         const EvidenceBundle& bundle, const ConsistencyResult& cons,
                         const GateThresholds& th = {}, const ReweightCoeffs& eta = {},
                         bool eq7_literal = false) {
    GateDecision d;
    d.cls = p.argmax();

    if (risk.inj_flag) {
        d.verdict = Verdict::Refuse;
        d.cls.reset();
        d.confidence = 0.0;
        d.reasons.push_back("INJECTION_FLAG");
        return d;
    }
    if (risk.risk_flag && !cons.pass) {
        d.verdict = Verdict::Refuse;
        d.cls.reset();
        d.confidence = 0.0;
        d.reasons = {"HIGH_RISK", "CONSISTENCY_FAIL"};
        return d;
    }

    double conf = reweight_confidence(p.raw_confidence, risk.r_total, bundle.score_avg,
                                      cons.c_edge_normalized, eta, eq7_literal);
    d.confidence = conf;

    if (conf >= th.tau_conf_star && cons.pass) {
        d.verdict = Verdict::Answer;
    } else if (conf >= th.tau_conf && conf < th.tau_conf_star) {
        d.verdict = Verdict::AnswerWithWarning;
        if (!cons.pass) d.reasons.push_back("CONSISTENCY_FAIL");
    } else {
        d.verdict = Verdict::Refuse;
        d.cls.reset();
        d.reasons.push_back("LOW_CONFIDENCE");
        if (!cons.pass) d.reasons.push_back("CONSISTENCY_FAIL");
        return d;
    }

    if (p.refusal_prob >= 0.5) {
        d.reasons.push_back("REFUSAL_HEAD");
        if (d.verdict == Verdict::Answer) {
            d.verdict = Verdict::AnswerWithWarning;
        } else {
            d.verdict = Verdict::Refuse;
            d.cls.reset();
        }
    }
    return d;
}

}  // namespace arsm
