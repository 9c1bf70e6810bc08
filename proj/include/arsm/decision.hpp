#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "arsm/featurizer.hpp"
#include "arsm/rng.hpp"

namespace arsm {

struct LossWeights {
    double alpha = 0.3;  // accuracy
    double beta = 0.3;   // robustness
    double gamma = 0.2;  // safety refusal
    double delta = 0.2;  // knowledge consistency
};

// Linear-softmax decision head with a sigmoid refusal head. Kept linear so
// every gradient, including the input-space one used for adversarial
// generation, is closed-form.
struct ModelParams {
    std::size_t n_classes = 0;
    std::size_t dim = 0;
    std::vector<double> W;      // row-major C x d
    std::vector<double> b;      // C
    std::vector<double> w_ref;  // d
    double b_ref = 0.0;
    int version = 1;

    static ModelParams zeros(std::size_t C, std::size_t d) {
        ModelParams p;
        p.n_classes = C;
        p.dim = d;
        p.W.assign(C * d, 0.0);
        p.b.assign(C, 0.0);
        p.w_ref.assign(d, 0.0);
        return p;
    }

    static ModelParams random(std::size_t C, std::size_t d, std::uint64_t seed, double scale = 0.01) {
        ModelParams p = zeros(C, d);
        Rng rng(seed);
        for (auto& w : p.W) w = rng.symmetric() * scale;
        for (auto& w : p.w_ref) w = rng.symmetric() * scale;
        return p;
    }

    double& w(std::size_t c, std::size_t j) { return W[c * dim + j]; }
    double w(std::size_t c, std::size_t j) const { return W[c * dim + j]; }
};

struct DecisionDistribution {
    std::vector<double> probs;
    double refusal_prob = 0.0;
    double raw_confidence = 0.0;

    std::size_t argmax() const {
        return static_cast<std::size_t>(
            std::max_element(probs.begin(), probs.end()) - probs.begin());
    }
};

struct LossBreakdown {
    double l_acc = 0.0;
    double l_rob = 0.0;
    double l_sec = 0.0;
    double l_cons = 0.0;
    double l_total = 0.0;
};

struct Gradients {
    std::vector<double> dW;      // C x d
    std::vector<double> db;      // C
    std::vector<double> dw_ref;  // d
    double db_ref = 0.0;
};

namespace detail {
constexpr double kProbFloor = 1e-12;

inline std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

inline double safe_log(double p) { return std::log(std::max(p, kProbFloor)); }
}  // namespace detail

inline DecisionDistribution forward(const FeatureVector& x, const ModelParams& theta) {
    if (x.dim() != theta.dim) throw DimensionMismatch("forward: input dimension mismatch");
    std::vector<double> logits(theta.n_classes, 0.0);
    for (std::size_t c = 0; c < theta.n_classes; ++c) {
        double z = theta.b[c];
        for (std::size_t j = 0; j < theta.dim; ++j) z += theta.w(c, j) * x.values[j];
        logits[c] = z;
    }
    DecisionDistribution d;
    d.probs = detail::softmax(logits);
    double zr = theta.b_ref;
    for (std::size_t j = 0; j < theta.dim; ++j) zr += theta.w_ref[j] * x.values[j];
    d.refusal_prob = 1.0 / (1.0 + std::exp(-zr));
    d.raw_confidence = *std::max_element(d.probs.begin(), d.probs.end());
    return d;
}

// Cross-entropy against the true class.
inline double loss_acc(const DecisionDistribution& p, std::size_t y) {
    return -detail::safe_log(p.probs.at(y));
}

// KL(p_clean || p_adv).
inline double loss_rob(const DecisionDistribution& p_clean, const DecisionDistribution& p_adv) {
    double kl = 0.0;
    for (std::size_t c = 0; c < p_clean.probs.size(); ++c)
        kl += p_clean.probs[c] *
              (detail::safe_log(p_clean.probs[c]) - detail::safe_log(p_adv.probs[c]));
    return std::max(kl, 0.0);
}

// Binary cross-entropy of the refusal head against the refusal label.
inline double loss_sec(double refusal_prob, bool should_refuse) {
    return should_refuse ? -detail::safe_log(refusal_prob)
                         : -detail::safe_log(1.0 - refusal_prob);
}

// Expected inconsistency of the answer distribution.
inline double loss_cons(const DecisionDistribution& p, const std::vector<double>& class_consistency) {
    double l = 0.0;
    for (std::size_t c = 0; c < p.probs.size(); ++c)
        l += p.probs[c] * (1.0 - class_consistency.at(c));
    return l;
}

inline LossBreakdown total_loss(double l_acc, double l_rob, double l_sec, double l_cons,
                                const LossWeights& w) {
    LossBreakdown b{l_acc, l_rob, l_sec, l_cons, 0.0};
    b.l_total = w.alpha * l_acc + w.beta * l_rob + w.gamma * l_sec + w.delta * l_cons;
    return b;
}

// Analytic gradients of l_total w.r.t. theta. The accuracy, refusal, and
// consistency terms flow through the presented input x_adv (equal to x for
// clean samples); the robustness term KL(p(x) || p(x_adv)) also flows through
// the clean pass.
inline Gradients gradients(const FeatureVector& x, const FeatureVector& x_adv, std::size_t y,
                           bool should_refuse, const std::vector<double>& class_consistency,
                           const ModelParams& theta, const LossWeights& w) {
    DecisionDistribution p = forward(x, theta);      // clean anchor
    DecisionDistribution q = forward(x_adv, theta);  // presented input
    std::size_t C = theta.n_classes, d = theta.dim;

    double kl = loss_rob(p, q);
    double lcons = loss_cons(q, class_consistency);

    // d l_total / d logits of the presented pass
    std::vector<double> dz(C, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        double dacc = q.probs[c] - (c == y ? 1.0 : 0.0);
        double drob = q.probs[c] - p.probs[c];
        double dcons = q.probs[c] * ((1.0 - class_consistency.at(c)) - lcons);
        dz[c] = w.alpha * dacc + w.beta * drob + w.delta * dcons;
    }
    // d l_rob / d logits of the clean pass
    std::vector<double> dz_clean(C, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        double lr = detail::safe_log(p.probs[c]) - detail::safe_log(q.probs[c]);
        dz_clean[c] = w.beta * p.probs[c] * (lr - kl);
    }

    Gradients g;
    g.dW.assign(C * d, 0.0);
    g.db.assign(C, 0.0);
    g.dw_ref.assign(d, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        g.db[c] = dz[c] + dz_clean[c];
        for (std::size_t j = 0; j < d; ++j)
            g.dW[c * d + j] = dz[c] * x_adv.values[j] + dz_clean[c] * x.values[j];
    }
    double dref = w.gamma * (q.refusal_prob - (should_refuse ? 1.0 : 0.0));
    g.db_ref = dref;
    for (std::size_t j = 0; j < d; ++j) g.dw_ref[j] = dref * x_adv.values[j];
    return g;
}

// Gradient of the cross-entropy loss w.r.t. the input: W^T (p - onehot(y)).
inline std::vector<double> grad_x_acc(const FeatureVector& x, std::size_t y,
                                      const ModelParams& theta) {
    DecisionDistribution p = forward(x, theta);
    std::vector<double> g(theta.dim, 0.0);
    for (std::size_t c = 0; c < theta.n_classes; ++c) {
        double dz = p.probs[c] - (c == y ? 1.0 : 0.0);
        for (std::size_t j = 0; j < theta.dim; ++j) g[j] += theta.w(c, j) * dz;
    }
    return g;
}

inline void save_checkpoint(const ModelParams& theta, const std::string& path,
                            const std::string& config_hash = "", std::uint64_t seed = 0) {
    nlohmann::json j;
    j["version"] = theta.version;
    j["n_classes"] = theta.n_classes;
    j["dim"] = theta.dim;
    j["W"] = theta.W;
    j["b"] = theta.b;
    j["w_ref"] = theta.w_ref;
    j["b_ref"] = theta.b_ref;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << j.dump(2) << '\n';
}

inline ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    ModelParams p;
    p.version = j.at("version").get<int>();
    p.n_classes = j.at("n_classes").get<std::size_t>();
    p.dim = j.at("dim").get<std::size_t>();
    p.W = j.at("W").get<std::vector<double>>();
    p.b = j.at("b").get<std::vector<double>>();
    p.w_ref = j.at("w_ref").get<std::vector<double>>();
    p.b_ref = j.at("b_ref").get<double>();
    if (p.W.size() != p.n_classes * p.dim || p.b.size() != p.n_classes || p.w_ref.size() != p.dim)
        throw std::runtime_error("checkpoint dimensions inconsistent: " + path);
    return p;
}

}  // namespace arsm
