#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "arsm/featurizer.hpp"
#include "arsm/gate.hpp"
#include "arsm/risk.hpp"

namespace arsm {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All pipeline hyperparameters with their published defaults. Loaded from a
// flat key=value file; unknown keys are rejected. ARSM_SEED overrides the seed.
struct GlobalConfig {
    // featurizer
    std::size_t dim = 256;
    // risk thresholds
    double tau_sem = 0.6;
    double tau_inj = 0.5;
    double tau_risk = 0.6;
    // retrieval
    double lambda = 0.2;
    std::size_t k = 10;
    std::size_t m = 5;
    double mu1 = 0.4, mu2 = 0.3, mu3 = 0.3;
    // consistency
    double tau_cons = 0.8;
    bool consistency_gate_paper = false;  // gate on the |V|^2-normalized score
    // confidence reweighting
    double eta1 = 0.3, eta2 = 0.4, eta3 = 0.3;
    double tau_conf = 0.7;
    double tau_conf_star = 0.85;
    bool eq7_literal = false;
    // objective
    double alpha = 0.3, beta = 0.3, gamma = 0.2, delta = 0.2;
    // training
    std::size_t epochs = 100;
    // Initial rate for the cosine schedule, sized for the linear-softmax head
    // over unit-norm hashed features; published schedules for fine-tuned
    // language backbones are far too small to move this head off its
    // near-uniform init within the epoch budget.
    double lr = 2.0;
    std::size_t batch_size = 32;
    double weight_decay = 0.0001;
    double adv_ratio = 0.3;
    double eps = 0.01;
    double p_swap = 0.5;
    // reward
    bool eq9_three_term = false;
    // evaluation
    bool strict_accuracy = false;
    // reproducibility
    std::uint64_t seed = 42;

    RiskThresholds risk_thresholds() const { return {tau_sem, tau_inj, tau_risk}; }
    GateThresholds gate_thresholds() const { return {tau_conf, tau_conf_star}; }
    ReweightCoeffs reweight_coeffs() const { return {eta1, eta2, eta3}; }
    LossWeights loss_weights() const { return {alpha, beta, gamma, delta}; }

    std::map<std::string, std::string> to_map() const {
        std::map<std::string, std::string> m_;
        auto put = [&](const std::string& k_, auto v) {
            std::ostringstream ss;
            ss << v;
            m_[k_] = ss.str();
        };
        put("dim", dim);
        put("tau_sem", tau_sem);
        put("tau_inj", tau_inj);
        put("tau_risk", tau_risk);
        put("lambda", lambda);
        put("k", k);
        put("m", m);
        put("mu1", mu1);
        put("mu2", mu2);
        put("mu3", mu3);
        put("tau_cons", tau_cons);
        put("consistency_gate_paper", consistency_gate_paper ? 1 : 0);
        put("eta1", eta1);
        put("eta2", eta2);
        put("eta3", eta3);
        put("tau_conf", tau_conf);
        put("tau_conf_star", tau_conf_star);
        put("eq7_literal", eq7_literal ? 1 : 0);
        put("alpha", alpha);
        put("beta", beta);
        put("gamma", gamma);
        put("delta", delta);
        put("epochs", epochs);
        put("lr", lr);
        put("batch_size", batch_size);
        put("weight_decay", weight_decay);
        put("adv_ratio", adv_ratio);
        put("eps", eps);
        put("p_swap", p_swap);
        put("eq9_three_term", eq9_three_term ? 1 : 0);
        put("strict_accuracy", strict_accuracy ? 1 : 0);
        put("seed", seed);
        return m_;
    }

    std::string hash() const {
        std::string canon;
        for (const auto& [k_, v] : to_map()) canon += k_ + "=" + v + "\n";
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(canon)));
        return std::string(buf);
    }

    void set(const std::string& key, const std::string& value) {
        auto as_d = [&] { return std::stod(value); };
        auto as_u = [&] { return static_cast<std::size_t>(std::stoull(value)); };
        auto as_b = [&] { return value == "1" || value == "true"; };
        if (key == "dim") dim = as_u();
        else if (key == "tau_sem") tau_sem = as_d();
        else if (key == "tau_inj") tau_inj = as_d();
        else if (key == "tau_risk") tau_risk = as_d();
        else if (key == "lambda") lambda = as_d();
        else if (key == "k") k = as_u();
        else if (key == "m") m = as_u();
        else if (key == "mu1") mu1 = as_d();
        else if (key == "mu2") mu2 = as_d();
        else if (key == "mu3") mu3 = as_d();
        else if (key == "tau_cons") tau_cons = as_d();
        else if (key == "consistency_gate_paper") consistency_gate_paper = as_b();
        else if (key == "eta1") eta1 = as_d();
        else if (key == "eta2") eta2 = as_d();
        else if (key == "eta3") eta3 = as_d();
        else if (key == "tau_conf") tau_conf = as_d();
        else if (key == "tau_conf_star") tau_conf_star = as_d();
        else if (key == "eq7_literal") eq7_literal = as_b();
        else if (key == "alpha") alpha = as_d();
        else if (key == "beta") beta = as_d();
        else if (key == "gamma") gamma = as_d();
        else if (key == "delta") delta = as_d();
        else if (key == "epochs") epochs = as_u();
        else if (key == "lr") lr = as_d();
        else if (key == "batch_size") batch_size = as_u();
        else if (key == "weight_decay") weight_decay = as_d();
        else if (key == "adv_ratio") adv_ratio = as_d();
        else if (key == "eps") eps = as_d();
        else if (key == "p_swap") p_swap = as_d();
        else if (key == "eq9_three_term") eq9_three_term = as_b();
        else if (key == "strict_accuracy") strict_accuracy = as_b();
        else if (key == "seed") seed = std::stoull(value);
        else throw ConfigError("unknown config key: " + key);
    }

    void validate() const {
        if (dim < 16) throw ConfigError("dim must be >= 16");
        if (adv_ratio < 0 || adv_ratio > 1) throw ConfigError("adv_ratio must be in [0,1]");
        if (batch_size == 0) throw ConfigError("batch_size must be positive");
        if (lr <= 0) throw ConfigError("lr must be positive");
        if (k == 0 || m == 0) throw ConfigError("k and m must be >= 1");
    }
};

inline GlobalConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    GlobalConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto pos = t.find('=');
        if (pos == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        try {
            cfg.set(detail::trim(t.substr(0, pos)), detail::trim(t.substr(pos + 1)));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (const char* env = std::getenv("ARSM_SEED")) cfg.seed = std::stoull(env);
    cfg.validate();
    return cfg;
}

inline void save_config(const GlobalConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    for (const auto& [k_, v] : cfg.to_map()) out << k_ << '=' << v << '\n';
}

}  // namespace arsm
