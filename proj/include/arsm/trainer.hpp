#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "arsm/adversarial.hpp"
#include "arsm/bench.hpp"
#include "arsm/config.hpp"
#include "arsm/decision.hpp"
#include "arsm/sample.hpp"

namespace arsm {

// Cosine annealing: cfg.lr at t=0, 0 at t=T.
inline double lr_schedule(double lr0, std::size_t t, std::size_t total) {
    if (total == 0) return lr0;
    return lr0 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(t) /
                                 static_cast<double>(total))) /
           2.0;
}

struct EpochLog {
    std::size_t epoch = 0;
    double lr = 0.0;
    LossBreakdown mean_loss;
};

// Mini-batch gradient descent on the joint objective. The adversarial pool is
// regenerated from the current parameters every epoch. Fully deterministic for
// a fixed seed: fixed batch order per shuffle, fixed reduction order.
inline ModelParams train_epochs(const std::vector<Sample>& data, const GlobalConfig& cfg,
                                ModelParams theta, const Lexicons& lex, const KnowledgeGraph& graph,
                                const ClassCatalog& catalog,
                                std::vector<EpochLog>* log = nullptr) {
    if (data.empty()) throw std::invalid_argument("train_epochs: empty dataset");
    LossWeights w = cfg.loss_weights();

    // consistency profiles depend only on the query text
    std::unordered_map<std::string, std::vector<double>> profile_cache;
    auto consistency_of = [&](const Sample& s) -> std::vector<double> {
        auto it = profile_cache.find(s.id);
        if (it != profile_cache.end()) return it->second;
        auto prof = catalog.consistency_profile(extract_entity_ids(s.text, lex), graph);
        profile_cache.emplace(s.id, prof);
        return prof;
    };

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        PoolConfig pc{cfg.adv_ratio, cfg.eps, cfg.p_swap, Rng::mix(cfg.seed, 0xE60 + epoch)};
        std::vector<TrainExample> pool =
            build_pool(data, theta, pc, lex, graph, cfg.dim, consistency_of);

        std::vector<std::size_t> order(pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng shuffle_rng(Rng::mix(cfg.seed, 0x50FF + epoch));
        shuffle(order, shuffle_rng);

        double lr = lr_schedule(cfg.lr, epoch, cfg.epochs);
        LossBreakdown epoch_loss;
        std::size_t seen = 0;

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t stop = std::min(start + cfg.batch_size, order.size());
            std::size_t bs = stop - start;
            Gradients acc;
            acc.dW.assign(theta.W.size(), 0.0);
            acc.db.assign(theta.b.size(), 0.0);
            acc.dw_ref.assign(theta.w_ref.size(), 0.0);
            for (std::size_t bi = start; bi < stop; ++bi) {
                const TrainExample& ex = pool[order[bi]];
                Gradients g = gradients(ex.x_clean, ex.x_input, ex.y, ex.should_refuse,
                                        ex.class_consistency, theta, w);
                for (std::size_t i = 0; i < acc.dW.size(); ++i) acc.dW[i] += g.dW[i];
                for (std::size_t i = 0; i < acc.db.size(); ++i) acc.db[i] += g.db[i];
                for (std::size_t i = 0; i < acc.dw_ref.size(); ++i) acc.dw_ref[i] += g.dw_ref[i];
                acc.db_ref += g.db_ref;

                if (log) {
                    DecisionDistribution p = forward(ex.x_clean, theta);
                    DecisionDistribution q = forward(ex.x_input, theta);
                    LossBreakdown lb = total_loss(
                        loss_acc(q, ex.y), loss_rob(p, q),
                        loss_sec(q.refusal_prob, ex.should_refuse),
                        loss_cons(q, ex.class_consistency), w);
                    epoch_loss.l_acc += lb.l_acc;
                    epoch_loss.l_rob += lb.l_rob;
                    epoch_loss.l_sec += lb.l_sec;
                    epoch_loss.l_cons += lb.l_cons;
                    epoch_loss.l_total += lb.l_total;
                    if (!std::isfinite(lb.l_total))
                        throw std::runtime_error("train_epochs: non-finite loss at epoch " +
                                                 std::to_string(epoch));
                    ++seen;
                }
            }
            double inv = 1.0 / static_cast<double>(bs);
            for (std::size_t i = 0; i < theta.W.size(); ++i)
                theta.W[i] -= lr * (acc.dW[i] * inv + cfg.weight_decay * theta.W[i]);
            for (std::size_t i = 0; i < theta.b.size(); ++i) theta.b[i] -= lr * acc.db[i] * inv;
            for (std::size_t i = 0; i < theta.w_ref.size(); ++i)
                theta.w_ref[i] -= lr * (acc.dw_ref[i] * inv + cfg.weight_decay * theta.w_ref[i]);
            theta.b_ref -= lr * acc.db_ref * inv;
        }

        if (log) {
            double inv = seen ? 1.0 / static_cast<double>(seen) : 0.0;
            epoch_loss.l_acc *= inv;
            epoch_loss.l_rob *= inv;
            epoch_loss.l_sec *= inv;
            epoch_loss.l_cons *= inv;
            epoch_loss.l_total *= inv;
            log->push_back({epoch, lr, epoch_loss});
        }
    }
    return theta;
}

struct RewardReport {
    double acc = 0.0;
    double attack = 0.0;
    double sec = 0.0;
    double cons = 0.0;
    double reward = 0.0;
};

// Scalar reward for the closed loop; weights mirror the objective weights.
// The four-term form adds the consistency term; three-term mode drops it.
inline RewardReport reward(double acc, double attack, double sec, double cons,
                           const LossWeights& w, bool three_term = false) {
    RewardReport r{acc, attack, sec, cons, 0.0};
    r.reward = w.alpha * acc + w.beta * (1.0 - attack) + w.gamma * sec;
    if (!three_term) r.reward += w.delta * cons;
    return r;
}

inline RewardReport reward_of_report(const BenchReport& b, const LossWeights& w,
                                     bool three_term = false) {
    return reward(b.accuracy, b.attack_success_rate, b.sec_rate, b.consistency_mean, w, three_term);
}

struct RoundRecord {
    std::size_t round = 0;
    double reward_after_train = 0.0;
    bool accepted_model = false;
    std::string proposed_threshold;
    double proposed_value = 0.0;
    double reward_with_proposal = 0.0;
    bool accepted_proposal = false;
    double best_reward = 0.0;
};

struct ClosedLoopResult {
    ModelParams best_theta;
    GlobalConfig best_cfg;  // thresholds possibly moved by the hill-climb
    std::vector<RoundRecord> history;
};

// Outer loop: retrain, evaluate on validation, greedily keep the best-reward
// checkpoint, and hill-climb one gate threshold per round (tau_sem, tau_inj,
// tau_conf round-robin, +/-0.05, clamped to [0,1]).
inline ClosedLoopResult closed_loop(const std::vector<Sample>& train_data,
                                    const std::vector<Sample>& val_data, const GlobalConfig& cfg0,
                                    std::size_t rounds, const Lexicons& lex,
                                    const KnowledgeGraph& graph, const ClassCatalog& catalog,
                                    const EvidenceStore& evidence) {
    ClosedLoopResult res;
    GlobalConfig cfg = cfg0;
    ModelParams theta = ModelParams::random(catalog.size(), cfg.dim, Rng::mix(cfg.seed, 0x1417));
    double best_reward = -1.0;
    res.best_theta = theta;
    res.best_cfg = cfg;
    Rng prop_rng(Rng::mix(cfg.seed, 0xC11B));

    auto val_reward = [&](const ModelParams& th, const GlobalConfig& c) {
        EvalContext ctx{&lex, &graph, &evidence, &catalog, c};
        return reward_of_report(evaluate(th, val_data, ctx), c.loss_weights(), c.eq9_three_term);
    };

    for (std::size_t round = 0; round < rounds; ++round) {
        RoundRecord rec;
        rec.round = round;
        GlobalConfig round_cfg = cfg;
        round_cfg.seed = Rng::mix(cfg.seed, 0xB0D + round);
        theta = train_epochs(train_data, round_cfg, theta, lex, graph, catalog);

        RewardReport rr = val_reward(theta, cfg);
        rec.reward_after_train = rr.reward;
        if (rr.reward > best_reward) {
            best_reward = rr.reward;
            res.best_theta = theta;
            res.best_cfg = cfg;
            rec.accepted_model = true;
        }

        // one coordinate per round, seeded direction
        static const char* names[3] = {"tau_sem", "tau_inj", "tau_conf"};
        std::size_t coord = round % 3;
        double delta = prop_rng.chance(0.5) ? 0.05 : -0.05;
        GlobalConfig proposal = cfg;
        double* field = coord == 0   ? &proposal.tau_sem
                        : coord == 1 ? &proposal.tau_inj
                                     : &proposal.tau_conf;
        *field = std::clamp(*field + delta, 0.0, 1.0);
        rec.proposed_threshold = names[coord];
        rec.proposed_value = *field;

        RewardReport pr = val_reward(res.best_theta, proposal);
        rec.reward_with_proposal = pr.reward;
        if (pr.reward > best_reward) {
            best_reward = pr.reward;
            cfg = proposal;
            res.best_cfg = proposal;
            rec.accepted_proposal = true;
        }
        rec.best_reward = best_reward;
        res.history.push_back(rec);
    }
    return res;
}

}  // namespace arsm
