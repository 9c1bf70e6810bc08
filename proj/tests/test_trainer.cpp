#include <catch2/catch_amalgamated.hpp>

#include "arsm/corpus.hpp"
#include "arsm/trainer.hpp"
#include "test_util.hpp"

using namespace arsm;
using Catch::Approx;

namespace {

struct Toy {
    std::vector<Sample> data;
    Lexicons lex;
    KnowledgeGraph graph;
    ClassCatalog catalog;
};

// Two linearly separable classes over disjoint vocabularies; the catalog's
// answers are always graph-consistent so the consistency target is vacuous.
Toy toy_world() {
    Toy t;
    t.graph.add_entity("aldol");
    t.graph.add_entity("bexol");
    t.graph.add_entity("aditis");
    t.graph.add_entity("beditis");
    t.graph.add_edge("aldol", "aditis", "treats");
    t.graph.add_edge("bexol", "beditis", "treats");
    t.catalog = ClassCatalog({{"aditis", "aldol"}, {"beditis", "bexol"}});
    t.lex.entity_vocab = {{"aldol", "aldol"}, {"bexol", "bexol"},
                          {"aditis", "aditis"}, {"beditis", "beditis"}};

    const char* a_words[] = {"rash", "cough", "chill", "sweat"};
    const char* b_words[] = {"cramp", "nausea", "dizzy", "tremor"};
    for (std::size_t i = 0; i < 16; ++i) {
        Sample s;
        s.id = "t" + std::to_string(i);
        s.y_true = i % 2;
        const char** w = s.y_true == 0 ? a_words : b_words;
        s.text = std::string(w[i % 4]) + " " + w[(i + 1) % 4] + " " + w[(i + 2) % 4];
        t.data.push_back(s);
    }
    return t;
}

GlobalConfig toy_config() {
    GlobalConfig cfg;
    cfg.dim = 32;
    cfg.epochs = 40;
    cfg.lr = 0.5;
    cfg.batch_size = 4;
    cfg.weight_decay = 0.0;
    cfg.adv_ratio = 0.0;
    cfg.seed = 42;
    return cfg;
}

double toy_accuracy(const Toy& t, const ModelParams& theta, std::size_t dim) {
    std::size_t hit = 0;
    for (const auto& s : t.data)
        if (forward(embed(s.text, dim), theta).argmax() == s.y_true) ++hit;
    return static_cast<double>(hit) / t.data.size();
}

}  // namespace

TEST_CASE("lr_schedule cosine endpoints and midpoint") {
    CHECK(lr_schedule(0.001, 0, 100) == Approx(0.001));
    CHECK(lr_schedule(0.001, 100, 100) == Approx(0.0).margin(1e-18));
    CHECK(lr_schedule(0.001, 50, 100) == Approx(0.0005));
    CHECK(lr_schedule(0.001, 25, 100) > lr_schedule(0.001, 75, 100));
    CHECK(lr_schedule(0.001, 7, 0) == Approx(0.001));  // degenerate horizon
}

TEST_CASE("train_epochs with zero epochs returns the input parameters") {
    Toy t = toy_world();
    GlobalConfig cfg = toy_config();
    cfg.epochs = 0;
    ModelParams theta = ModelParams::random(2, cfg.dim, 5, 0.3);
    ModelParams out = train_epochs(t.data, cfg, theta, t.lex, t.graph, t.catalog);
    CHECK(out.W == theta.W);
    CHECK(out.b == theta.b);

    CHECK_THROWS_AS(train_epochs({}, cfg, theta, t.lex, t.graph, t.catalog),
                    std::invalid_argument);
}

TEST_CASE("training fits the separable toy problem") {
    Toy t = toy_world();
    GlobalConfig cfg = toy_config();
    ModelParams theta = ModelParams::random(2, cfg.dim, 7, 0.1);
    double before = toy_accuracy(t, theta, cfg.dim);
    std::vector<EpochLog> log;
    theta = train_epochs(t.data, cfg, theta, t.lex, t.graph, t.catalog, &log);
    CHECK(toy_accuracy(t, theta, cfg.dim) == 1.0);
    REQUIRE(log.size() == cfg.epochs);
    CHECK(log.back().mean_loss.l_total < log.front().mean_loss.l_total);
    (void)before;
}

TEST_CASE("training is bitwise deterministic for a fixed seed") {
    Toy t = toy_world();
    GlobalConfig cfg = toy_config();
    cfg.epochs = 5;
    cfg.adv_ratio = 0.5;  // exercise the adversarial pool path too
    ModelParams init = ModelParams::random(2, cfg.dim, 7, 0.1);
    ModelParams a = train_epochs(t.data, cfg, init, t.lex, t.graph, t.catalog);
    ModelParams b = train_epochs(t.data, cfg, init, t.lex, t.graph, t.catalog);
    CHECK(a.W == b.W);
    CHECK(a.b == b.b);
    CHECK(a.w_ref == b.w_ref);
    CHECK(a.b_ref == b.b_ref);

    GlobalConfig other = cfg;
    other.seed = 43;
    ModelParams c = train_epochs(t.data, other, init, t.lex, t.graph, t.catalog);
    CHECK(a.W != c.W);
}

TEST_CASE("with only the accuracy term the loop is plain softmax SGD") {
    Toy t = toy_world();
    GlobalConfig cfg = toy_config();
    cfg.epochs = 8;
    cfg.alpha = 1.0;
    cfg.beta = cfg.gamma = cfg.delta = 0.0;
    ModelParams init = ModelParams::random(2, cfg.dim, 11, 0.2);
    ModelParams got = train_epochs(t.data, cfg, init, t.lex, t.graph, t.catalog);

    // independent reimplementation: cosine-annealed mini-batch softmax SGD
    // with the same shuffle stream
    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> ys;
    for (const auto& s : t.data) {
        xs.push_back(embed(s.text, cfg.dim).values);
        ys.push_back(s.y_true);
    }
    std::vector<double> W = init.W, b = init.b;
    const std::size_t C = 2, D = cfg.dim;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<std::size_t> order(xs.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng sh(Rng::mix(cfg.seed, 0x50FF + epoch));
        shuffle(order, sh);
        double lr = cfg.lr * (1.0 + std::cos(std::numbers::pi * double(epoch) / cfg.epochs)) / 2.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t stop = std::min(start + cfg.batch_size, order.size());
            std::vector<double> gW(C * D, 0.0), gb(C, 0.0);
            for (std::size_t bi = start; bi < stop; ++bi) {
                const auto& x = xs[order[bi]];
                std::vector<double> z(C, 0.0);
                for (std::size_t c = 0; c < C; ++c) {
                    for (std::size_t j = 0; j < D; ++j) z[c] += W[c * D + j] * x[j];
                    z[c] += b[c];
                }
                double mx = std::max(z[0], z[1]);
                double e0 = std::exp(z[0] - mx), e1 = std::exp(z[1] - mx);
                std::vector<double> p = {e0 / (e0 + e1), e1 / (e0 + e1)};
                for (std::size_t c = 0; c < C; ++c) {
                    double dz = p[c] - (c == ys[order[bi]] ? 1.0 : 0.0);
                    gb[c] += dz;
                    for (std::size_t j = 0; j < D; ++j) gW[c * D + j] += dz * x[j];
                }
            }
            double inv = 1.0 / double(stop - start);
            for (std::size_t i = 0; i < W.size(); ++i) W[i] -= lr * gW[i] * inv;
            for (std::size_t c = 0; c < C; ++c) b[c] -= lr * gb[c] * inv;
        }
    }
    for (std::size_t i = 0; i < W.size(); ++i)
        CHECK(got.W[i] == Approx(W[i]).margin(1e-9));
    for (std::size_t c = 0; c < C; ++c) CHECK(got.b[c] == Approx(b[c]).margin(1e-9));
    // untouched heads stay at their initial values (no sec term, no decay)
    CHECK(got.w_ref == init.w_ref);
}

TEST_CASE("reward arithmetic") {
    LossWeights w;  // 0.3 / 0.3 / 0.2 / 0.2
    RewardReport r = reward(0.9, 0.1, 0.8, 0.7, w);
    CHECK(r.reward == Approx(0.3 * 0.9 + 0.3 * 0.9 + 0.2 * 0.8 + 0.2 * 0.7));
    RewardReport r3 = reward(0.9, 0.1, 0.8, 0.7, w, true);
    CHECK(r3.reward == Approx(0.3 * 0.9 + 0.3 * 0.9 + 0.2 * 0.8));
    CHECK(reward(1.0, 0.0, 1.0, 1.0, w).reward == Approx(1.0));
    CHECK(reward(0.0, 1.0, 0.0, 0.0, w).reward == Approx(0.0));
}

TEST_CASE("closed_loop keeps the best reward monotone and is deterministic") {
    SynthConfig sc;
    sc.n_total = 60;
    sc.dim = 64;
    sc.seed = 42;
    World w = synth_corpus(sc);
    GlobalConfig cfg;
    cfg.dim = 64;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    cfg.lr = 0.2;
    cfg.seed = 42;

    ClosedLoopResult a =
        closed_loop(w.train, w.val, cfg, 4, w.lexicons, w.graph, w.catalog, w.evidence);
    REQUIRE(a.history.size() == 4);
    double prev = -1.0;
    for (const auto& rec : a.history) {
        CHECK(rec.best_reward >= prev);
        CHECK(rec.best_reward >= rec.reward_after_train - 1e-12);
        prev = rec.best_reward;
    }

    ClosedLoopResult b =
        closed_loop(w.train, w.val, cfg, 4, w.lexicons, w.graph, w.catalog, w.evidence);
    CHECK(a.best_theta.W == b.best_theta.W);
    CHECK(a.best_cfg.tau_sem == b.best_cfg.tau_sem);
    CHECK(a.best_cfg.tau_inj == b.best_cfg.tau_inj);
    CHECK(a.best_cfg.tau_conf == b.best_cfg.tau_conf);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a.history[i].reward_after_train == b.history[i].reward_after_train);
        CHECK(a.history[i].accepted_proposal == b.history[i].accepted_proposal);
    }
}
