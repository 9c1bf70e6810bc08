#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arsm/bench.hpp"
#include "arsm/config.hpp"
#include "arsm/corpus.hpp"
#include "arsm/trainer.hpp"

namespace {

using namespace arsm;

GlobalConfig make_config(const std::string& config_path, std::uint64_t* seed_override) {
    GlobalConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    cfg.validate();
    return cfg;
}

EvalContext make_context(const World& world, const GlobalConfig& cfg) {
    return EvalContext{&world.lexicons, &world.graph, &world.evidence, &world.catalog, cfg};
}

const std::vector<Sample>& pick_split(const World& w, const std::string& split) {
    if (split == "train") return w.train;
    if (split == "val") return w.val;
    if (split == "test") return w.test;
    throw std::runtime_error("unknown split: " + split);
}

nlohmann::json trace_json(const PipelineTrace& t) {
    nlohmann::json j;
    j["risk"] = {{"r_sem", t.risk.r_sem},       {"r_inj", t.risk.r_inj},
                 {"r_total", t.risk.r_total},   {"epsilon_est", t.risk.epsilon_est},
                 {"sem_flag", t.risk.sem_flag}, {"inj_flag", t.risk.inj_flag},
                 {"risk_flag", t.risk.risk_flag}};
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& se : t.bundle.selected)
        ev.push_back({{"id", se.record->id},
                      {"sim", se.sim},
                      {"authority", se.record->authority},
                      {"cons", se.cons},
                      {"score", se.score}});
    j["evidence"] = {{"selected", ev}, {"score_avg", t.bundle.score_avg}};
    j["decision_head"] = {{"probs", t.dist.probs},
                          {"refusal_prob", t.dist.refusal_prob},
                          {"raw_confidence", t.dist.raw_confidence},
                          {"predicted", t.predicted}};
    j["answer_text"] = t.answer.text;
    j["consistency"] = {{"c_paper", t.cons.c_paper},
                        {"c_edge_normalized", t.cons.c_edge_normalized},
                        {"pass", t.cons.pass}};
    nlohmann::json gd;
    gd["verdict"] = to_string(t.decision.verdict);
    if (t.decision.cls) gd["class"] = *t.decision.cls;
    gd["confidence"] = t.decision.confidence;
    gd["reasons"] = t.decision.reasons;
    j["gate"] = gd;
    return j;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << content;
}

int run(int argc, char** argv) {
    CLI::App app{"ARSM security pipeline: corpus synthesis, training, attacks, evaluation"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_path, ckpt_path, split = "test", query;
    std::uint64_t seed = 42;
    bool seed_set = false;
    std::size_t n_total = 1000, rounds = 5;
    app.add_option("--config", config_path, "flat key=value config file")->capture_default_str();

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "global seed")->each([&](const std::string&) {
            seed_set = true;
        });
    };

    // synth
    auto* synth = app.add_subcommand("synth", "generate the synthetic benchmark corpus");
    synth->add_option("--n", n_total, "total sample count");
    add_seed(synth);
    synth->add_option("--out", out_path, "output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "closed-loop training");
    train->add_option("--data", data_dir, "corpus directory")->required();
    train->add_option("--rounds", rounds, "closed-loop rounds");
    add_seed(train);
    train->add_option("--out", out_path, "output directory")->required();

    // attack
    std::string attack_kind = "all";
    auto* attack = app.add_subcommand("attack", "apply text attacks to a dataset split");
    attack->add_option("--data", data_dir)->required();
    attack->add_option("--split", split);
    attack->add_option("--kind", attack_kind, "all|semantic|injection|confusion|splice");
    add_seed(attack);
    attack->add_option("--out", out_path, "output jsonl")->required();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "run the gated pipeline and compute metrics");
    eval->add_option("--ckpt", ckpt_path)->required();
    eval->add_option("--data", data_dir)->required();
    eval->add_option("--split", split);
    eval->add_option("--out", out_path, "report json (metrics only; timing in <out>.timing)");

    // ablate
    auto* abl = app.add_subcommand("ablate", "evaluate with each stage disabled");
    abl->add_option("--ckpt", ckpt_path)->required();
    abl->add_option("--data", data_dir)->required();
    abl->add_option("--split", split);
    abl->add_option("--out", out_path, "comparison json");

    // sweep
    std::string axis;
    std::vector<double> values;
    auto* sweep = app.add_subcommand("sweep", "parameter sensitivity sweep");
    sweep->add_option("--axis", axis, "tau_risk|m|adv_ratio")->required();
    sweep->add_option("--values", values, "grid values")->required();
    sweep->add_option("--data", data_dir)->required();
    add_seed(sweep);
    sweep->add_option("--out", out_path, "tsv rows");

    // gate
    auto* gatecmd = app.add_subcommand("gate", "gate a single query with a full stage trace");
    gatecmd->add_option("query", query, "query text")->required();
    gatecmd->add_option("--data", data_dir)->required();
    gatecmd->add_option("--ckpt", ckpt_path)->required();

    // evidence
    auto* evidence_cmd = app.add_subcommand("evidence", "evidence store operations");
    std::string ev_path;
    auto* ev_ingest = evidence_cmd->add_subcommand("ingest", "validate and load an evidence file");
    ev_ingest->add_option("path", ev_path)->required();
    std::size_t qk = 10, qm = 5;
    auto* ev_query = evidence_cmd->add_subcommand("query", "retrieve and rank evidence");
    ev_query->add_option("text", query)->required();
    ev_query->add_option("--data", data_dir)->required();
    ev_query->add_option("-k", qk);
    ev_query->add_option("-m", qm);

    // graph
    auto* graph_cmd = app.add_subcommand("graph", "knowledge graph operations");
    auto* graph_check = graph_cmd->add_subcommand("check", "consistency-check an output text");
    graph_check->add_option("text", query)->required();
    graph_check->add_option("--data", data_dir)->required();

    // model
    auto* model_cmd = app.add_subcommand("model", "checkpoint operations");
    auto* model_inspect = model_cmd->add_subcommand("inspect", "print checkpoint summary");
    model_inspect->add_option("path", ckpt_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    GlobalConfig cfg = make_config(config_path, seed_set ? &seed : nullptr);

    if (*synth) {
        SynthConfig sc;
        sc.n_total = n_total;
        sc.dim = cfg.dim;
        sc.seed = cfg.seed;
        World w = synth_corpus(sc);
        save_world(w, out_path, cfg.hash());
        std::cout << "corpus written to " << out_path << ": " << w.train.size() << " train, "
                  << w.val.size() << " val, " << w.test.size() << " test\n";
        return 0;
    }

    if (*train) {
        World w = load_world(data_dir);
        cfg.dim = w.cfg.dim;
        ClosedLoopResult res =
            closed_loop(w.train, w.val, cfg, rounds, w.lexicons, w.graph, w.catalog, w.evidence);
        std::filesystem::create_directories(out_path);
        save_checkpoint(res.best_theta, out_path + "/best.ckpt.json", cfg.hash(), cfg.seed);
        save_config(res.best_cfg, out_path + "/best.config");
        nlohmann::json hist = nlohmann::json::array();
        for (const auto& r : res.history)
            hist.push_back({{"round", r.round},
                            {"reward_after_train", r.reward_after_train},
                            {"accepted_model", r.accepted_model},
                            {"proposed_threshold", r.proposed_threshold},
                            {"proposed_value", r.proposed_value},
                            {"reward_with_proposal", r.reward_with_proposal},
                            {"accepted_proposal", r.accepted_proposal},
                            {"best_reward", r.best_reward}});
        write_file(out_path + "/history.json",
                   nlohmann::json{{"config_hash", cfg.hash()}, {"rounds", hist}}.dump(2) + "\n");
        std::cout << "best reward " << res.history.back().best_reward << ", checkpoint in "
                  << out_path << "\n";
        return 0;
    }

    if (*attack) {
        World w = load_world(data_dir);
        const auto& samples = pick_split(w, split);
        std::vector<Sample> attacked;
        for (const auto& s : samples) {
            Rng rng(Rng::mix(cfg.seed, fnv1a64(s.id)));
            Sample a = s;
            auto apply = [&](AttackKind k) {
                a.kind = k;
                switch (k) {
                    case AttackKind::SemanticPerturbation:
                        a.text = perturb_semantic(s.text, w.lexicons, rng, cfg.p_swap);
                        break;
                    case AttackKind::PromptInjection:
                        a.text = inject_prompt(s.text, w.lexicons, rng);
                        a.should_refuse = true;
                        break;
                    case AttackKind::DrugNameConfusion:
                        a.text = confuse_drug(s.text, w.lexicons, rng);
                        break;
                    case AttackKind::FalseEvidenceSplice:
                        a.text = splice_false_evidence(s.text, w.graph, w.lexicons, rng).text;
                        a.should_refuse = true;
                        break;
                    default:
                        break;
                }
            };
            if (attack_kind == "semantic") apply(AttackKind::SemanticPerturbation);
            else if (attack_kind == "injection") apply(AttackKind::PromptInjection);
            else if (attack_kind == "confusion") apply(AttackKind::DrugNameConfusion);
            else if (attack_kind == "splice") apply(AttackKind::FalseEvidenceSplice);
            else {
                static const AttackKind cycle[4] = {
                    AttackKind::SemanticPerturbation, AttackKind::PromptInjection,
                    AttackKind::DrugNameConfusion, AttackKind::FalseEvidenceSplice};
                apply(cycle[fnv1a64(s.id) % 4]);
            }
            attacked.push_back(std::move(a));
        }
        save_samples(attacked, out_path);
        std::cout << attacked.size() << " attacked samples written to " << out_path << "\n";
        return 0;
    }

    if (*eval) {
        World w = load_world(data_dir);
        cfg.dim = w.cfg.dim;
        ModelParams theta = load_checkpoint(ckpt_path);
        BenchReport r = evaluate(theta, pick_split(w, split), make_context(w, cfg));
        nlohmann::json j = r.to_json(false);
        j["config_hash"] = cfg.hash();
        if (!out_path.empty()) {
            write_file(out_path, j.dump(2) + "\n");
            write_file(out_path + ".timing",
                       "latency_ms_mean=" + std::to_string(r.latency_ms_mean) + "\n");
        }
        std::cout << j.dump(2) << "\nlatency_ms_mean=" << r.latency_ms_mean << "\n";
        return 0;
    }

    if (*abl) {
        World w = load_world(data_dir);
        cfg.dim = w.cfg.dim;
        ModelParams theta = load_checkpoint(ckpt_path);
        auto rows = ablate(theta, pick_split(w, split), make_context(w, cfg));
        nlohmann::json j = nlohmann::json::array();
        const BenchReport& full = rows.front().report;
        for (const auto& row : rows) {
            nlohmann::json e = row.report.to_json(false);
            e["name"] = row.name;
            e["delta_accuracy"] = row.report.accuracy - full.accuracy;
            e["delta_asr"] = row.report.attack_success_rate - full.attack_success_rate;
            j.push_back(e);
        }
        nlohmann::json outj = {{"config_hash", cfg.hash()}, {"rows", j}};
        if (!out_path.empty()) write_file(out_path, outj.dump(2) + "\n");
        std::cout << "name\taccuracy\tasr\td_accuracy\td_asr\n";
        for (const auto& row : rows)
            std::cout << row.name << '\t' << row.report.accuracy << '\t'
                      << row.report.attack_success_rate << '\t'
                      << row.report.accuracy - full.accuracy << '\t'
                      << row.report.attack_success_rate - full.attack_success_rate << '\n';
        return 0;
    }

    if (*sweep) {
        World w = load_world(data_dir);
        cfg.dim = w.cfg.dim;
        std::ostringstream rows;
        rows << "value\taccuracy\tattack_success_rate\n";
        for (double v : values) {
            GlobalConfig c = cfg;
            if (axis == "tau_risk") c.tau_risk = v;
            else if (axis == "m") c.m = static_cast<std::size_t>(v);
            else if (axis == "adv_ratio") c.adv_ratio = v;
            else throw std::runtime_error("unknown sweep axis: " + axis);
            ModelParams theta = ModelParams::random(w.catalog.size(), c.dim,
                                                    Rng::mix(c.seed, 0x1417));
            theta = train_epochs(w.train, c, theta, w.lexicons, w.graph, w.catalog);
            BenchReport r = evaluate(theta, w.test, make_context(w, c));
            rows << v << '\t' << r.accuracy << '\t' << r.attack_success_rate << '\n';
            std::cout << axis << "=" << v << " accuracy=" << r.accuracy
                      << " asr=" << r.attack_success_rate << "\n";
        }
        if (!out_path.empty()) write_file(out_path, rows.str());
        return 0;
    }

    if (*gatecmd) {
        World w = load_world(data_dir);
        cfg.dim = w.cfg.dim;
        ModelParams theta = load_checkpoint(ckpt_path);
        PipelineTrace t = run_pipeline(theta, query, make_context(w, cfg));
        std::cout << trace_json(t).dump(2) << "\n";
        return 0;
    }

    if (*ev_ingest) {
        EvidenceStore store = ingest(ev_path, cfg.dim);
        std::cout << "ingested " << store.size() << " records from " << ev_path << "\n";
        return 0;
    }

    if (*ev_query) {
        World w = load_world(data_dir);
        cfg.dim = w.cfg.dim;
        FeatureVector x = embed(query, cfg.dim);
        TokenList toks = tokenize(query);
        auto topk = retrieve_topk(w.evidence, x, toks, qk, cfg.lambda);
        EvidenceBundle b =
            credibility_rank(topk, x, toks, cfg.mu1, cfg.mu2, cfg.mu3, qm, cfg.lambda);
        for (const auto& se : b.selected)
            std::cout << se.record->id << "\tscore=" << se.score << "\tsim=" << se.sim
                      << "\tauth=" << se.record->authority << "\tcons=" << se.cons << "\t"
                      << se.record->text << "\n";
        std::cout << "score_avg=" << b.score_avg << "\n";
        return 0;
    }

    if (*graph_check) {
        World w = load_world(data_dir);
        OutputEntities out = extract_entities(query, w.lexicons);
        ConsistencyResult r =
            consistency_score(out, w.graph, cfg.tau_cons, cfg.consistency_gate_paper);
        nlohmann::json j = {{"entities", std::vector<std::string>(out.entity_ids.begin(),
                                                                  out.entity_ids.end())},
                            {"c_paper", r.c_paper},
                            {"c_edge_normalized", r.c_edge_normalized},
                            {"pass", r.pass}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (*model_inspect) {
        ModelParams p = load_checkpoint(ckpt_path);
        double wnorm = 0;
        for (double v : p.W) wnorm += v * v;
        std::cout << "version=" << p.version << " classes=" << p.n_classes << " dim=" << p.dim
                  << " |W|_2=" << std::sqrt(wnorm) << " b_ref=" << p.b_ref << "\n";
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
