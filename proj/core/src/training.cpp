#include "nngsat/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nngsat {

namespace fs = std::filesystem;

// ----------------------------------------------------------------- SR data

static Clause random_clause(int n, std::mt19937_64& rng) {
    // Clause length 1 + Bernoulli(0.7) + Geometric(0.4), clamped to n;
    // mostly small clauses with a heavy-ish tail.
    std::bernoulli_distribution bern(0.7);
    std::geometric_distribution<int> geo(0.4);
    int k = std::min(n, 1 + (bern(rng) ? 1 : 0) + geo(rng));
    std::vector<int> vars(n);
    std::iota(vars.begin(), vars.end(), 1);
    std::shuffle(vars.begin(), vars.end(), rng);
    Clause cl;
    for (int i = 0; i < k; ++i) cl.push_back(Lit(vars[i], rng() & 1));
    return cl;
}

std::vector<SrPair> gen_sr_dataset(int n_lo, int n_hi, int count, std::uint64_t seed) {
    if (n_lo < 3 || n_hi < n_lo) throw std::invalid_argument("sr dataset: bad variable range");
    std::vector<SrPair> out;
    out.reserve(count);
    for (int s = 0; s < count; ++s) {
        // Per-sample stream so samples are independent of each other.
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + (std::uint64_t)s);
        std::uniform_int_distribution<int> nd(n_lo, n_hi);
        int n = nd(rng);
        Cnf f;
        f.num_vars = n;
        for (;;) {
            f.add_clause(random_clause(n, rng));
            if (solve(f).unsat()) break;
        }
        SrPair p;
        p.unsat_instance = f;
        p.clause_index = (int)f.clauses.size() - 1;
        std::uniform_int_distribution<int> ld(0, (int)f.clauses.back().size() - 1);
        p.lit_index = ld(rng);
        p.sat_instance = f;
        Lit& flip = p.sat_instance.clauses[p.clause_index][p.lit_index];
        flip = ~flip;
        out.push_back(std::move(p));
    }
    return out;
}

// ------------------------------------------------------------------ traces

static Circuit make_wire_host(int width) {
    Circuit c;
    c.name = "wires" + std::to_string(width);
    for (int i = 0; i < width; ++i) {
        NetId in = c.add_net("w" + std::to_string(i));
        NetId out = c.add_net("wo" + std::to_string(i));
        c.primary_inputs.push_back(in);
        c.add_gate(GateKind::Buf, {in}, out);
        c.outputs.push_back(out);
    }
    c.finalize();
    return c;
}

static int recipe_tap_need(const LockRecipe& r) {
    int need = 1;
    for (const auto& s : r.structures) {
        int w = 0;
        switch (s.kind) {
            case StructureSpec::Kind::Multiplier: w = s.n + s.m; break;
            case StructureSpec::Kind::Crossbar: w = s.n; break;
            default: w = s.n; break;
        }
        need = std::max(need, w);
    }
    return need;
}

TraceGenResult gen_attack_traces(const std::vector<LockRecipe>& recipes, int count,
                                 std::uint64_t seed, double per_sample_time_s,
                                 int max_iters_per_trace) {
    TraceGenResult res;
    if (recipes.empty() || count == 0) return res;
    for (int s = 0; s < count; ++s) {
        std::uint64_t sample_seed = seed * 0x9e3779b97f4a7c15ULL + (std::uint64_t)s;
        const LockRecipe& recipe = recipes[s % recipes.size()];
        Circuit host = make_wire_host(recipe_tap_need(recipe));
        LockedBenchmark lb = build_locked_benchmark(host, recipe, sample_seed);
        Oracle oracle(lb.circuit, lb.hidden_key);

        AttackTrace trace;
        trace.circuit_id = lb.circuit.name + "#" + std::to_string(s);
        auto observer = [&trace](int, const Cnf& f, const SolverOutcome& out) {
            if (out.status != SolveStatus::Sat && out.status != SolveStatus::Unsat) return;
            TraceIteration it;
            it.f = f;
            it.sat = out.sat();
            if (out.sat()) it.model = out.model;
            trace.iterations.push_back(std::move(it));
        };
        SolveBudget budget;
        budget.time_limit_s = per_sample_time_s;
        AttackResult ar = sat_attack_baseline(lb.circuit, oracle, budget, sample_seed, observer);
        if (!ar.success) {
            ++res.dropped;
            continue;
        }
        if (max_iters_per_trace > 1 &&
            (int)trace.iterations.size() > max_iters_per_trace) {
            std::vector<TraceIteration> kept;
            kept.reserve(max_iters_per_trace);
            std::size_t n = trace.iterations.size();
            for (int k = 0; k < max_iters_per_trace; ++k) {
                std::size_t idx = (n - 1) * (std::size_t)k / (max_iters_per_trace - 1);
                kept.push_back(std::move(trace.iterations[idx]));
            }
            trace.iterations = std::move(kept);
        }
        res.traces.push_back(std::move(trace));
    }
    return res;
}

// ---------------------------------------------------------------- training

namespace {

struct LabeledGraph {
    const Cnf* f;
    bool sat;
};

double run_epochs(MpnnModel& model, std::vector<LabeledGraph>& train, const TrainConfig& cfg,
                  std::vector<double>& epoch_loss) {
    AdamState adam;
    std::mt19937_64 rng(cfg.seed ^ 0xc0ffee);
    double last = 0.0;
    for (int e = 0; e < cfg.epochs; ++e) {
        std::shuffle(train.begin(), train.end(), rng);
        double total = 0.0;
        std::size_t batches = 0;
        for (std::size_t at = 0; at < train.size(); at += cfg.batch_size) {
            std::size_t end = std::min(train.size(), at + cfg.batch_size);
            std::vector<GraphEncoding> encs;
            std::vector<const GraphEncoding*> ptrs;
            std::vector<bool> labels;
            encs.reserve(end - at);
            for (std::size_t i = at; i < end; ++i) {
                encs.push_back(encode_graph(*train[i].f, cfg.clause_cap, cfg.seed));
                labels.push_back(train[i].sat);
            }
            for (const auto& g : encs) ptrs.push_back(&g);
            BatchGraph bg = batch_graphs(ptrs);
            LossResult lr = loss_and_grad_batch(model, bg, labels, cfg.iterations);
            adam_step(model.params(), lr.grads, adam, cfg.lr);
            total += lr.loss;
            ++batches;
        }
        last = batches ? total / (double)batches : 0.0;
        epoch_loss.push_back(last);
        if (cfg.verbose)
            std::fprintf(stderr, "epoch %d/%d loss %.4f\n", e + 1, cfg.epochs, last);
    }
    return last;
}

// Mean vote logits on a held-out set for accuracy / calibration.
std::vector<double> holdout_logits(const MpnnModel& model,
                                   const std::vector<LabeledGraph>& hold,
                                   const TrainConfig& cfg) {
    std::vector<double> logits;
    for (const auto& lg : hold) {
        GraphEncoding g = encode_graph(*lg.f, cfg.clause_cap, cfg.seed);
        VoteTrace tr = mp_forward(model, g, cfg.iterations);
        logits.push_back(tr.mean_vote.empty() ? 0.0 : tr.mean_vote.back());
    }
    return logits;
}

double nll_at_temperature(const std::vector<double>& logits, const std::vector<bool>& labels,
                          double temp) {
    double nll = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        double z = logits[i] / temp;
        double y = labels[i] ? 1.0 : 0.0;
        nll += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
    return nll / std::max<std::size_t>(1, logits.size());
}

double fit_temperature(const std::vector<double>& logits, const std::vector<bool>& labels) {
    if (logits.empty()) return 1.0;
    // Ternary search over log-temperature; the NLL is unimodal in it.
    double lo = std::log(0.05), hi = std::log(20.0);
    for (int it = 0; it < 60; ++it) {
        double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
        if (nll_at_temperature(logits, labels, std::exp(a)) <
            nll_at_temperature(logits, labels, std::exp(b)))
            hi = b;
        else
            lo = a;
    }
    return std::exp((lo + hi) / 2.0);
}

void split_holdout(std::vector<LabeledGraph>& all, double frac, std::uint64_t seed,
                   std::vector<LabeledGraph>& train, std::vector<LabeledGraph>& hold) {
    std::mt19937_64 rng(seed ^ 0x51ed);
    std::shuffle(all.begin(), all.end(), rng);
    std::size_t nh = (std::size_t)(frac * all.size());
    hold.assign(all.begin(), all.begin() + nh);
    train.assign(all.begin() + nh, all.end());
}

}  // namespace

double classification_accuracy(const MpnnModel& model, const std::vector<const Cnf*>& instances,
                               const std::vector<bool>& labels, int iterations,
                               int clause_cap) {
    if (instances.empty()) return 0.0;
    int correct = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        GraphEncoding g = encode_graph(*instances[i], clause_cap, 0);
        VoteTrace tr = mp_forward(model, g, iterations);
        if ((tr.cr > 0.5) == labels[i]) ++correct;
    }
    return (double)correct / (double)instances.size();
}

TrainMetrics train_phase1(MpnnModel& model, const std::vector<SrPair>& dataset,
                          const TrainConfig& cfg) {
    if (dataset.empty()) throw std::invalid_argument("phase 1: empty dataset");
    TrainMetrics metrics;
    if (cfg.epochs == 0) return metrics;

    std::vector<LabeledGraph> all;
    for (const auto& p : dataset) {
        all.push_back({&p.sat_instance, true});
        all.push_back({&p.unsat_instance, false});
    }
    std::vector<LabeledGraph> train, hold;
    split_holdout(all, cfg.holdout_frac, cfg.seed, train, hold);

    run_epochs(model, train, cfg, metrics.epoch_loss);

    std::vector<double> logits = holdout_logits(model, hold, cfg);
    std::vector<bool> labels;
    for (const auto& lg : hold) labels.push_back(lg.sat);
    model.temperature = fit_temperature(logits, labels);
    metrics.temperature = model.temperature;
    int correct = 0;
    for (std::size_t i = 0; i < logits.size(); ++i)
        if ((logits[i] > 0.0) == labels[i]) ++correct;
    metrics.holdout_accuracy = hold.empty() ? 0.0 : (double)correct / (double)hold.size();
    return metrics;
}

TrainMetrics train_phase2(MpnnModel& model, const std::vector<AttackTrace>& traces,
                          const TrainConfig& cfg) {
    if (traces.empty()) throw std::invalid_argument("phase 2: empty trace set");
    TrainMetrics metrics;
    if (cfg.epochs == 0) return metrics;

    std::vector<LabeledGraph> all;
    for (const auto& t : traces)
        for (const auto& it : t.iterations) all.push_back({&it.f, it.sat});
    std::vector<LabeledGraph> train, hold;
    split_holdout(all, cfg.holdout_frac, cfg.seed, train, hold);
    if (train.empty()) train = all;

    run_epochs(model, train, cfg, metrics.epoch_loss);

    std::vector<double> logits = holdout_logits(model, hold, cfg);
    int correct = 0, sat_total = 0, decoded = 0;
    for (std::size_t i = 0; i < hold.size(); ++i) {
        if ((logits[i] > 0.0) == hold[i].sat) ++correct;
        if (!hold[i].sat) continue;
        ++sat_total;
        GraphEncoding g = encode_graph(*hold[i].f, cfg.clause_cap, cfg.seed);
        VoteTrace tr = mp_forward(model, g, cfg.iterations);
        if (decode_assignment(tr, *hold[i].f)) ++decoded;
    }
    metrics.holdout_accuracy = hold.empty() ? 0.0 : (double)correct / (double)hold.size();
    metrics.decode_success = sat_total ? (double)decoded / (double)sat_total : 0.0;
    metrics.temperature = model.temperature;
    return metrics;
}

// --------------------------------------------------------------- artifacts

void save_sr_dataset(const std::vector<SrPair>& ds, const std::string& dir,
                     const std::string& config_json) {
    fs::create_directories(dir);
    nlohmann::json man;
    man["kind"] = "sr_pairs";
    man["count"] = ds.size();
    man["config"] = config_json.empty() ? nlohmann::json(nullptr)
                                        : nlohmann::json::parse(config_json);
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::string sat_name = "pair" + std::to_string(i) + "_sat.cnf";
        std::string unsat_name = "pair" + std::to_string(i) + "_unsat.cnf";
        std::ofstream(fs::path(dir) / sat_name) << write_dimacs(ds[i].sat_instance);
        std::ofstream(fs::path(dir) / unsat_name) << write_dimacs(ds[i].unsat_instance);
        pairs.push_back({{"sat", sat_name},
                         {"unsat", unsat_name},
                         {"clause_index", ds[i].clause_index},
                         {"lit_index", ds[i].lit_index}});
    }
    man["pairs"] = std::move(pairs);
    std::ofstream(fs::path(dir) / "manifest.json") << man.dump(2) << '\n';
}

static std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<SrPair> load_sr_dataset(const std::string& dir) {
    nlohmann::json man = nlohmann::json::parse(slurp(fs::path(dir) / "manifest.json"));
    if (man.value("kind", "") != "sr_pairs")
        throw std::runtime_error("dataset manifest kind mismatch in " + dir);
    std::vector<SrPair> out;
    for (const auto& jp : man.at("pairs")) {
        SrPair p;
        p.sat_instance = read_dimacs(slurp(fs::path(dir) / jp.at("sat").get<std::string>()));
        p.unsat_instance =
            read_dimacs(slurp(fs::path(dir) / jp.at("unsat").get<std::string>()));
        p.clause_index = jp.at("clause_index").get<int>();
        p.lit_index = jp.at("lit_index").get<int>();
        out.push_back(std::move(p));
    }
    return out;
}

void save_traces(const std::vector<AttackTrace>& traces, const std::string& dir,
                 const std::string& config_json) {
    fs::create_directories(dir);
    nlohmann::json man;
    man["kind"] = "attack_traces";
    man["count"] = traces.size();
    man["config"] = config_json.empty() ? nlohmann::json(nullptr)
                                        : nlohmann::json::parse(config_json);
    nlohmann::json jts = nlohmann::json::array();
    for (std::size_t t = 0; t < traces.size(); ++t) {
        nlohmann::json jt;
        jt["circuit_id"] = traces[t].circuit_id;
        nlohmann::json jits = nlohmann::json::array();
        for (std::size_t i = 0; i < traces[t].iterations.size(); ++i) {
            const auto& it = traces[t].iterations[i];
            std::string fname =
                "trace" + std::to_string(t) + "_iter" + std::to_string(i) + ".cnf";
            std::ofstream(fs::path(dir) / fname) << write_dimacs(it.f);
            nlohmann::json ji;
            ji["file"] = fname;
            ji["sat"] = it.sat;
            if (it.sat) {
                std::string bits(it.f.num_vars, '0');
                for (int v = 1; v <= it.f.num_vars; ++v)
                    if (it.model.get(v)) bits[v - 1] = '1';
                ji["model"] = bits;
            }
            jits.push_back(std::move(ji));
        }
        jt["iterations"] = std::move(jits);
        jts.push_back(std::move(jt));
    }
    man["traces"] = std::move(jts);
    std::ofstream(fs::path(dir) / "manifest.json") << man.dump(2) << '\n';
}

std::vector<AttackTrace> load_traces(const std::string& dir) {
    nlohmann::json man = nlohmann::json::parse(slurp(fs::path(dir) / "manifest.json"));
    if (man.value("kind", "") != "attack_traces")
        throw std::runtime_error("dataset manifest kind mismatch in " + dir);
    std::vector<AttackTrace> out;
    for (const auto& jt : man.at("traces")) {
        AttackTrace t;
        t.circuit_id = jt.at("circuit_id").get<std::string>();
        for (const auto& ji : jt.at("iterations")) {
            TraceIteration it;
            it.f = read_dimacs(slurp(fs::path(dir) / ji.at("file").get<std::string>()));
            it.sat = ji.at("sat").get<bool>();
            if (it.sat) {
                std::string bits = ji.at("model").get<std::string>();
                for (int v = 1; v <= it.f.num_vars && v <= (int)bits.size(); ++v)
                    it.model.set(v, bits[v - 1] == '1');
            }
            t.iterations.push_back(std::move(it));
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace nngsat
