#include "nngsat/attack.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <json.hpp>
#include <random>
#include <sstream>
#include <thread>

namespace nngsat {

using Clock = std::chrono::steady_clock;

static double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ------------------------------------------------------------------ oracle

Oracle::Oracle(Circuit locked, BitAssignment hidden_key)
    : locked_(std::move(locked)), key_(std::move(hidden_key)) {
    for (NetId k : locked_.key_inputs)
        if (!key_.contains(k)) throw NetlistError("oracle: hidden key misses a key input");
}

Oracle Oracle::from_key_file(Circuit locked, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw NetlistError("oracle: cannot open key file: " + path);
    BitAssignment key;
    std::string name;
    int bit;
    while (is >> name >> bit) {
        NetId n = locked.net_by_name(name);
        if (n < 0) throw NetlistError("oracle: key file names unknown net: " + name);
        key.set(n, bit != 0);
    }
    return Oracle(std::move(locked), std::move(key));
}

BitAssignment Oracle::query(const BitAssignment& pi) const {
    ++queries_;
    return simulate(locked_, pi, key_);
}

bool Oracle::sat_equivalent(const BitAssignment& key) const {
    Miter m = build_miter(locked_);
    std::vector<Lit> units;
    for (NetId k : locked_.key_inputs) {
        units.push_back(Lit(m.vm.var_of(k, CopyTag::Copy1), !key.get(k)));
        units.push_back(Lit(m.vm.var_of(k, CopyTag::Copy2), !key_.get(k)));
    }
    Cnf f = m.cnf;
    for (const Lit& l : units) f.add_clause({l});
    return solve(f).unsat();
}

void write_key_file(const Circuit& c, const BitAssignment& key, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw NetlistError("cannot open key file for write: " + path);
    for (NetId k : c.key_inputs) os << c.net_name(k) << ' ' << (key.get(k) ? 1 : 0) << '\n';
}

// ----------------------------------------------------------------- helpers

std::string to_string(PredictionLabel l) {
    switch (l) {
        case PredictionLabel::Guiding: return "Guiding";
        case PredictionLabel::Misguiding: return "Misguiding";
        default: return "Skipped";
    }
}

PredictionLabel classify_prediction(const SolverOutcome& out, bool won) {
    if (won && out.sat()) return PredictionLabel::Guiding;
    if (out.unsat()) return PredictionLabel::Misguiding;
    return PredictionLabel::Skipped;
}

std::vector<Lit> extract_guidance(const VoteTrace& trace, double bit_threshold) {
    std::vector<Lit> out;
    if (trace.cr < 0.5 || trace.votes.empty()) return out;
    const auto& last = trace.votes.back();
    for (int v = 0; v < trace.n_v; ++v)
        if (trace.cr_bit[v] > bit_threshold)
            out.push_back(Lit(v + 1, last[v] < last[trace.n_v + v]));
    return out;
}

static BitAssignment read_nets(const VarMap& vm, const BitAssignment& model,
                               const std::vector<NetId>& nets, CopyTag tag) {
    BitAssignment out;
    for (NetId n : nets) out.set(n, model.get(vm.var_of(n, tag)));
    return out;
}

static BitAssignment extract_key(const Miter& m, const Cnf& grown, const Circuit& locked,
                                 std::uint64_t seed) {
    Cnf f = miter_without_difference(m, grown);
    SolverOutcome out = solve(f, {}, SolveBudget::unlimited(), seed);
    if (!out.sat())
        throw CnfError("key extraction: accumulated constraints are unsatisfiable");
    return read_nets(m.vm, out.model, locked.key_inputs, CopyTag::Copy1);
}

static void block_dip(AttackState& st, const Circuit& locked, const Oracle& oracle,
                      const BitAssignment& model) {
    BitAssignment dip = read_nets(st.miter.vm, model, locked.primary_inputs, CopyTag::Shared);
    BitAssignment y = oracle.query(dip);
    st.f = add_dip_block(st.f, st.miter, locked, dip, y);
    st.dip_history.emplace_back(dip, y);
    ++st.iteration;
}

static AttackReport finalize_report(AttackReport rep, SolveStatus status, int iterations,
                                    double wall, const Oracle& oracle) {
    rep.status = status;
    rep.iterations = iterations;
    rep.wall_time_s = wall;
    rep.oracle_queries = oracle.query_count();
    for (const auto& it : rep.iters)
        for (const auto& sp : it.spawns) {
            if (sp.label == PredictionLabel::Guiding) ++rep.guiding;
            else if (sp.label == PredictionLabel::Misguiding) ++rep.misguiding;
            else ++rep.skipped;
        }
    return rep;
}

// ---------------------------------------------------------------- baseline

AttackResult sat_attack_baseline(const Circuit& locked, const Oracle& oracle,
                                 const SolveBudget& per_iter_budget, std::uint64_t seed,
                                 const IterationObserver& observer) {
    auto t0 = Clock::now();
    AttackState st;
    st.miter = build_miter(locked);
    st.f = st.miter.cnf;
    AttackResult res;

    for (;;) {
        auto it0 = Clock::now();
        SolverOutcome out = solve(st.f, {}, per_iter_budget, seed + st.iteration);
        if (observer) observer(st.iteration, st.f, out);

        IterationRecord rec;
        rec.iteration = st.iteration;
        rec.time_s = seconds_since(it0);
        rec.stats = out.stats;
        if (out.sat()) rec.winner = "baseline";
        res.report.iters.push_back(rec);

        if (out.sat()) {
            block_dip(st, locked, oracle, out.model);
        } else if (out.unsat()) {
            res.key = extract_key(st.miter, st.f, locked, seed);
            res.success = true;
            res.report = finalize_report(std::move(res.report), SolveStatus::Unsat,
                                         st.iteration, seconds_since(t0), oracle);
            return res;
        } else {
            res.report = finalize_report(std::move(res.report), out.status, st.iteration,
                                         seconds_since(t0), oracle);
            return res;
        }
    }
}

// -------------------------------------------------------------------- race

namespace {

struct RaceMsg {
    int instance;  // 0 = baseline, k >= 1 = guided slot k
    SolverOutcome out;
};

struct RaceBoard {
    std::mutex mu;
    std::condition_variable cv;
    std::vector<RaceMsg> inbox;

    void post(RaceMsg m) {
        {
            std::lock_guard<std::mutex> lk(mu);
            inbox.push_back(std::move(m));
        }
        cv.notify_one();
    }
};

struct Instance {
    std::thread worker;
    CancelToken cancel;
    bool done = false;
    SolverOutcome out;
    SpawnRecord spawn;  // guided slots only
};

// Outcome of one iteration's race over F_i (with the difference constraint).
struct RaceResult {
    SolverOutcome decisive;  // Sat of the winner, or baseline's non-Sat
    std::string winner = "none";
    int mpnn_iterations = 0;
    std::vector<SpawnRecord> spawns;
};

RaceResult race_iteration(const Cnf& f, const MpnnModel* model, const RaceConfig& cfg,
                          int iteration, Clock::time_point attack_t0) {
    auto it0 = Clock::now();
    RaceBoard board;
    std::vector<Instance> inst(1);

    auto budget_for = [&](CancelToken tok) {
        SolveBudget b;
        b.cancel = std::move(tok);
        if (cfg.per_iter_time_s) b.time_limit_s = cfg.per_iter_time_s;
        if (cfg.per_iter_conflicts) b.conflict_limit = cfg.per_iter_conflicts;
        if (cfg.total_time_s) {
            double left = *cfg.total_time_s - seconds_since(attack_t0);
            b.time_limit_s = std::min(b.time_limit_s.value_or(left), std::max(0.0, left));
        }
        return b;
    };

    inst[0].cancel = make_cancel_token();
    inst[0].worker = std::thread([&board, &f, &cfg, iteration, b = budget_for(inst[0].cancel)] {
        board.post({0, Solver(cfg.seed + iteration).solve(f, {}, b)});
    });

    // The evaluator starts once the unguided solver has had sat_time_th to
    // itself; on this machine's single core an earlier start would only slow
    // the solver it is meant to beat.
    std::optional<GraphEncoding> enc;
    std::optional<MpnnEvaluator> eval;
    std::size_t next_thresh = 0;
    std::vector<std::vector<Lit>> guidance_store;  // stable storage per spawn
    guidance_store.reserve(cfg.max_instances > 1 ? cfg.max_instances - 1 : 0);

    RaceResult res;
    int open = 1;

    auto handle_msg = [&](const RaceMsg& m) {
        inst[m.instance].done = true;
        inst[m.instance].out = m.out;
        --open;
    };

    std::unique_lock<std::mutex> lk(board.mu);
    for (;;) {
        board.cv.wait_for(lk, std::chrono::milliseconds(20),
                          [&] { return !board.inbox.empty(); });
        std::vector<RaceMsg> msgs;
        msgs.swap(board.inbox);
        lk.unlock();

        bool decided = false;
        for (const auto& m : msgs) {
            handle_msg(m);
            if (m.out.sat() && res.winner == "none") {
                res.decisive = m.out;
                res.winner = m.instance == 0 ? "baseline"
                                             : "guided(" + std::to_string(m.instance) + ")";
                decided = true;
            } else if (m.instance == 0 && !m.out.sat()) {
                // Unsat/timeout of the unguided instance is authoritative:
                // guided instances only ever add assumptions.
                res.decisive = m.out;
                res.winner = m.out.unsat() ? "baseline" : "none";
                decided = true;
            }
        }
        if (decided) break;

        if (model && !eval && seconds_since(it0) >= cfg.sat_time_th) {
            enc = encode_graph(f, cfg.clause_cap, cfg.seed + iteration);
            eval.emplace(*model, *enc);
        }
        if (eval && eval->iterations_done() < cfg.t_max) {
            eval->step();
            res.mpnn_iterations = eval->iterations_done();
            while (next_thresh < cfg.cr_thresholds.size() &&
                   eval->trace().cr >= cfg.cr_thresholds[next_thresh] &&
                   (int)inst.size() < cfg.max_instances) {
                std::vector<Lit> guidance =
                    extract_guidance(eval->trace(), cfg.bit_threshold);
                if (cfg.invert_guidance)
                    for (Lit& l : guidance) l = ~l;
                double vt = cfg.cr_thresholds[next_thresh];
                ++next_thresh;
                if (guidance.empty()) continue;
                guidance_store.push_back(std::move(guidance));
                const auto& g = guidance_store.back();
                Instance in;
                in.cancel = make_cancel_token();
                in.spawn.instance = (int)inst.size();
                in.spawn.threshold = vt;
                in.spawn.spawn_time_s = seconds_since(it0);
                in.spawn.cr = eval->trace().cr;
                in.spawn.guidance_size = (int)g.size();
                int id = (int)inst.size();
                inst.push_back(std::move(in));
                ++open;
                inst.back().worker = std::thread(
                    [&board, &f, &cfg, iteration, id, &g,
                     b = budget_for(inst.back().cancel)] {
                        board.post({id, Solver(cfg.seed + iteration + 7919ULL * id)
                                            .solve(f, g, b)});
                    });
            }
        }
        if (open == 0) {
            // Everyone timed out or was cancelled.
            res.decisive = inst[0].out;
            break;
        }
        lk.lock();
    }

    for (auto& in : inst)
        if (in.cancel) in.cancel->store(true);
    for (auto& in : inst)
        if (in.worker.joinable()) in.worker.join();

    // Drain stragglers so labels reflect true outcomes.
    for (const auto& m : board.inbox) {
        inst[m.instance].done = true;
        inst[m.instance].out = m.out;
    }
    for (std::size_t k = 1; k < inst.size(); ++k) {
        bool won = res.winner == "guided(" + std::to_string(k) + ")";
        inst[k].spawn.label = classify_prediction(inst[k].out, won);
        res.spawns.push_back(inst[k].spawn);
    }
    return res;
}

}  // namespace

AttackResult nngsat_attack(const Circuit& locked, const Oracle& oracle, const MpnnModel* model,
                           const RaceConfig& cfg) {
    auto t0 = Clock::now();
    AttackState st;
    st.miter = build_miter(locked);
    st.f = st.miter.cnf;
    AttackResult res;

    for (;;) {
        if (cfg.total_time_s && seconds_since(t0) >= *cfg.total_time_s) {
            res.report = finalize_report(std::move(res.report), SolveStatus::Timeout,
                                         st.iteration, seconds_since(t0), oracle);
            return res;
        }
        auto it0 = Clock::now();
        RaceResult race = race_iteration(st.f, model, cfg, st.iteration, t0);

        IterationRecord rec;
        rec.iteration = st.iteration;
        rec.winner = race.winner;
        rec.time_s = seconds_since(it0);
        rec.stats = race.decisive.stats;
        rec.mpnn_iterations = race.mpnn_iterations;
        rec.spawns = race.spawns;
        res.report.iters.push_back(std::move(rec));

        if (race.decisive.sat()) {
            block_dip(st, locked, oracle, race.decisive.model);
        } else if (race.decisive.unsat()) {
            res.key = extract_key(st.miter, st.f, locked, cfg.seed);
            res.success = true;
            res.report = finalize_report(std::move(res.report), SolveStatus::Unsat,
                                         st.iteration, seconds_since(t0), oracle);
            return res;
        } else {
            res.report = finalize_report(std::move(res.report), race.decisive.status,
                                         st.iteration, seconds_since(t0), oracle);
            return res;
        }
    }
}

// ------------------------------------------------------------ verification

bool verify_key(const Circuit& locked, const BitAssignment& key, const Oracle& oracle,
                std::uint64_t seed) {
    std::size_t width = locked.primary_inputs.size();
    auto vectors_agree = [&](const BitAssignment& pi) {
        return simulate(locked, pi, key) == oracle.query(pi);
    };
    if (width <= 16) {
        for (std::uint64_t v = 0; v < (1ULL << width); ++v) {
            BitAssignment pi;
            for (std::size_t i = 0; i < width; ++i)
                pi.set(locked.primary_inputs[i], (v >> i) & 1);
            if (!vectors_agree(pi)) return false;
        }
        return true;
    }
    std::mt19937_64 rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL);
    for (int t = 0; t < 10000; ++t) {
        BitAssignment pi;
        for (NetId n : locked.primary_inputs) pi.set(n, rng() & 1);
        if (!vectors_agree(pi)) return false;
    }
    return oracle.sat_equivalent(key);
}

// ----------------------------------------------------------------- report

std::string AttackReport::to_json() const {
    nlohmann::json j;
    switch (status) {
        case SolveStatus::Unsat: j["status"] = "completed"; break;
        case SolveStatus::Timeout: j["status"] = "timeout"; break;
        case SolveStatus::Cancelled: j["status"] = "cancelled"; break;
        case SolveStatus::Sat: j["status"] = "sat"; break;
    }
    j["iterations"] = iterations;
    j["wall_time_s"] = wall_time_s;
    j["oracle_queries"] = oracle_queries;
    j["guiding"] = guiding;
    j["misguiding"] = misguiding;
    j["skipped"] = skipped;
    j["iteration_log"] = nlohmann::json::array();
    for (const auto& it : iters) {
        nlohmann::json ji;
        ji["iteration"] = it.iteration;
        ji["winner"] = it.winner;
        ji["time_s"] = it.time_s;
        ji["mpnn_iterations"] = it.mpnn_iterations;
        ji["stats"] = {{"decisions", it.stats.decisions},
                       {"conflicts", it.stats.conflicts},
                       {"propagations", it.stats.propagations},
                       {"restarts", it.stats.restarts}};
        ji["spawns"] = nlohmann::json::array();
        for (const auto& sp : it.spawns)
            ji["spawns"].push_back({{"instance", sp.instance},
                                    {"threshold", sp.threshold},
                                    {"spawn_time_s", sp.spawn_time_s},
                                    {"cr", sp.cr},
                                    {"guidance_size", sp.guidance_size},
                                    {"label", to_string(sp.label)}});
        j["iteration_log"].push_back(std::move(ji));
    }
    return j.dump(2);
}

}  // namespace nngsat
