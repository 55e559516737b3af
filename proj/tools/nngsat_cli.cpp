// Command-line driver: structure generation, locking, attacks, training,
// dataset generation, single solves, and the phase-transition sweep.
#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "nngsat/attack.hpp"
#include "nngsat/cnf.hpp"
#include "nngsat/mpnn.hpp"
#include "nngsat/netlist.hpp"
#include "nngsat/solver.hpp"
#include "nngsat/structures.hpp"
#include "nngsat/training.hpp"

using namespace nngsat;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << text;
}

// Every artifact-producing run leaves a manifest beside its main output.
void write_manifest(const std::string& out_path, const nlohmann::json& cfg) {
    write_file(out_path + ".manifest.json", cfg.dump(2) + "\n");
}

StructureSpec::Kind parse_kind(const std::string& s) {
    if (s == "multiplier") return StructureSpec::Kind::Multiplier;
    if (s == "crossbar") return StructureSpec::Kind::Crossbar;
    if (s == "lut") return StructureSpec::Kind::Lut;
    if (s == "andtree") return StructureSpec::Kind::AndTree;
    throw std::runtime_error("unknown structure kind: " + s);
}

int cmd_gen(const std::string& kind, int n, int m, bool locked, const std::string& out) {
    Circuit c;
    switch (parse_kind(kind)) {
        case StructureSpec::Kind::Multiplier: c = gen_multiplier(n, m ? m : n); break;
        case StructureSpec::Kind::Crossbar: c = gen_crossbar(n, m ? m : n, locked); break;
        case StructureSpec::Kind::Lut: c = gen_lut(n, locked); break;
        case StructureSpec::Kind::AndTree: c = gen_and_tree(n, locked); break;
    }
    write_file(out, write_bench(c));
    write_manifest(out, {{"subcommand", "gen"},
                         {"kind", kind},
                         {"n", n},
                         {"m", m},
                         {"locked", locked}});
    std::cout << "wrote " << out << " (" << c.gates.size() << " gates)\n";
    return 0;
}

int cmd_lock(const std::string& host_path, const std::string& recipe_path, std::uint64_t seed,
             const std::string& out, const std::string& key_out) {
    Circuit host = parse_bench(slurp(host_path));
    std::uint64_t recipe_seed = seed;
    LockRecipe recipe = lock_recipe_from_json(slurp(recipe_path), &recipe_seed);
    if (seed != 0) recipe_seed = seed;  // explicit flag wins over recipe file
    LockedBenchmark lb = build_locked_benchmark(host, recipe, recipe_seed);
    write_file(out, write_bench(lb.circuit));
    write_key_file(lb.circuit, lb.hidden_key, key_out);
    write_manifest(out, {{"subcommand", "lock"},
                         {"host", host_path},
                         {"recipe", recipe_path},
                         {"seed", recipe_seed},
                         {"key_file", key_out},
                         {"structures", lb.structure_log}});
    std::cout << "wrote " << out << " (" << lb.circuit.key_inputs.size() << " key bits)\n";
    return 0;
}

int cmd_attack(const std::string& mode, const std::string& locked_path,
               const std::string& key_path, const std::string& model_path,
               const std::string& report_path, std::uint64_t seed, RaceConfig cfg,
               double iter_time) {
    Circuit locked = parse_bench(slurp(locked_path));
    Oracle oracle = Oracle::from_key_file(locked, key_path);
    cfg.seed = seed;
    if (iter_time > 0) cfg.per_iter_time_s = iter_time;

    AttackResult res;
    if (mode == "baseline") {
        SolveBudget b;
        if (iter_time > 0) b.time_limit_s = iter_time;
        res = sat_attack_baseline(locked, oracle, b, seed);
    } else if (mode == "nngsat") {
        std::optional<MpnnModel> model;
        if (!model_path.empty()) model = load_checkpoint(model_path);
        res = nngsat_attack(locked, oracle, model ? &*model : nullptr, cfg);
    } else {
        throw std::runtime_error("unknown attack mode: " + mode);
    }

    if (!report_path.empty()) {
        write_file(report_path, res.report.to_json() + "\n");
        write_manifest(report_path, {{"subcommand", "attack"},
                                     {"mode", mode},
                                     {"locked", locked_path},
                                     {"model", model_path},
                                     {"seed", seed}});
    }
    if (!res.success) {
        std::cerr << "attack did not terminate within budget\n";
        return 1;
    }
    bool ok = verify_key(locked, res.key, oracle, seed);
    std::cout << "iterations " << res.report.iterations << ", key";
    for (NetId k : locked.key_inputs) std::cout << ' ' << (res.key.get(k) ? 1 : 0);
    std::cout << (ok ? " (verified)" : " (VERIFICATION FAILED)") << '\n';
    return ok ? 0 : 1;
}

int cmd_train(int phase, const std::string& dataset_dir, const std::string& model_in,
              const std::string& model_out, TrainConfig cfg, int d) {
    MpnnModel model =
        model_in.empty() ? MpnnModel::init(d, cfg.seed) : load_checkpoint(model_in);
    TrainMetrics metrics;
    if (phase == 1) {
        metrics = train_phase1(model, load_sr_dataset(dataset_dir), cfg);
    } else if (phase == 2) {
        if (model_in.empty())
            throw std::runtime_error("phase 2 requires --model-in (a phase-1 checkpoint)");
        metrics = train_phase2(model, load_traces(dataset_dir), cfg);
    } else {
        throw std::runtime_error("phase must be 1 or 2");
    }
    save_checkpoint(model, model_out);
    write_manifest(model_out, {{"subcommand", "train"},
                               {"phase", phase},
                               {"dataset", dataset_dir},
                               {"model_in", model_in},
                               {"epochs", cfg.epochs},
                               {"lr", cfg.lr},
                               {"iterations", cfg.iterations},
                               {"batch_size", cfg.batch_size},
                               {"seed", cfg.seed},
                               {"holdout_accuracy", metrics.holdout_accuracy},
                               {"decode_success", metrics.decode_success},
                               {"temperature", metrics.temperature}});
    std::cout << "holdout accuracy " << metrics.holdout_accuracy;
    if (phase == 2) std::cout << ", decode success " << metrics.decode_success;
    std::cout << ", wrote " << model_out << '\n';
    return 0;
}

int cmd_dataset(const std::string& kind, const std::string& out_dir, int count, int n_lo,
                int n_hi, const std::string& recipe_path, std::uint64_t seed,
                double sample_time) {
    nlohmann::json cfg{{"subcommand", "dataset"}, {"kind", kind}, {"count", count},
                       {"seed", seed}};
    if (kind == "sr") {
        cfg["n_lo"] = n_lo;
        cfg["n_hi"] = n_hi;
        save_sr_dataset(gen_sr_dataset(n_lo, n_hi, count, seed), out_dir, cfg.dump());
    } else if (kind == "traces") {
        if (recipe_path.empty()) throw std::runtime_error("traces need --recipe");
        cfg["recipe"] = recipe_path;
        LockRecipe recipe = lock_recipe_from_json(slurp(recipe_path));
        TraceGenResult res = gen_attack_traces({recipe}, count, seed, sample_time);
        if (res.dropped)
            std::cerr << res.dropped << " samples dropped (attack budget exhausted)\n";
        save_traces(res.traces, out_dir, cfg.dump());
    } else {
        throw std::runtime_error("unknown dataset kind: " + kind);
    }
    std::cout << "wrote " << out_dir << '\n';
    return 0;
}

int cmd_solve(const std::string& path) {
    Cnf f = read_dimacs(slurp(path));
    SolverOutcome out = solve(f);
    if (out.sat()) {
        std::cout << "SAT\n";
        for (int v = 1; v <= f.num_vars; ++v)
            std::cout << (out.model.get(v) ? v : -v) << (v == f.num_vars ? " 0\n" : " ");
    } else if (out.unsat()) {
        std::cout << "UNSAT\n";
    } else {
        std::cout << "UNKNOWN\n";
    }
    return 0;
}

int cmd_phase(int n, const std::vector<double>& ratios, int seeds, const std::string& out) {
    std::ostringstream csv;
    csv << "ratio,median_decisions,sat_fraction\n";
    for (double r : ratios) {
        std::vector<std::uint64_t> decisions;
        int sat = 0;
        for (int s = 0; s < seeds; ++s) {
            Cnf f = random_3sat(n, r, (std::uint64_t)s * 1000003ULL + 17);
            SolverOutcome o = solve(f, {}, SolveBudget::unlimited(), (std::uint64_t)s);
            decisions.push_back(o.stats.decisions);
            if (o.sat()) ++sat;
        }
        std::sort(decisions.begin(), decisions.end());
        csv << r << ',' << decisions[decisions.size() / 2] << ','
            << (double)sat / seeds << '\n';
    }
    if (out.empty())
        std::cout << csv.str();
    else {
        write_file(out, csv.str());
        write_manifest(out, {{"subcommand", "phase"}, {"n", n}, {"seeds", seeds}});
        std::cout << "wrote " << out << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SAT attack workbench for logic-locked circuits"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "master seed fanned out to all randomness");

    // gen
    auto* gen = app.add_subcommand("gen", "emit a structure netlist");
    std::string gen_kind, gen_out = "out.bench";
    int gen_n = 4, gen_m = 0;
    bool gen_locked = false;
    gen->add_option("--kind", gen_kind, "multiplier|crossbar|lut|andtree")->required();
    gen->add_option("--n", gen_n);
    gen->add_option("--m", gen_m);
    gen->add_flag("--locked", gen_locked);
    gen->add_option("--out", gen_out);

    // lock
    auto* lock = app.add_subcommand("lock", "apply a lock recipe to a host circuit");
    std::string lock_host, lock_recipe, lock_out = "locked.bench", lock_key = "secret.key";
    lock->add_option("--host", lock_host)->required();
    lock->add_option("--recipe", lock_recipe)->required();
    lock->add_option("--out", lock_out);
    lock->add_option("--key-out", lock_key);

    // attack
    auto* atk = app.add_subcommand("attack", "run the oracle-guided attack");
    std::string atk_mode = "baseline", atk_locked, atk_key, atk_model, atk_report;
    if (const char* env = std::getenv("NNGSAT_MODEL")) atk_model = env;
    RaceConfig rc;
    double atk_iter_time = 0.0, atk_total_time = 0.0;
    atk->add_option("--mode", atk_mode, "baseline|nngsat");
    atk->add_option("--locked", atk_locked)->required();
    atk->add_option("--oracle-key", atk_key)->required();
    atk->add_option("--model", atk_model, "checkpoint (default from NNGSAT_MODEL)");
    atk->add_option("--report", atk_report, "report JSON path");
    atk->add_option("--sat-time-th", rc.sat_time_th);
    atk->add_option("--cr-thresholds", rc.cr_thresholds);
    atk->add_option("--bit-threshold", rc.bit_threshold);
    atk->add_option("--max-instances", rc.max_instances);
    atk->add_option("--tmax", rc.t_max);
    atk->add_option("--clause-cap", rc.clause_cap);
    atk->add_option("--iter-time", atk_iter_time, "per-iteration solver budget (s)");
    atk->add_option("--total-time", atk_total_time, "whole-attack budget (s)");

    // train
    auto* trn = app.add_subcommand("train", "train the network");
    int trn_phase = 1, trn_d = 32;
    std::string trn_dataset, trn_in, trn_out = "model.ckpt";
    TrainConfig tc;
    trn->add_option("--phase", trn_phase, "1|2")->required();
    trn->add_option("--dataset", trn_dataset)->required();
    trn->add_option("--model-in", trn_in);
    trn->add_option("--model-out", trn_out);
    trn->add_option("--epochs", tc.epochs);
    trn->add_option("--lr", tc.lr);
    trn->add_option("--batch", tc.batch_size);
    trn->add_option("--iterations", tc.iterations, "message-passing rounds");
    trn->add_option("--clause-cap", tc.clause_cap);
    trn->add_option("--d", trn_d, "embedding width (new models)");
    trn->add_flag("--verbose", tc.verbose);

    // dataset
    auto* ds = app.add_subcommand("dataset", "generate a dataset");
    std::string ds_kind, ds_out, ds_recipe;
    int ds_count = 100, ds_lo = 4, ds_hi = 12;
    double ds_sample_time = 60.0;
    ds->add_option("--kind", ds_kind, "sr|traces")->required();
    ds->add_option("--out", ds_out)->required();
    ds->add_option("--count", ds_count);
    ds->add_option("--n-lo", ds_lo);
    ds->add_option("--n-hi", ds_hi);
    ds->add_option("--recipe", ds_recipe);
    ds->add_option("--sample-time", ds_sample_time);

    // solve
    auto* sv = app.add_subcommand("solve", "solve one DIMACS file");
    std::string sv_file;
    sv->add_option("file", sv_file)->required();

    // phase
    auto* ph = app.add_subcommand("phase", "random 3-SAT ratio sweep (CSV)");
    int ph_n = 75, ph_seeds = 51;
    std::vector<double> ph_ratios{2.0, 3.0, 4.3, 6.0, 8.0};
    std::string ph_out;
    ph->add_option("--n", ph_n);
    ph->add_option("--ratios", ph_ratios);
    ph->add_option("--seeds", ph_seeds);
    ph->add_option("--out", ph_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) return cmd_gen(gen_kind, gen_n, gen_m, gen_locked, gen_out);
        if (*lock) return cmd_lock(lock_host, lock_recipe, seed, lock_out, lock_key);
        if (*atk) {
            if (atk_total_time > 0) rc.total_time_s = atk_total_time;
            return cmd_attack(atk_mode, atk_locked, atk_key, atk_model, atk_report, seed, rc,
                              atk_iter_time);
        }
        if (*trn) {
            tc.seed = seed;
            return cmd_train(trn_phase, trn_dataset, trn_in, trn_out, tc, trn_d);
        }
        if (*ds)
            return cmd_dataset(ds_kind, ds_out, ds_count, ds_lo, ds_hi, ds_recipe, seed,
                               ds_sample_time);
        if (*sv) return cmd_solve(sv_file);
        if (*ph) return cmd_phase(ph_n, ph_ratios, ph_seeds, ph_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
