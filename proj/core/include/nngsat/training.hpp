// Dataset generation (random SAT/UNSAT pairs and attack traces) and the
// two-phase training procedure for the message-passing network.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nngsat/attack.hpp"
#include "nngsat/cnf.hpp"
#include "nngsat/mpnn.hpp"
#include "nngsat/structures.hpp"

namespace nngsat {

// Two CNFs identical except one literal occurrence is negated; the flip
// turns the unsatisfiable instance into a satisfiable one.
struct SrPair {
    Cnf sat_instance;
    Cnf unsat_instance;
    int clause_index = -1;  // clause holding the flipped literal (the last)
    int lit_index = -1;     // position within that clause
};

// Grow-until-unsat construction, solver-checked; deterministic in seed.
std::vector<SrPair> gen_sr_dataset(int n_lo, int n_hi, int count, std::uint64_t seed);

struct TraceIteration {
    Cnf f;                // formula solved at this iteration (with difference clause)
    bool sat = false;     // internal solver's label
    BitAssignment model;  // solver model when sat
};

struct AttackTrace {
    std::string circuit_id;
    std::vector<TraceIteration> iterations;
};

struct TraceGenResult {
    std::vector<AttackTrace> traces;
    int dropped = 0;  // samples whose baseline attack hit its budget
};

// Wires-only host circuits locked per recipe; baseline attack run to
// completion, per-iteration formulas labeled by the solver. Long attacks are
// downsampled to at most max_iters_per_trace evenly spaced iterations (the
// final one always kept) — late-iteration formulas grow with every blocked
// input pattern, so keeping them all multiplies memory for little variety.
TraceGenResult gen_attack_traces(const std::vector<LockRecipe>& recipes, int count,
                                 std::uint64_t seed, double per_sample_time_s = 60.0,
                                 int max_iters_per_trace = 24);

struct TrainConfig {
    int epochs = 30;
    double lr = 1e-4;
    int iterations = 26;  // message-passing rounds
    int batch_size = 32;
    double holdout_frac = 0.1;
    int clause_cap = 50000;
    std::uint64_t seed = 0;
    bool verbose = false;
};

struct TrainMetrics {
    std::vector<double> epoch_loss;
    double holdout_accuracy = 0.0;
    double decode_success = 0.0;  // phase 2 only; SAT-labeled held-out graphs decoded
    double temperature = 1.0;
};

// Classification on SR pairs (single-bit supervision), then a scalar
// temperature fitted on held-out data so CR is threshold-meaningful.
TrainMetrics train_phase1(MpnnModel& model, const std::vector<SrPair>& dataset,
                          const TrainConfig& cfg);

// Continues classification on attack-iteration graphs.
TrainMetrics train_phase2(MpnnModel& model, const std::vector<AttackTrace>& traces,
                          const TrainConfig& cfg);

// Held-out style accuracy of CR>0.5 vs labels on arbitrary labeled CNFs.
double classification_accuracy(const MpnnModel& model, const std::vector<const Cnf*>& instances,
                               const std::vector<bool>& labels, int iterations, int clause_cap);

// Directory layout: manifest.json + DIMACS files + labels. Loaders validate
// the manifest and round-trip bit-exactly.
void save_sr_dataset(const std::vector<SrPair>& ds, const std::string& dir,
                     const std::string& config_json);
std::vector<SrPair> load_sr_dataset(const std::string& dir);

void save_traces(const std::vector<AttackTrace>& traces, const std::string& dir,
                 const std::string& config_json);
std::vector<AttackTrace> load_traces(const std::string& dir);

}  // namespace nngsat
