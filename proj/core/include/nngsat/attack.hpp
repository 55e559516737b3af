// Oracle-guided SAT attack on locked circuits, plus the network-guided race
// variant: per iteration an unguided solver runs against confidence-spawned
// guided instances; the first satisfying instance wins.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nngsat/cnf.hpp"
#include "nngsat/mpnn.hpp"
#include "nngsat/netlist.hpp"
#include "nngsat/solver.hpp"

namespace nngsat {

// Black-box access to the activated circuit. The hidden key never leaves
// this class; the attack path can only call query().
class Oracle {
  public:
    Oracle(Circuit locked, BitAssignment hidden_key);
    static Oracle from_key_file(Circuit locked, const std::string& path);

    // pi must cover the primary inputs; returns output-net values.
    BitAssignment query(const BitAssignment& pi) const;
    std::uint64_t query_count() const { return queries_; }
    const Circuit& circuit() const { return locked_; }

    // Sealed equivalence check for wide circuits: miter between the circuit
    // under `key` and under the hidden key; Unsat means equivalent.
    bool sat_equivalent(const BitAssignment& key) const;

  private:
    Circuit locked_;
    BitAssignment key_;
    mutable std::uint64_t queries_ = 0;
};

void write_key_file(const Circuit& c, const BitAssignment& key, const std::string& path);

enum class PredictionLabel { Guiding, Misguiding, Skipped };
std::string to_string(PredictionLabel l);

// One guided instance spawned within an iteration's race.
struct SpawnRecord {
    int instance = 0;         // 1-based guided slot
    double threshold = 0.0;   // vt_k that fired
    double spawn_time_s = 0.0;
    double cr = 0.0;          // CR at spawn
    int guidance_size = 0;
    PredictionLabel label = PredictionLabel::Skipped;
};

struct IterationRecord {
    int iteration = 0;
    std::string winner = "none";  // baseline | guided(k) | none
    double time_s = 0.0;
    SolverStats stats;            // winning instance's stats
    int mpnn_iterations = 0;
    std::vector<SpawnRecord> spawns;
};

struct AttackReport {
    SolveStatus status = SolveStatus::Timeout;  // Unsat = normal termination
    int iterations = 0;
    double wall_time_s = 0.0;
    int guiding = 0, misguiding = 0, skipped = 0;
    std::uint64_t oracle_queries = 0;
    std::vector<IterationRecord> iters;

    std::string to_json() const;
};

struct AttackResult {
    bool success = false;  // terminated with a key
    BitAssignment key;     // over key-input net ids
    AttackReport report;
};

struct RaceConfig {
    double sat_time_th = 5.0;
    std::vector<double> cr_thresholds{0.70, 0.75, 0.80, 0.85, 0.90};  // ascending
    double bit_threshold = 0.9;
    int max_instances = 8;  // baseline + guided slots
    int t_max = 128;        // message-passing iteration cap
    int clause_cap = 50000;
    bool invert_guidance = false;  // ablation switch: negate every guidance literal
    std::uint64_t seed = 0;
    std::optional<double> per_iter_time_s;
    std::optional<std::uint64_t> per_iter_conflicts;
    std::optional<double> total_time_s;
};

// Miter + accumulated blocking constraints; mutated only by the coordinator.
struct AttackState {
    Miter miter;
    Cnf f;  // F_i: miter plus 2*i blocked-DIP copies
    std::vector<std::pair<BitAssignment, BitAssignment>> dip_history;  // (DIP, oracle Y)
    int iteration = 0;
};

// Called after each iteration's decisive solve of F_i (with the difference
// constraint); used by the trace recorder. Never sees the hidden key.
using IterationObserver =
    std::function<void(int iteration, const Cnf& f, const SolverOutcome& out)>;

AttackResult sat_attack_baseline(const Circuit& locked, const Oracle& oracle,
                                 const SolveBudget& per_iter_budget, std::uint64_t seed,
                                 const IterationObserver& observer = nullptr);

// model may be null: the race then degenerates to the baseline loop and the
// report carries no spawns.
AttackResult nngsat_attack(const Circuit& locked, const Oracle& oracle, const MpnnModel* model,
                           const RaceConfig& cfg);

// Assumption literals for variables whose per-bit confidence clears the
// cutoff; polarity follows the higher-voted literal. Empty when the trace's
// overall confidence favors unsatisfiability.
std::vector<Lit> extract_guidance(const VoteTrace& trace, double bit_threshold);

// Sat winner -> Guiding; Unsat under assumptions -> Misguiding;
// cancelled -> Skipped.
PredictionLabel classify_prediction(const SolverOutcome& out, bool won);

// Exhaustive simulation equivalence when the PI width allows it; otherwise
// the oracle's sealed SAT check plus 10,000 random vectors.
bool verify_key(const Circuit& locked, const BitAssignment& key, const Oracle& oracle,
                std::uint64_t seed = 0);

}  // namespace nngsat
