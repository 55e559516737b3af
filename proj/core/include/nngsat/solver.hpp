// CDCL SAT solver: two-watched-literal propagation, first-UIP learning,
// activity ordering, Luby restarts, phase saving, assumptions, budgets.
#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "nngsat/cnf.hpp"

namespace nngsat {

using CancelToken = std::shared_ptr<std::atomic<bool>>;

inline CancelToken make_cancel_token() { return std::make_shared<std::atomic<bool>>(false); }

struct SolveBudget {
    std::optional<double> time_limit_s;
    std::optional<std::uint64_t> conflict_limit;
    CancelToken cancel;  // may be null

    static SolveBudget unlimited() { return {}; }
};

enum class SolveStatus { Sat, Unsat, Timeout, Cancelled };

struct SolverStats {
    std::uint64_t decisions = 0;
    std::uint64_t conflicts = 0;
    std::uint64_t propagations = 0;
    std::uint64_t restarts = 0;
};

struct SolverOutcome {
    SolveStatus status = SolveStatus::Timeout;
    BitAssignment model;                       // total over CNF vars when Sat
    std::vector<Lit> failed_assumptions;       // subset of assumptions when Unsat under them
    SolverStats stats;

    bool sat() const { return status == SolveStatus::Sat; }
    bool unsat() const { return status == SolveStatus::Unsat; }
};

class Solver {
  public:
    explicit Solver(std::uint64_t seed = 0) : seed_(seed) {}

    SolverOutcome solve(const Cnf& f, const std::vector<Lit>& assumptions = {},
                        const SolveBudget& budget = SolveBudget::unlimited());

  private:
    std::uint64_t seed_;
};

// Linear scan: true iff every clause has a true literal; m must be total.
bool check_model(const Cnf& f, const BitAssignment& m);

inline SolverOutcome solve(const Cnf& f, const std::vector<Lit>& assumptions = {},
                           const SolveBudget& budget = SolveBudget::unlimited(),
                           std::uint64_t seed = 0) {
    return Solver(seed).solve(f, assumptions, budget);
}

}  // namespace nngsat
