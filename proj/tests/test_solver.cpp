#include <doctest.h>

#include <chrono>
#include <random>
#include <thread>

#include "nngsat/cnf.hpp"
#include "nngsat/solver.hpp"

using namespace nngsat;

static bool brute_force_sat(const Cnf& f) {
    for (std::uint64_t v = 0; v < (1ULL << f.num_vars); ++v) {
        bool ok = true;
        for (const Clause& cl : f.clauses) {
            bool any = false;
            for (const Lit& l : cl)
                if ((bool)((v >> (l.var - 1)) & 1) != l.neg) {
                    any = true;
                    break;
                }
            if (!any) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
    }
    return false;
}

TEST_CASE("agrees with brute force on small random instances") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 300; ++t) {
        int n = 3 + (int)(rng() % 10);
        double ratio = 1.0 + (rng() % 60) / 10.0;
        Cnf f = random_3sat(n, ratio, rng());
        SolverOutcome out = solve(f, {}, SolveBudget::unlimited(), t);
        REQUIRE((out.sat() || out.unsat()));
        CHECK(out.sat() == brute_force_sat(f));
        if (out.sat()) CHECK(check_model(f, out.model));
    }
}

TEST_CASE("trivial formulas") {
    Cnf f;
    f.num_vars = 1;
    f.add_clause({pos(1)});
    f.add_clause({neg(1)});
    CHECK(solve(f).unsat());

    Cnf g;
    g.num_vars = 1;
    CHECK(solve(g).sat());
}

TEST_CASE("assumptions produce a failed subset on conflict") {
    Cnf f;
    f.num_vars = 3;
    f.add_clause({neg(1), pos(2)});
    f.add_clause({neg(2), pos(3)});
    SolverOutcome out = solve(f, {pos(1), neg(3)});
    REQUIRE(out.unsat());
    CHECK(!out.failed_assumptions.empty());
    for (const Lit& l : out.failed_assumptions)
        CHECK((l == pos(1) || l == neg(3)));
    // The same formula is satisfiable without the conflicting assumptions.
    CHECK(solve(f, {pos(1)}).sat());
}

TEST_CASE("assumptions are respected in the model") {
    Cnf f = random_3sat(12, 2.0, 4);
    SolverOutcome out = solve(f, {pos(5), neg(7)});
    if (out.sat()) {
        CHECK(out.model.get(5) == true);
        CHECK(out.model.get(7) == false);
    }
}

TEST_CASE("conflict budget yields Timeout") {
    Cnf f = random_3sat(120, 4.3, 9);
    SolveBudget b;
    b.conflict_limit = 1;
    SolverOutcome out = solve(f, {}, b);
    CHECK((out.status == SolveStatus::Timeout || out.sat() || out.unsat()));
    // A fresh unsatisfiable-looking hard instance with a 0-conflict budget
    // must not claim Unsat.
    SolveBudget zero;
    zero.conflict_limit = 0;
    SolverOutcome o2 = solve(f, {}, zero);
    CHECK(o2.status != SolveStatus::Unsat);
}

TEST_CASE("cancellation token stops the solver") {
    Cnf f = random_3sat(250, 4.27, 13);
    SolveBudget b;
    b.cancel = make_cancel_token();
    SolverOutcome out;
    std::thread worker([&] { out = solve(f, {}, b); });
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    b.cancel->store(true);
    worker.join();
    CHECK((out.status == SolveStatus::Cancelled || out.sat() || out.unsat()));
}

TEST_CASE("same seed gives identical statistics, different seeds may differ") {
    Cnf f = random_3sat(60, 4.3, 21);
    SolverOutcome a = solve(f, {}, SolveBudget::unlimited(), 5);
    SolverOutcome b = solve(f, {}, SolveBudget::unlimited(), 5);
    CHECK(a.status == b.status);
    CHECK(a.stats.decisions == b.stats.decisions);
    CHECK(a.stats.conflicts == b.stats.conflicts);
}

TEST_CASE("unsatisfiable pigeonhole-style instance") {
    // 4 pigeons, 3 holes.
    Cnf f;
    auto v = [&](int p, int h) { return p * 3 + h + 1; };
    f.num_vars = 12;
    for (int p = 0; p < 4; ++p) f.add_clause({pos(v(p, 0)), pos(v(p, 1)), pos(v(p, 2))});
    for (int h = 0; h < 3; ++h)
        for (int p1 = 0; p1 < 4; ++p1)
            for (int p2 = p1 + 1; p2 < 4; ++p2) f.add_clause({neg(v(p1, h)), neg(v(p2, h))});
    CHECK(solve(f).unsat());
}
