#include <doctest.h>

#include <random>

#include "nngsat/cnf.hpp"
#include "nngsat/solver.hpp"
#include "nngsat/structures.hpp"

using namespace nngsat;

TEST_CASE("clause validation") {
    Cnf f;
    f.num_vars = 2;
    CHECK_THROWS_AS(f.add_clause({}), CnfError);
    CHECK_THROWS_AS(f.add_clause({pos(3)}), CnfError);
    f.add_clause({pos(1), neg(2)});
    CHECK(f.num_clauses() == 1);
}

TEST_CASE("tseitin encoding agrees with simulation on every input") {
    // Circuits small enough to enumerate all inputs; check that fixing the
    // inputs in the CNF forces exactly the simulated output values.
    std::vector<Circuit> circuits;
    circuits.push_back(gen_multiplier(2, 3));
    circuits.push_back(gen_lut(2, false));
    circuits.push_back(gen_and_tree(6, false));
    circuits.push_back(gen_crossbar(4, 2, false));
    for (const Circuit& c : circuits) {
        auto [f, vm] = tseitin_encode(c);
        int width = (int)c.primary_inputs.size();
        REQUIRE(width <= 10);
        for (int v = 0; v < (1 << width); ++v) {
            BitAssignment pi;
            std::vector<Lit> assumptions;
            for (int i = 0; i < width; ++i) {
                bool bit = (v >> i) & 1;
                pi.set(c.primary_inputs[i], bit);
                assumptions.push_back(Lit(vm.var_of(c.primary_inputs[i], CopyTag::Shared), !bit));
            }
            SolverOutcome out = solve(f, assumptions);
            REQUIRE(out.sat());
            BitAssignment y = simulate(c, pi, {});
            for (NetId o : c.outputs)
                CHECK(out.model.get(vm.var_of(o, CopyTag::Shared)) == y.get(o));
        }
    }
}

TEST_CASE("miter is satisfiable exactly when two keys disagree somewhere") {
    Circuit locked = gen_and_tree(3, true);  // XOR leaf keys: all keys distinguishable
    Miter m = build_miter(locked);
    SolverOutcome out = solve(m.cnf);
    REQUIRE(out.sat());
    // The model's two keys must disagree on the circuit output for the DIP.
    BitAssignment pi, k1, k2;
    for (NetId n : locked.primary_inputs)
        pi.set(n, out.model.get(m.vm.var_of(n, CopyTag::Shared)));
    for (NetId n : locked.key_inputs) {
        k1.set(n, out.model.get(m.vm.var_of(n, CopyTag::Copy1)));
        k2.set(n, out.model.get(m.vm.var_of(n, CopyTag::Copy2)));
    }
    CHECK(simulate(locked, pi, k1).get(locked.outputs[0]) !=
          simulate(locked, pi, k2).get(locked.outputs[0]));
}

TEST_CASE("miter of a keyless circuit is unsatisfiable") {
    Circuit c = gen_multiplier(2, 2);
    Miter m = build_miter(c);
    CHECK(solve(m.cnf).unsat());
}

TEST_CASE("dip blocks grow the formula and preserve key symmetry") {
    Circuit locked = gen_and_tree(3, true);
    Miter m = build_miter(locked);
    Cnf f = m.cnf;
    int vars_before = f.num_vars;
    BitAssignment dip, y;
    for (NetId n : locked.primary_inputs) dip.set(n, true);
    BitAssignment key0;
    for (NetId n : locked.key_inputs) key0.set(n, false);
    y = simulate(locked, dip, key0);
    Cnf g = add_dip_block(f, m, locked, dip, y);
    CHECK(g.num_vars > vars_before);
    CHECK(g.num_clauses() > f.num_clauses());
    // After blocking, any satisfying model's K1 and K2 both reproduce y on the DIP.
    SolverOutcome out = solve(g);
    if (out.sat()) {
        for (CopyTag tag : {CopyTag::Copy1, CopyTag::Copy2}) {
            BitAssignment k;
            for (NetId n : locked.key_inputs) k.set(n, out.model.get(m.vm.var_of(n, tag)));
            BitAssignment yy = simulate(locked, dip, k);
            for (NetId o : locked.outputs) CHECK(yy.get(o) == y.get(o));
        }
    }
}

TEST_CASE("difference-clause removal leaves the formula satisfiable") {
    Circuit locked = gen_and_tree(2, true);
    Miter m = build_miter(locked);
    Cnf no_diff = miter_without_difference(m, m.cnf);
    CHECK(no_diff.num_clauses() == m.cnf.num_clauses() - 1);
    CHECK(solve(no_diff).sat());
}

TEST_CASE("dimacs round trip") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 25; ++t) {
        Cnf f = random_3sat(5 + (int)(rng() % 20), 3.0 + (t % 4), rng());
        std::string text = write_dimacs(f);
        Cnf g = read_dimacs(text);
        CHECK(g.num_vars == f.num_vars);
        REQUIRE(g.num_clauses() == f.num_clauses());
        for (std::size_t i = 0; i < f.clauses.size(); ++i) CHECK(g.clauses[i] == f.clauses[i]);
    }
}

TEST_CASE("dimacs parser rejects malformed input") {
    CHECK_THROWS(read_dimacs("p cnf 2\n1 0\n"));
    CHECK_THROWS(read_dimacs("p cnf 2 1\n3 0\n"));
    CHECK_THROWS(read_dimacs("p cnf 2 2\n1 0\n"));
}

TEST_CASE("random 3-SAT is well formed and seed deterministic") {
    Cnf a = random_3sat(20, 4.3, 77), b = random_3sat(20, 4.3, 77);
    CHECK(a.num_clauses() == 86);
    REQUIRE(a.num_clauses() == b.num_clauses());
    for (std::size_t i = 0; i < a.clauses.size(); ++i) {
        CHECK(a.clauses[i] == b.clauses[i]);
        REQUIRE(a.clauses[i].size() == 3);
        CHECK(a.clauses[i][0].var != a.clauses[i][1].var);
        CHECK(a.clauses[i][0].var != a.clauses[i][2].var);
        CHECK(a.clauses[i][1].var != a.clauses[i][2].var);
    }
    Cnf c = random_3sat(20, 4.3, 78);
    bool differs = false;
    for (std::size_t i = 0; i < a.clauses.size() && !differs; ++i)
        differs = !(a.clauses[i] == c.clauses[i]);
    CHECK(differs);
}

TEST_CASE("var map lookups and errors") {
    Circuit c = gen_and_tree(2, false);
    auto [f, vm] = tseitin_encode(c);
    (void)f;
    for (NetId n : c.primary_inputs) {
        CHECK(vm.bound(n, CopyTag::Shared));
        CopyTag tag;
        CHECK(vm.net_of(vm.var_of(n, CopyTag::Shared), tag) == n);
        CHECK(tag == CopyTag::Shared);
    }
    CHECK_THROWS(vm.var_of(c.primary_inputs[0], CopyTag::Copy1));
}
