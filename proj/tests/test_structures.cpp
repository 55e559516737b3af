#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "nngsat/structures.hpp"

using namespace nngsat;

static std::uint64_t eval_multiplier(const Circuit& c, std::uint64_t a, std::uint64_t b, int n,
                                     int m) {
    BitAssignment pi;
    for (int i = 0; i < n + m; ++i)
        pi.set(c.primary_inputs[i], i < n ? ((a >> i) & 1) : ((b >> (i - n)) & 1));
    BitAssignment out = simulate(c, pi, {});
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < c.outputs.size(); ++i)
        if (out.get(c.outputs[i])) v |= 1ULL << i;
    return v;
}

TEST_CASE("multiplier matches integer products exhaustively") {
    for (int n = 1; n <= 4; ++n)
        for (int m = 1; m <= 4; ++m) {
            Circuit c = gen_multiplier(n, m);
            for (std::uint64_t a = 0; a < (1ULL << n); ++a)
                for (std::uint64_t b = 0; b < (1ULL << m); ++b)
                    CHECK(eval_multiplier(c, a, b, n, m) == a * b);
        }
}

TEST_CASE("multiplier partial-product AND count is n*m") {
    Circuit c = gen_multiplier(3, 4);
    int pp = 0;
    auto is_pi = [&](NetId n) {
        for (NetId p : c.primary_inputs)
            if (p == n) return true;
        return false;
    };
    for (const Gate& g : c.gates)
        if (g.kind == GateKind::And && is_pi(g.inputs[0]) && is_pi(g.inputs[1])) ++pp;
    CHECK(pp == 12);
}

TEST_CASE("locked crossbar routes the selected input") {
    int n = 4, m = 4;
    Circuit c = gen_crossbar(n, m, true);
    CHECK((int)c.key_inputs.size() == m * crossbar_select_bits(n));
    for (int o = 0; o < m; ++o)
        for (int src = 0; src < n; ++src) {
            BitAssignment key;
            // Route src to output o; other outputs select input 0.
            for (int oo = 0; oo < m; ++oo) {
                auto sel = crossbar_select_value(n, oo == o ? src : 0);
                for (int j = 0; j < crossbar_select_bits(n); ++j)
                    key.set(c.key_inputs[oo * crossbar_select_bits(n) + j], sel[j]);
            }
            for (int v = 0; v < (1 << n); ++v) {
                BitAssignment pi;
                for (int i = 0; i < n; ++i) pi.set(c.primary_inputs[i], (v >> i) & 1);
                CHECK(simulate(c, pi, key).get(c.outputs[o]) == (bool)((v >> src) & 1));
            }
        }
}

TEST_CASE("locked LUT computes the configured truth table") {
    std::mt19937_64 rng(11);
    for (int n = 2; n <= 4; ++n) {
        Circuit c = gen_lut(n, true);
        CHECK((int)c.key_inputs.size() == (1 << n));
        std::vector<bool> table(1 << n);
        BitAssignment key;
        for (int i = 0; i < (1 << n); ++i) {
            table[i] = rng() & 1;
            key.set(c.key_inputs[i], table[i]);
        }
        for (int v = 0; v < (1 << n); ++v) {
            BitAssignment pi;
            for (int i = 0; i < n; ++i) pi.set(c.primary_inputs[i], (v >> i) & 1);
            CHECK(simulate(c, pi, key).get(c.outputs[0]) == table[v]);
        }
    }
}

TEST_CASE("AND tree with all-zero key equals plain conjunction") {
    Circuit plain = gen_and_tree(8, false), locked = gen_and_tree(8, true);
    CHECK(locked.key_inputs.size() == 8);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        BitAssignment pi, pj, key;
        std::uint32_t v = (std::uint32_t)rng();
        for (int i = 0; i < 8; ++i) {
            pi.set(plain.primary_inputs[i], (v >> i) & 1);
            pj.set(locked.primary_inputs[i], (v >> i) & 1);
        }
        for (NetId k : locked.key_inputs) key.set(k, false);
        CHECK(simulate(plain, pi, {}).get(plain.outputs[0]) ==
              simulate(locked, pj, key).get(locked.outputs[0]));
    }
}

TEST_CASE("size caps are enforced") {
    CHECK_THROWS(gen_lut(kLutInputCap + 1, false));
    CHECK_THROWS(gen_crossbar(kCrossbarSizeCap + 1, 2, false));
}

TEST_CASE("locked benchmark under its hidden key matches unlocked embedding") {
    Circuit host = gen_multiplier(3, 3);
    LockRecipe recipe;
    recipe.structures.push_back({StructureSpec::Kind::Crossbar, 4, 2, true, "xb"});
    recipe.structures.push_back({StructureSpec::Kind::AndTree, 4, 0, true, "at"});
    LockedBenchmark lb = build_locked_benchmark(host, recipe, 99);
    CHECK(lb.circuit.key_inputs.size() == 2 * 2 + 4);

    LockRecipe plain = recipe;
    for (auto& s : plain.structures) s.locked = false;
    LockedBenchmark ref = build_locked_benchmark(host, plain, 99);
    CHECK(ref.circuit.key_inputs.empty());
    REQUIRE(ref.circuit.outputs.size() == lb.circuit.outputs.size());
    REQUIRE(ref.circuit.primary_inputs.size() == lb.circuit.primary_inputs.size());

    std::mt19937_64 rng(17);
    for (int t = 0; t < 200; ++t) {
        BitAssignment pa, pb;
        for (std::size_t i = 0; i < lb.circuit.primary_inputs.size(); ++i) {
            bool bit = rng() & 1;
            pa.set(lb.circuit.primary_inputs[i], bit);
            pb.set(ref.circuit.primary_inputs[i], bit);
        }
        BitAssignment ya = simulate(lb.circuit, pa, lb.hidden_key);
        BitAssignment yb = simulate(ref.circuit, pb, {});
        for (std::size_t i = 0; i < lb.circuit.outputs.size(); ++i)
            CHECK(ya.get(lb.circuit.outputs[i]) == yb.get(ref.circuit.outputs[i]));
    }
}

TEST_CASE("crossbar 4x4 permutation completeness") {
    Circuit c = gen_crossbar(4, 4, true);
    int perm[4] = {0, 1, 2, 3};
    std::set<std::uint64_t> seen;
    do {
        BitAssignment key;
        for (int o = 0; o < 4; ++o) {
            auto sel = crossbar_select_value(4, perm[o]);
            for (int j = 0; j < 2; ++j) key.set(c.key_inputs[o * 2 + j], sel[j]);
        }
        std::uint64_t fingerprint = 0;
        for (int v = 0; v < 16; ++v) {
            BitAssignment pi;
            for (int i = 0; i < 4; ++i) pi.set(c.primary_inputs[i], (v >> i) & 1);
            BitAssignment y = simulate(c, pi, key);
            for (int o = 0; o < 4; ++o) {
                CHECK(y.get(c.outputs[o]) == (bool)((v >> perm[o]) & 1));
                fingerprint = fingerprint << 1 | (y.get(c.outputs[o]) ? 1 : 0);
            }
        }
        seen.insert(fingerprint);
    } while (std::next_permutation(perm, perm + 4));
    CHECK(seen.size() == 24);
}

TEST_CASE("lock recipe JSON round trip") {
    LockRecipe r;
    r.structures.push_back({StructureSpec::Kind::Lut, 3, 0, true, "lut_a"});
    r.structures.push_back({StructureSpec::Kind::Multiplier, 4, 5, false, "mul_b"});
    std::string j = lock_recipe_to_json(r, 1234);
    std::uint64_t seed = 0;
    LockRecipe back = lock_recipe_from_json(j, &seed);
    CHECK(seed == 1234);
    REQUIRE(back.structures.size() == 2);
    CHECK(back.structures[0].kind == StructureSpec::Kind::Lut);
    CHECK(back.structures[0].locked);
    CHECK(back.structures[1].m == 5);
    CHECK(back.key_prefix == r.key_prefix);
}
