// Generators for the four complex-structure families and their
// key-programmable (locked) variants; locked-benchmark builder.
#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nngsat/netlist.hpp"

namespace nngsat {

struct StructureSpec {
    enum class Kind { Multiplier, Crossbar, Lut, AndTree };
    Kind kind = Kind::AndTree;
    int n = 2;
    int m = 0;  // multiplier/crossbar only
    bool locked = false;
    std::string instance_label;
};

struct LockRecipe {
    std::vector<StructureSpec> structures;  // locked ones contribute key bits
    // Classic key-gate locking: this many XOR/XNOR gates spliced onto
    // distinct gate-output nets, one key bit each (random hidden bit; the
    // gate is XNOR where the hidden bit is 1, so the key passes the signal).
    int xor_key_gates = 0;
    std::string key_prefix = "keyinput";
};

// Safety caps against accidental exponential generation.
inline constexpr int kLutInputCap = 16;
inline constexpr int kCrossbarSizeCap = 64;

// Distinct host nets feeding an embedded AND-tree's leaves; extra leaves
// reuse nets from this pool (see build_locked_benchmark).
inline constexpr std::size_t kAndTreeTapSupport = 6;

// Array multiplier from AND partial products and XOR/AND ripple adders;
// n+m output bits equal to unsigned a*b.
Circuit gen_multiplier(int n, int m);

// Per-output binary selector trees of 2-to-1 MUXes: m outputs, each an n-to-1
// selector with ceil(log2 n) select lines (key inputs when locked).
Circuit gen_crossbar(int n, int m, bool locked);

// Complete MUX2 tree of depth n with 2^n configuration leaves.
Circuit gen_lut(int n, bool locked);

// Balanced binary AND tree; locked form XORs each leaf with its own key bit
// (all-zero key preserves the conjunction).
Circuit gen_and_tree(int n, bool locked);

int crossbar_select_bits(int n);  // ceil(log2 n)

// The select value routing input `src` to an output of an n-way selector.
std::vector<bool> crossbar_select_value(int n, int src);

struct LockedBenchmark {
    Circuit circuit;
    BitAssignment hidden_key;            // over the locked circuit's key nets
    std::vector<std::string> structure_log;
};

// Embeds each recipe structure into the host with seeded random taps. Locked
// structures bring key inputs; the returned hidden key makes the result
// functionally equivalent to the host extended by the plain structures.
// Hidden keys: crossbar = identity routing, LUT = seeded random table,
// AND-tree = all zeros, multiplier has no key.
LockedBenchmark build_locked_benchmark(const Circuit& host, const LockRecipe& recipe,
                                       std::uint64_t seed);

std::string lock_recipe_to_json(const LockRecipe& r, std::uint64_t seed);
LockRecipe lock_recipe_from_json(const std::string& text, std::uint64_t* seed_out = nullptr);

}  // namespace nngsat
