#include <doctest.h>

#include <random>

#include "nngsat/netlist.hpp"
#include "nngsat/structures.hpp"

using namespace nngsat;

static Circuit tiny_and() {
    Circuit c;
    c.name = "tiny";
    NetId a = c.add_net("a"), b = c.add_net("b"), y = c.add_net("y");
    c.primary_inputs = {a, b};
    c.add_gate(GateKind::And, {a, b}, y);
    c.outputs = {y};
    c.finalize();
    return c;
}

TEST_CASE("bench parse counts inputs, outputs, keys") {
    const char* text =
        "# comment\n"
        "INPUT(a)\nINPUT(b)\nINPUT(keyinput0)\n"
        "OUTPUT(y)\n"
        "t = XOR(a, keyinput0)\n"
        "y = AND(t, b)\n";
    Circuit c = parse_bench(text);
    CHECK(c.primary_inputs.size() == 2);
    CHECK(c.key_inputs.size() == 1);
    CHECK(c.outputs.size() == 1);
    CHECK(c.gates.size() == 2);
}

TEST_CASE("parse tolerates forward references and case-insensitive kinds") {
    const char* text =
        "INPUT(a)\nOUTPUT(y)\n"
        "y = not(t)\n"
        "t = buf(a)\n";
    Circuit c = parse_bench(text);
    BitAssignment pi;
    pi.set(c.net_by_name("a"), true);
    CHECK(simulate(c, pi, {}).get(c.net_by_name("y")) == false);
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_AS(parse_bench("INPUT(a)\nOUTPUT(y)\ny = FROB(a)\n"), BenchParseError);
    try {
        parse_bench("INPUT(a)\nOUTPUT(y)\ny = FROB(a)\n");
    } catch (const BenchParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("serialize-parse is a fixed point") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Circuit host = gen_multiplier(2 + (int)(rng() % 3), 2 + (int)(rng() % 3));
        std::string once = write_bench(host);
        Circuit back = parse_bench(once);
        CHECK(write_bench(back) == once);
        CHECK(back.gates.size() == host.gates.size());
    }
}

TEST_CASE("gate simulation truth tables") {
    Circuit c;
    NetId a = c.add_net("a"), b = c.add_net("b"), s = c.add_net("s");
    c.primary_inputs = {a, b, s};
    NetId gates[7];
    GateKind kinds[] = {GateKind::And,  GateKind::Nand, GateKind::Or,  GateKind::Nor,
                        GateKind::Xor,  GateKind::Xnor, GateKind::Mux2};
    for (int i = 0; i < 7; ++i) {
        gates[i] = c.add_net("g" + std::to_string(i));
        if (kinds[i] == GateKind::Mux2)
            c.add_gate(kinds[i], {s, a, b}, gates[i]);
        else
            c.add_gate(kinds[i], {a, b}, gates[i]);
        c.outputs.push_back(gates[i]);
    }
    c.finalize();
    for (int v = 0; v < 8; ++v) {
        bool av = v & 1, bv = v & 2, sv = v & 4;
        BitAssignment pi;
        pi.set(a, av);
        pi.set(b, bv);
        pi.set(s, sv);
        BitAssignment out = simulate(c, pi, {});
        CHECK(out.get(gates[0]) == (av && bv));
        CHECK(out.get(gates[1]) == !(av && bv));
        CHECK(out.get(gates[2]) == (av || bv));
        CHECK(out.get(gates[3]) == !(av || bv));
        CHECK(out.get(gates[4]) == (av != bv));
        CHECK(out.get(gates[5]) == (av == bv));
        CHECK(out.get(gates[6]) == (sv ? bv : av));
    }
}

TEST_CASE("finalize rejects combinational cycles and double drivers") {
    Circuit c;
    NetId a = c.add_net("a"), x = c.add_net("x"), y = c.add_net("y");
    c.primary_inputs = {a};
    c.add_gate(GateKind::And, {a, y}, x);
    c.add_gate(GateKind::And, {a, x}, y);
    c.outputs = {y};
    CHECK_THROWS_AS(c.finalize(), NetlistError);

    Circuit d;
    NetId p = d.add_net("p"), q = d.add_net("q");
    d.primary_inputs = {p};
    d.add_gate(GateKind::Buf, {p}, q);
    CHECK_THROWS_AS(d.add_gate(GateKind::Not, {p}, q), NetlistError);
}

TEST_CASE("embed with new outputs keeps host function intact") {
    Circuit host = tiny_and();
    Circuit sub = gen_and_tree(4, false);
    std::vector<NetId> taps = {host.primary_inputs[0], host.primary_inputs[1],
                               host.primary_inputs[0], host.outputs[0]};
    EmbedResult er = embed_structure(host, sub, taps, EmbedOutputMode::NewOutputs);
    er.circuit.finalize();
    CHECK(er.circuit.outputs.size() == host.outputs.size() + sub.outputs.size());
    // The original output is still the AND of the two inputs.
    for (int v = 0; v < 4; ++v) {
        BitAssignment pi;
        pi.set(er.circuit.primary_inputs[0], v & 1);
        pi.set(er.circuit.primary_inputs[1], v & 2);
        CHECK(simulate(er.circuit, pi, {}).get(host.outputs[0]) ==
              ((v & 1) && (v & 2)));
    }
}

TEST_CASE("embedded key inputs keep the key prefix and are tracked") {
    Circuit host = tiny_and();
    Circuit sub = gen_and_tree(2, true);  // XOR leaf keys
    EmbedResult er =
        embed_structure(host, sub, {host.primary_inputs[0], host.primary_inputs[1]},
                        EmbedOutputMode::NewOutputs);
    er.circuit.finalize();
    CHECK(er.sub_key_nets.size() == 2);
    for (NetId k : er.sub_key_nets) {
        CHECK(er.circuit.net_name(k).rfind("keyinput", 0) == 0);
    }
    std::string round = write_bench(er.circuit);
    Circuit back = parse_bench(round);
    CHECK(back.key_inputs.size() == 2);
}
