#include "nngsat/structures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

namespace nngsat {

namespace {

std::string idx_name(const std::string& base, int i) { return base + std::to_string(i); }

}  // namespace

Circuit gen_multiplier(int n, int m) {
    if (n < 1 || m < 1) throw NetlistError("multiplier widths must be >= 1");
    Circuit c;
    c.name = "mult" + std::to_string(n) + "x" + std::to_string(m);

    std::vector<NetId> a(n), b(m);
    for (int i = 0; i < n; ++i) c.primary_inputs.push_back(a[i] = c.add_net(idx_name("a", i)));
    for (int j = 0; j < m; ++j) c.primary_inputs.push_back(b[j] = c.add_net(idx_name("b", j)));

    int aux = 0;
    auto fresh = [&] { return c.add_net("t" + std::to_string(aux++)); };

    // Partial products per output column, then carry-save reduction with
    // XOR/AND half/full adders (full-adder carry is ab XOR c(a^b): the two
    // terms are mutually exclusive, so no OR gate is needed).
    std::vector<std::vector<NetId>> col(n + m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            NetId pp = fresh();
            c.add_gate(GateKind::And, {a[i], b[j]}, pp);
            col[i + j].push_back(pp);
        }

    for (int k = 0; k < n + m; ++k) {
        while (col[k].size() > 1) {
            if (col[k].size() >= 3) {
                NetId x = col[k].back(); col[k].pop_back();
                NetId y = col[k].back(); col[k].pop_back();
                NetId z = col[k].back(); col[k].pop_back();
                NetId axy = fresh();
                c.add_gate(GateKind::Xor, {x, y}, axy);
                NetId sum = fresh();
                c.add_gate(GateKind::Xor, {axy, z}, sum);
                NetId t1 = fresh();
                c.add_gate(GateKind::And, {x, y}, t1);
                NetId t2 = fresh();
                c.add_gate(GateKind::And, {axy, z}, t2);
                NetId carry = fresh();
                c.add_gate(GateKind::Xor, {t1, t2}, carry);
                col[k].push_back(sum);
                col[k + 1].push_back(carry);
            } else {
                NetId x = col[k].back(); col[k].pop_back();
                NetId y = col[k].back(); col[k].pop_back();
                NetId sum = fresh();
                c.add_gate(GateKind::Xor, {x, y}, sum);
                NetId carry = fresh();
                c.add_gate(GateKind::And, {x, y}, carry);
                col[k].push_back(sum);
                col[k + 1].push_back(carry);
            }
        }
    }

    // Degenerate widths (n==1 or m==1) leave high columns empty; those bits
    // of the product are always zero, so pad them with a constant-0 net to
    // keep the contract of exactly n+m output bits.
    NetId zero = -1;
    for (int k = 0; k < n + m; ++k) {
        if (col[k].empty()) {
            if (zero == -1) {
                zero = fresh();
                c.add_gate(GateKind::Xor, {a[0], a[0]}, zero);
            }
            col[k].push_back(zero);
        }
        c.outputs.push_back(col[k][0]);
    }
    c.finalize();
    return c;
}

int crossbar_select_bits(int n) {
    int k = 0;
    while ((1 << k) < n) ++k;
    return k;
}

std::vector<bool> crossbar_select_value(int n, int src) {
    int k = crossbar_select_bits(n);
    std::vector<bool> bits(k);
    for (int j = 0; j < k; ++j) bits[j] = (src >> j) & 1;
    return bits;
}

Circuit gen_crossbar(int n, int m, bool locked) {
    if (n < 2 || m < 1) throw NetlistError("crossbar needs n >= 2, m >= 1");
    if (n > kCrossbarSizeCap || m > kCrossbarSizeCap)
        throw NetlistError("crossbar size exceeds safety cap");
    Circuit c;
    c.name = "xbar" + std::to_string(n) + "x" + std::to_string(m);

    std::vector<NetId> in(n);
    for (int i = 0; i < n; ++i) c.primary_inputs.push_back(in[i] = c.add_net(idx_name("in", i)));

    int k = crossbar_select_bits(n);
    int aux = 0;
    for (int o = 0; o < m; ++o) {
        std::vector<NetId> sel(k);
        for (int j = 0; j < k; ++j) {
            std::string sname = idx_name("keyinput", o * k + j);
            if (!locked) sname = idx_name("sel", o * k + j);
            sel[j] = c.add_net(sname);
            (locked ? c.key_inputs : c.primary_inputs).push_back(sel[j]);
        }
        // Pairing stages: select bit j picks within pairs; an odd leftover
        // passes through, so index b is routed by the binary value b.
        std::vector<NetId> cur = in;
        for (int j = 0; j < k; ++j) {
            std::vector<NetId> next;
            for (std::size_t i = 0; i + 1 < cur.size(); i += 2) {
                NetId mo = c.add_net("m" + std::to_string(o) + "_" + std::to_string(aux++));
                c.add_gate(GateKind::Mux2, {sel[j], cur[i], cur[i + 1]}, mo);
                next.push_back(mo);
            }
            if (cur.size() % 2) next.push_back(cur.back());
            cur = std::move(next);
        }
        c.outputs.push_back(cur[0]);
    }
    c.finalize();
    return c;
}

Circuit gen_lut(int n, bool locked) {
    if (n < 1) throw NetlistError("LUT needs n >= 1");
    if (n > kLutInputCap) throw NetlistError("LUT input count exceeds safety cap");
    Circuit c;
    c.name = "lut" + std::to_string(n);

    std::vector<NetId> x(n);
    for (int i = 0; i < n; ++i) c.primary_inputs.push_back(x[i] = c.add_net(idx_name("x", i)));

    int leaves = 1 << n;
    std::vector<NetId> cur(leaves);
    for (int i = 0; i < leaves; ++i) {
        std::string cname = idx_name(locked ? "keyinput" : "cfg", i);
        cur[i] = c.add_net(cname);
        (locked ? c.key_inputs : c.primary_inputs).push_back(cur[i]);
    }

    // cfg[idx] is selected for idx = sum x[i] << i; level i muxes on x[i].
    int aux = 0;
    for (int i = 0; i < n; ++i) {
        std::vector<NetId> next(cur.size() / 2);
        for (std::size_t j = 0; j < next.size(); ++j) {
            NetId mo = c.add_net("lm" + std::to_string(aux++));
            c.add_gate(GateKind::Mux2, {x[i], cur[2 * j], cur[2 * j + 1]}, mo);
            next[j] = mo;
        }
        cur = std::move(next);
    }
    c.outputs.push_back(cur[0]);
    c.finalize();
    return c;
}

Circuit gen_and_tree(int n, bool locked) {
    if (n < 2) throw NetlistError("AND-tree needs n >= 2");
    Circuit c;
    c.name = "atree" + std::to_string(n);

    std::vector<NetId> leaves(n);
    for (int i = 0; i < n; ++i) {
        NetId in = c.add_net(idx_name("in", i));
        c.primary_inputs.push_back(in);
        if (locked) {
            NetId key = c.add_net(idx_name("keyinput", i));
            c.key_inputs.push_back(key);
            NetId leaf = c.add_net(idx_name("xl", i));
            c.add_gate(GateKind::Xor, {in, key}, leaf);
            leaves[i] = leaf;
        } else {
            leaves[i] = in;
        }
    }

    int aux = 0;
    std::vector<NetId> cur = leaves;
    while (cur.size() > 1) {
        std::vector<NetId> next;
        for (std::size_t i = 0; i + 1 < cur.size(); i += 2) {
            NetId an = c.add_net("t" + std::to_string(aux++));
            c.add_gate(GateKind::And, {cur[i], cur[i + 1]}, an);
            next.push_back(an);
        }
        if (cur.size() % 2) next.push_back(cur.back());
        cur = std::move(next);
    }
    c.outputs.push_back(cur[0]);
    c.finalize();
    return c;
}

namespace {

Circuit gen_from_spec(const StructureSpec& s) {
    switch (s.kind) {
        case StructureSpec::Kind::Multiplier: return gen_multiplier(s.n, s.m);
        case StructureSpec::Kind::Crossbar: return gen_crossbar(s.n, s.m, s.locked);
        case StructureSpec::Kind::Lut: return gen_lut(s.n, s.locked);
        case StructureSpec::Kind::AndTree: return gen_and_tree(s.n, s.locked);
    }
    throw NetlistError("unknown structure kind");
}

std::vector<bool> hidden_key_for(const StructureSpec& s, std::mt19937_64& rng) {
    std::vector<bool> key;
    switch (s.kind) {
        case StructureSpec::Kind::Crossbar: {
            for (int o = 0; o < s.m; ++o) {
                std::vector<bool> sel = crossbar_select_value(s.n, o % s.n);
                key.insert(key.end(), sel.begin(), sel.end());
            }
            break;
        }
        case StructureSpec::Kind::Lut: {
            for (int i = 0; i < (1 << s.n); ++i) key.push_back(rng() & 1);
            break;
        }
        case StructureSpec::Kind::AndTree: {
            key.assign(s.n, false);
            break;
        }
        case StructureSpec::Kind::Multiplier: break;  // no key
    }
    return key;
}

}  // namespace

LockedBenchmark build_locked_benchmark(const Circuit& host, const LockRecipe& recipe,
                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    LockedBenchmark out;
    out.circuit = host;
    if (!out.circuit.finalized()) out.circuit.finalize();

    for (const StructureSpec& s : recipe.structures) {
        // Key-capable structures are always generated in keyed form; a plain
        // spec then ties the configuration nets to the same values the locked
        // variant would hide, so locked(hidden key) == plain holds exactly.
        StructureSpec gen_spec = s;
        if (s.kind != StructureSpec::Kind::Multiplier) gen_spec.locked = true;
        Circuit sub = gen_from_spec(gen_spec);

        // Seeded random distinct taps over the current host's nets.
        std::size_t want = sub.primary_inputs.size();
        std::vector<NetId> pool(out.circuit.num_nets());
        for (int i = 0; i < out.circuit.num_nets(); ++i) pool[i] = i;
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<NetId> taps(pool.begin(),
                                pool.begin() + std::min(want, pool.size()));
        // AND-tree leaves share a bounded support: with unrestricted taps the
        // set of reachable leaf patterns grows with the host's input count,
        // and a query-based attack has to enumerate that set one input at a
        // time, which makes large trees intractable to evaluate against.
        if (s.kind == StructureSpec::Kind::AndTree &&
            taps.size() > kAndTreeTapSupport) {
            for (std::size_t i = kAndTreeTapSupport; i < taps.size(); ++i)
                taps[i] = taps[rng() % kAndTreeTapSupport];
        }

        EmbedResult er =
            embed_structure(out.circuit, sub, taps, EmbedOutputMode::NewOutputs);
        out.circuit = std::move(er.circuit);

        std::vector<bool> key = hidden_key_for(s, rng);
        if (key.size() != er.sub_key_nets.size())
            throw NetlistError("hidden key width mismatch");
        if (s.locked) {
            for (std::size_t i = 0; i < key.size(); ++i)
                out.hidden_key.set(er.sub_key_nets[i], key[i]);
        } else if (!key.empty()) {
            // Demote the config nets to constants: drive each from a host net
            // XORed (or XNORed) with itself.
            NetId base = taps.at(0);
            auto& kin = out.circuit.key_inputs;
            for (NetId kn : er.sub_key_nets)
                kin.erase(std::remove(kin.begin(), kin.end(), kn), kin.end());
            for (std::size_t i = 0; i < key.size(); ++i)
                out.circuit.add_gate(key[i] ? GateKind::Xnor : GateKind::Xor, {base, base},
                                     er.sub_key_nets[i]);
            out.circuit.finalize();
        }

        std::ostringstream log;
        log << sub.name << (s.locked ? " locked" : " plain") << " keys=" << key.size();
        out.structure_log.push_back(log.str());
    }

    if (recipe.xor_key_gates > 0) {
        if (!out.circuit.finalized()) out.circuit.finalize();
        // Candidates are existing gate-output nets; PIs have no driver to
        // splice behind, and each net takes at most one key gate.
        std::vector<NetId> candidates;
        for (const Gate& g : out.circuit.gates) candidates.push_back(g.output);
        std::shuffle(candidates.begin(), candidates.end(), rng);
        int count = std::min<std::size_t>(recipe.xor_key_gates, candidates.size());
        std::vector<int> drivers(count);
        for (int i = 0; i < count; ++i) drivers[i] = out.circuit.driver_of(candidates[i]);
        int name_idx = 0;
        for (int i = 0; i < count; ++i) {
            NetId w = candidates[i];
            int gi = drivers[i];
            std::string base = out.circuit.net_name(w) + "_pre";
            std::string pre_name = base;
            for (int k = 2; out.circuit.net_by_name(pre_name) != -1; ++k)
                pre_name = base + "v" + std::to_string(k);
            NetId pre = out.circuit.add_net(pre_name);
            std::string key_name;
            do {
                key_name = recipe.key_prefix + "_kg" + std::to_string(name_idx++);
            } while (out.circuit.net_by_name(key_name) != -1);
            NetId kn = out.circuit.add_net(key_name);
            out.circuit.key_inputs.push_back(kn);
            out.circuit.gates[gi].output = pre;
            bool bit = rng() & 1;
            out.circuit.add_gate(bit ? GateKind::Xnor : GateKind::Xor, {pre, kn}, w);
            out.hidden_key.set(kn, bit);
        }
        out.circuit.finalize();
        std::ostringstream log;
        log << "xor key gates keys=" << count;
        out.structure_log.push_back(log.str());
    }
    return out;
}

std::string lock_recipe_to_json(const LockRecipe& r, std::uint64_t seed) {
    nlohmann::json j;
    j["key_prefix"] = r.key_prefix;
    j["xor_key_gates"] = r.xor_key_gates;
    j["seed"] = seed;
    j["structures"] = nlohmann::json::array();
    for (const StructureSpec& s : r.structures) {
        nlohmann::json js;
        js["kind"] = s.kind == StructureSpec::Kind::Multiplier ? "multiplier"
                     : s.kind == StructureSpec::Kind::Crossbar ? "crossbar"
                     : s.kind == StructureSpec::Kind::Lut      ? "lut"
                                                               : "and_tree";
        js["n"] = s.n;
        js["m"] = s.m;
        js["locked"] = s.locked;
        js["label"] = s.instance_label;
        j["structures"].push_back(js);
    }
    return j.dump(2);
}

LockRecipe lock_recipe_from_json(const std::string& text, std::uint64_t* seed_out) {
    nlohmann::json j = nlohmann::json::parse(text);
    LockRecipe r;
    r.key_prefix = j.value("key_prefix", std::string("keyinput"));
    r.xor_key_gates = j.value("xor_key_gates", 0);
    if (seed_out) *seed_out = j.value("seed", 0ull);
    for (const auto& js : j.value("structures", nlohmann::json::array())) {
        StructureSpec s;
        std::string kind = js.at("kind");
        if (kind == "multiplier") s.kind = StructureSpec::Kind::Multiplier;
        else if (kind == "crossbar") s.kind = StructureSpec::Kind::Crossbar;
        else if (kind == "lut") s.kind = StructureSpec::Kind::Lut;
        else if (kind == "and_tree") s.kind = StructureSpec::Kind::AndTree;
        else throw NetlistError("unknown structure kind '" + kind + "'");
        s.n = js.at("n");
        s.m = js.value("m", 0);
        s.locked = js.value("locked", false);
        s.instance_label = js.value("label", std::string());
        r.structures.push_back(s);
    }
    return r;
}

}  // namespace nngsat
