#include "nngsat/cnf.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace nngsat {

void Cnf::add_clause(Clause cl) {
    if (cl.empty()) throw CnfError("empty clause at construction");
    for (const Lit& l : cl)
        if (l.var < 1 || l.var > num_vars) throw CnfError("literal out of range");
    clauses.push_back(std::move(cl));
}

void VarMap::bind(NetId net, CopyTag tag, int var) {
    fwd_[key(net, tag)] = var;
    rev_[var] = key(net, tag);
}

int VarMap::var_of(NetId net, CopyTag tag) const {
    auto it = fwd_.find(key(net, tag));
    if (it == fwd_.end()) throw CnfError("net " + std::to_string(net) + " unbound in VarMap");
    return it->second;
}

bool VarMap::bound(NetId net, CopyTag tag) const { return fwd_.count(key(net, tag)) != 0; }

NetId VarMap::net_of(int var, CopyTag& tag_out) const {
    auto it = rev_.find(var);
    if (it == rev_.end()) return -1;
    tag_out = (CopyTag)(it->second & 3);
    return (NetId)(it->second >> 2);
}

std::string VarMap::to_json(const Circuit& c) const {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [k, var] : fwd_) {
        NetId net = (NetId)(k >> 2);
        CopyTag tag = (CopyTag)(k & 3);
        const char* tname = tag == CopyTag::Shared ? "shared" : tag == CopyTag::Copy1 ? "copy1" : "copy2";
        if (!first) os << ",";
        first = false;
        os << "\"" << c.net_name(net) << "/" << tname << "\":" << var;
    }
    os << "}";
    return os.str();
}

namespace {

// out <-> AND(a, b)
void and2_clauses(Cnf& f, int out, Lit a, Lit b) {
    f.add_clause({Lit(out, true), a});
    f.add_clause({Lit(out, true), b});
    f.add_clause({Lit(out, false), ~a, ~b});
}

void or2_clauses(Cnf& f, int out, Lit a, Lit b) {
    f.add_clause({Lit(out, false), ~a});
    f.add_clause({Lit(out, false), ~b});
    f.add_clause({Lit(out, true), a, b});
}

void xor2_clauses(Cnf& f, int out, Lit a, Lit b) {
    f.add_clause({Lit(out, true), a, b});
    f.add_clause({Lit(out, true), ~a, ~b});
    f.add_clause({Lit(out, false), ~a, b});
    f.add_clause({Lit(out, false), a, ~b});
}

void eq_clauses(Cnf& f, int out, Lit a) {
    f.add_clause({Lit(out, true), a});
    f.add_clause({Lit(out, false), ~a});
}

void mux_clauses(Cnf& f, int out, Lit s, Lit a, Lit b) {
    // out = s ? b : a
    f.add_clause({s, ~a, Lit(out, false)});
    f.add_clause({s, a, Lit(out, true)});
    f.add_clause({~s, ~b, Lit(out, false)});
    f.add_clause({~s, b, Lit(out, true)});
}

// Encodes one gate whose input literals are already known; allocates
// auxiliaries for n-ary decomposition. `out` is the gate's output variable.
void encode_gate(Cnf& f, const Gate& g, const std::vector<Lit>& ins, int out) {
    auto chain = [&](bool is_or, bool invert) {
        Lit acc = ins[0];
        for (std::size_t i = 1; i < ins.size(); ++i) {
            int t = (i + 1 == ins.size() && !invert) ? out : f.new_var();
            if (is_or)
                or2_clauses(f, t, acc, ins[i]);
            else
                and2_clauses(f, t, acc, ins[i]);
            acc = Lit(t, false);
        }
        if (invert) eq_clauses(f, out, ~acc);
    };
    auto xchain = [&](bool invert) {
        Lit acc = ins[0];
        for (std::size_t i = 1; i < ins.size(); ++i) {
            int t = (i + 1 == ins.size() && !invert) ? out : f.new_var();
            xor2_clauses(f, t, acc, ins[i]);
            acc = Lit(t, false);
        }
        if (invert) eq_clauses(f, out, ~acc);
    };
    switch (g.kind) {
        case GateKind::And: chain(false, false); break;
        case GateKind::Nand: chain(false, true); break;
        case GateKind::Or: chain(true, false); break;
        case GateKind::Nor: chain(true, true); break;
        case GateKind::Xor: xchain(false); break;
        case GateKind::Xnor: xchain(true); break;
        case GateKind::Not: eq_clauses(f, out, ~ins[0]); break;
        case GateKind::Buf: eq_clauses(f, out, ins[0]); break;
        case GateKind::Mux2: mux_clauses(f, out, ins[0], ins[1], ins[2]); break;
    }
}

// Encodes a full circuit copy. `var_of_net` supplies the variable for nets
// that must reuse existing variables (shared X, keys); others get fresh vars.
// When `fixed` has a value for a net, the net variable is constrained to it.
struct CopyEncoder {
    Cnf& f;
    const Circuit& c;
    std::vector<int> net_var;

    CopyEncoder(Cnf& f_, const Circuit& c_) : f(f_), c(c_), net_var(c_.num_nets(), 0) {}

    int var(NetId n) {
        if (net_var[n] == 0) net_var[n] = f.new_var();
        return net_var[n];
    }

    void encode() {
        for (int gi : c.topo_order()) {
            const Gate& g = c.gates[gi];
            std::vector<Lit> ins;
            ins.reserve(g.inputs.size());
            for (NetId in : g.inputs) ins.emplace_back(var(in), false);
            encode_gate(f, g, ins, var(g.output));
        }
    }
};

}  // namespace

std::pair<Cnf, VarMap> tseitin_encode(const Circuit& c) {
    if (!c.finalized()) throw CnfError("circuit not finalized");
    Cnf f;
    VarMap vm;
    CopyEncoder enc(f, c);
    // Allocate net variables in net order so models are easy to project.
    for (NetId n = 0; n < c.num_nets(); ++n) vm.bind(n, CopyTag::Shared, enc.var(n));
    enc.encode();
    return {std::move(f), std::move(vm)};
}

Miter build_miter(const Circuit& locked) {
    if (!locked.finalized()) throw CnfError("circuit not finalized");

    Miter m;
    Cnf& f = m.cnf;

    CopyEncoder c1(f, locked), c2(f, locked);
    for (NetId x : locked.primary_inputs) {
        int v = f.new_var();
        c1.net_var[x] = v;
        c2.net_var[x] = v;
        m.vm.bind(x, CopyTag::Shared, v);
    }
    for (NetId k : locked.key_inputs) {
        m.vm.bind(k, CopyTag::Copy1, c1.var(k));
        m.vm.bind(k, CopyTag::Copy2, c2.var(k));
    }
    c1.encode();
    c2.encode();
    for (NetId y : locked.outputs) {
        m.vm.bind(y, CopyTag::Copy1, c1.var(y));
        m.vm.bind(y, CopyTag::Copy2, c2.var(y));
    }

    for (NetId y : locked.outputs) {
        int d = f.new_var();
        xor2_clauses(f, d, Lit(c1.var(y), false), Lit(c2.var(y), false));
        m.diff_vars.push_back(d);
        m.diff_clause.push_back(Lit(d, false));
    }
    f.add_clause(m.diff_clause);
    m.num_base_vars = f.num_vars;
    return m;
}

Cnf miter_without_difference(const Miter& m, const Cnf& grown) {
    Cnf f;
    f.num_vars = grown.num_vars;
    for (const Clause& cl : grown.clauses)
        if (cl != m.diff_clause) f.clauses.push_back(cl);
    return f;
}

Cnf add_dip_block(const Cnf& f, const Miter& m, const Circuit& locked, const BitAssignment& dip,
                  const BitAssignment& y) {
    Cnf g = f;
    for (CopyTag tag : {CopyTag::Copy1, CopyTag::Copy2}) {
        CopyEncoder enc(g, locked);
        for (NetId k : locked.key_inputs) enc.net_var[k] = m.vm.var_of(k, tag);
        for (NetId x : locked.primary_inputs)
            g.add_clause({Lit(enc.var(x), !dip.get(x))});
        enc.encode();
        for (NetId out : locked.outputs)
            g.add_clause({Lit(enc.var(out), !y.get(out))});
    }
    return g;
}

std::string write_dimacs(const Cnf& f) {
    std::ostringstream os;
    os << "p cnf " << f.num_vars << " " << f.clauses.size() << "\n";
    for (const Clause& cl : f.clauses) {
        for (const Lit& l : cl) os << l.dimacs() << " ";
        os << "0\n";
    }
    return os.str();
}

Cnf read_dimacs(const std::string& text) {
    std::istringstream ss(text);
    std::string tok;
    Cnf f;
    long declared_clauses = -1;
    bool have_header = false;
    Clause cur;
    while (ss >> tok) {
        if (tok == "c") {
            std::string rest;
            std::getline(ss, rest);
            continue;
        }
        if (tok == "p") {
            std::string fmt;
            if (!(ss >> fmt >> f.num_vars >> declared_clauses) || fmt != "cnf")
                throw CnfError("malformed DIMACS header");
            if (f.num_vars < 0 || declared_clauses < 0) throw CnfError("malformed DIMACS header");
            have_header = true;
            continue;
        }
        if (!have_header) throw CnfError("literal before DIMACS header");
        int v;
        try {
            v = std::stoi(tok);
        } catch (...) {
            throw CnfError("bad DIMACS token '" + tok + "'");
        }
        if (v == 0) {
            f.add_clause(cur);
            cur.clear();
        } else {
            if (std::abs(v) > f.num_vars)
                throw CnfError("literal " + tok + " out of declared range");
            cur.push_back(Lit(v));
        }
    }
    if (!have_header) throw CnfError("missing DIMACS header");
    if (!cur.empty()) throw CnfError("unterminated clause");
    if (declared_clauses >= 0 && (long)f.clauses.size() != declared_clauses)
        throw CnfError("clause count mismatch with header");
    return f;
}

Cnf random_3sat(int n, double ratio, std::uint64_t seed) {
    if (n < 3) throw CnfError("random_3sat needs n >= 3");
    Cnf f;
    f.num_vars = n;
    int m = (int)(ratio * n);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> var_dist(1, n);
    std::uniform_int_distribution<int> sign_dist(0, 1);

    auto draw_clause = [&]() {
        int a = var_dist(rng), b, c;
        do { b = var_dist(rng); } while (b == a);
        do { c = var_dist(rng); } while (c == a || c == b);
        Clause cl = {Lit(a, sign_dist(rng)), Lit(b, sign_dist(rng)), Lit(c, sign_dist(rng))};
        return cl;
    };

    auto key_of = [](const Clause& cl) {
        std::vector<int> v = {cl[0].dimacs(), cl[1].dimacs(), cl[2].dimacs()};
        std::sort(v.begin(), v.end());
        return std::to_string(v[0]) + "," + std::to_string(v[1]) + "," + std::to_string(v[2]);
    };

    std::unordered_map<std::string, char> seen;
    for (int i = 0; i < m; ++i) {
        Clause cl = draw_clause();
        // bounded retry against duplicate clauses; give up and keep it
        for (int tries = 0; tries < 16 && seen.count(key_of(cl)); ++tries) cl = draw_clause();
        seen[key_of(cl)] = 1;
        f.add_clause(std::move(cl));
    }
    return f;
}

}  // namespace nngsat
