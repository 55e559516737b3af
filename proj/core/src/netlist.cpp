#include "nngsat/netlist.hpp"

#include <algorithm>
#include <queue>

namespace nngsat {

const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::And: return "AND";
        case GateKind::Nand: return "NAND";
        case GateKind::Or: return "OR";
        case GateKind::Nor: return "NOR";
        case GateKind::Xor: return "XOR";
        case GateKind::Xnor: return "XNOR";
        case GateKind::Not: return "NOT";
        case GateKind::Buf: return "BUF";
        case GateKind::Mux2: return "MUX";
    }
    return "?";
}

bool BitAssignment::get(int id) const {
    auto it = bits_.find(id);
    if (it == bits_.end())
        throw NetlistError("assignment missing id " + std::to_string(id));
    return it->second;
}

NetId Circuit::add_net(const std::string& net_name) {
    auto it = name_index_.find(net_name);
    if (it != name_index_.end()) return it->second;
    NetId id = static_cast<NetId>(net_names_.size());
    net_names_.push_back(net_name);
    name_index_.emplace(net_name, id);
    finalized_ = false;
    return id;
}

NetId Circuit::net_by_name(const std::string& net_name) const {
    auto it = name_index_.find(net_name);
    return it == name_index_.end() ? -1 : it->second;
}

void Circuit::add_gate(GateKind kind, std::vector<NetId> inputs, NetId output) {
    for (const Gate& ex : gates)
        if (ex.output == output)
            throw NetlistError("net '" + net_name(output) + "' has two drivers");
    Gate g;
    g.id = static_cast<int>(gates.size());
    g.kind = kind;
    g.inputs = std::move(inputs);
    g.output = output;
    gates.push_back(std::move(g));
    finalized_ = false;
}

static void check_arity(const Gate& g) {
    std::size_t n = g.inputs.size();
    switch (g.kind) {
        case GateKind::Not:
        case GateKind::Buf:
            if (n != 1)
                throw NetlistError(std::string(gate_kind_name(g.kind)) + " gate needs 1 input");
            break;
        case GateKind::Mux2:
            if (n != 3) throw NetlistError("MUX gate needs 3 inputs (select, in0, in1)");
            break;
        default:
            if (n < 2)
                throw NetlistError(std::string(gate_kind_name(g.kind)) + " gate needs >=2 inputs");
    }
}

void Circuit::finalize() {
    int nn = num_nets();
    driver_.assign(nn, -1);

    std::vector<char> is_in(nn, 0);
    for (NetId n : primary_inputs) is_in[n] = 1;
    for (NetId n : key_inputs) {
        if (is_in[n])
            throw NetlistError("net '" + net_name(n) + "' is both a primary and a key input");
        is_in[n] = 1;
    }

    for (const Gate& g : gates) {
        check_arity(g);
        if (g.output < 0 || g.output >= nn) throw NetlistError("gate output net out of range");
        if (is_in[g.output])
            throw NetlistError("input net '" + net_name(g.output) + "' is driven by a gate");
        if (driver_[g.output] != -1)
            throw NetlistError("net '" + net_name(g.output) + "' has two drivers");
        driver_[g.output] = g.id;
        for (NetId in : g.inputs)
            if (in < 0 || in >= nn) throw NetlistError("gate input net out of range");
    }

    for (NetId n = 0; n < nn; ++n)
        if (driver_[n] == -1 && !is_in[n])
            throw NetlistError("net '" + net_name(n) + "' is undriven");
    for (NetId n : outputs)
        if (n < 0 || n >= nn) throw NetlistError("output net out of range");

    // Kahn topological sort over gates; leftovers mean a combinational cycle.
    std::vector<int> indeg(gates.size(), 0);
    std::vector<std::vector<int>> consumers(nn);
    for (const Gate& g : gates)
        for (NetId in : g.inputs) consumers[in].push_back(g.id);
    for (const Gate& g : gates)
        for (NetId in : g.inputs)
            if (driver_[in] != -1) indeg[g.id]++;

    std::queue<int> q;
    for (const Gate& g : gates)
        if (indeg[g.id] == 0) q.push(g.id);
    topo_order_.clear();
    topo_order_.reserve(gates.size());
    while (!q.empty()) {
        int gi = q.front();
        q.pop();
        topo_order_.push_back(gi);
        for (int ci : consumers[gates[gi].output])
            if (--indeg[ci] == 0) q.push(ci);
    }
    if (topo_order_.size() != gates.size()) throw NetlistError("combinational cycle detected");
    finalized_ = true;
}

int Circuit::driver_of(NetId n) const {
    if (!finalized_) throw NetlistError("circuit not finalized");
    return driver_.at(n);
}

bool Circuit::is_input(NetId n) const {
    return std::find(primary_inputs.begin(), primary_inputs.end(), n) != primary_inputs.end() ||
           std::find(key_inputs.begin(), key_inputs.end(), n) != key_inputs.end();
}

static bool eval_gate(const Gate& g, const std::vector<char>& v) {
    switch (g.kind) {
        case GateKind::Not: return !v[g.inputs[0]];
        case GateKind::Buf: return v[g.inputs[0]];
        case GateKind::Mux2: return v[g.inputs[0]] ? v[g.inputs[2]] : v[g.inputs[1]];
        case GateKind::And:
        case GateKind::Nand: {
            bool r = true;
            for (NetId in : g.inputs) r = r && v[in];
            return g.kind == GateKind::And ? r : !r;
        }
        case GateKind::Or:
        case GateKind::Nor: {
            bool r = false;
            for (NetId in : g.inputs) r = r || v[in];
            return g.kind == GateKind::Or ? r : !r;
        }
        case GateKind::Xor:
        case GateKind::Xnor: {
            bool r = false;
            for (NetId in : g.inputs) r = r != (bool)v[in];
            return g.kind == GateKind::Xor ? r : !r;
        }
    }
    return false;
}

std::vector<bool> simulate_all_nets(const Circuit& c, const BitAssignment& pi,
                                    const BitAssignment& key) {
    if (!c.finalized()) throw NetlistError("circuit not finalized");
    std::vector<char> vals(c.num_nets(), 0);
    for (NetId n : c.primary_inputs) vals[n] = pi.get(n);
    for (NetId n : c.key_inputs) vals[n] = key.get(n);
    for (int gi : c.topo_order()) vals[c.gates[gi].output] = eval_gate(c.gates[gi], vals);
    return std::vector<bool>(vals.begin(), vals.end());
}

BitAssignment simulate(const Circuit& c, const BitAssignment& pi, const BitAssignment& key) {
    std::vector<bool> vals = simulate_all_nets(c, pi, key);
    BitAssignment out;
    for (NetId n : c.outputs) out.set(n, vals[n]);
    return out;
}

EmbedResult embed_structure(const Circuit& host, const Circuit& sub,
                            const std::vector<NetId>& input_taps, EmbedOutputMode mode,
                            const std::vector<NetId>& splice_targets) {
    if (!host.finalized() || !sub.finalized())
        throw NetlistError("embed_structure needs finalized circuits");
    if (input_taps.size() > sub.primary_inputs.size())
        throw NetlistError("more taps than sub inputs");
    for (NetId t : input_taps)
        if (t < 0 || t >= host.num_nets()) throw NetlistError("tap net out of range");
    if (mode == EmbedOutputMode::Splice && splice_targets.size() != sub.outputs.size())
        throw NetlistError("splice target count must match sub output count");

    EmbedResult res;
    Circuit& out = res.circuit;
    out.name = host.name;

    // Copy host nets verbatim (same dense ids).
    for (NetId n = 0; n < host.num_nets(); ++n) out.add_net(host.net_name(n));
    out.primary_inputs = host.primary_inputs;
    out.key_inputs = host.key_inputs;
    out.outputs = host.outputs;

    // Map sub nets into the host namespace. A unique suffix keeps names
    // distinct while preserving any key-name prefix convention.
    std::string suffix = "_e" + std::to_string(host.num_nets());
    auto fresh_net = [&out](const std::string& base) {
        std::string name = base;
        for (int k = 2; out.net_by_name(name) != -1; ++k) name = base + "v" + std::to_string(k);
        return out.add_net(name);
    };
    std::vector<NetId> sub2host(sub.num_nets(), -1);

    for (std::size_t i = 0; i < sub.primary_inputs.size(); ++i) {
        if (i < input_taps.size()) {
            sub2host[sub.primary_inputs[i]] = input_taps[i];
            res.sub_input_nets.push_back(input_taps[i]);
        } else {
            NetId fresh = fresh_net(sub.net_name(sub.primary_inputs[i]) + suffix);
            out.primary_inputs.push_back(fresh);
            sub2host[sub.primary_inputs[i]] = fresh;
            res.sub_input_nets.push_back(fresh);
            res.fresh_primary_inputs++;
        }
    }
    for (NetId kn : sub.key_inputs) {
        NetId fresh = fresh_net(sub.net_name(kn) + suffix);
        out.key_inputs.push_back(fresh);
        sub2host[kn] = fresh;
        res.sub_key_nets.push_back(fresh);
    }
    for (NetId n = 0; n < sub.num_nets(); ++n)
        if (sub2host[n] == -1) sub2host[n] = fresh_net(sub.net_name(n) + suffix);

    for (const Gate& g : host.gates) out.add_gate(g.kind, g.inputs, g.output);
    for (const Gate& g : sub.gates) {
        std::vector<NetId> ins;
        ins.reserve(g.inputs.size());
        for (NetId in : g.inputs) ins.push_back(sub2host[in]);
        out.add_gate(g.kind, std::move(ins), sub2host[g.output]);
    }

    for (NetId sn : sub.outputs) res.sub_output_nets.push_back(sub2host[sn]);

    if (mode == EmbedOutputMode::NewOutputs) {
        for (NetId hn : res.sub_output_nets) out.outputs.push_back(hn);
    } else {
        // Redirect every host-side consumer of the target net to the sub
        // output; sub gates keep their own wiring.
        for (std::size_t i = 0; i < splice_targets.size(); ++i) {
            NetId target = splice_targets[i];
            NetId repl = res.sub_output_nets[i];
            for (std::size_t gi = 0; gi < host.gates.size(); ++gi)
                for (NetId& in : out.gates[gi].inputs)
                    if (in == target) in = repl;
            for (NetId& o : out.outputs)
                if (o == target) o = repl;
        }
    }

    out.finalize();  // throws on any cycle the splice created
    return res;
}

}  // namespace nngsat
