#include <cctype>
#include <fstream>
#include <sstream>

#include "nngsat/netlist.hpp"

namespace nngsat {

namespace {

std::string upper(std::string s) {
    for (char& c : s) c = (char)std::toupper((unsigned char)c);
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool kind_from_keyword(const std::string& kw, GateKind& out) {
    std::string k = upper(kw);
    if (k == "AND") out = GateKind::And;
    else if (k == "NAND") out = GateKind::Nand;
    else if (k == "OR") out = GateKind::Or;
    else if (k == "NOR") out = GateKind::Nor;
    else if (k == "XOR") out = GateKind::Xor;
    else if (k == "XNOR") out = GateKind::Xnor;
    else if (k == "NOT" || k == "INV") out = GateKind::Not;
    else if (k == "BUF" || k == "BUFF") out = GateKind::Buf;
    else if (k == "MUX" || k == "MUX2") out = GateKind::Mux2;
    else return false;
    return true;
}

}  // namespace

Circuit parse_bench(const std::string& text, const BenchOptions& opts) {
    Circuit c;
    c.name = "bench";

    struct PendingGate {
        int line;
        std::string out;
        GateKind kind;
        std::vector<std::string> ins;
    };
    std::vector<PendingGate> pending;
    std::vector<std::pair<int, std::string>> out_decls;

    std::istringstream ss(text);
    std::string raw;
    int lineno = 0;
    bool named = false;
    while (std::getline(ss, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto h = line.find('#'); h != std::string::npos) {
            // A leading comment carries the circuit name (write_bench emits it).
            if (!named && trim(line.substr(0, h)).empty()) {
                std::string nm = trim(line.substr(h + 1));
                if (!nm.empty()) c.name = nm;
                named = true;
            }
            line = line.substr(0, h);
        }
        line = trim(line);
        if (line.empty()) continue;

        auto paren = [&](const std::string& s, std::size_t open) {
            std::size_t close = s.rfind(')');
            if (close == std::string::npos || close < open)
                throw BenchParseError(lineno, "missing ')'");
            return trim(s.substr(open + 1, close - open - 1));
        };

        std::string head = upper(line.substr(0, line.find('(')));
        head = trim(head);
        if (head == "INPUT" || head == "OUTPUT") {
            std::size_t open = line.find('(');
            std::string net = paren(line, open);
            if (net.empty()) throw BenchParseError(lineno, "empty net name");
            if (head == "INPUT") {
                NetId id = c.add_net(net);
                if (net.rfind(opts.key_prefix, 0) == 0)
                    c.key_inputs.push_back(id);
                else
                    c.primary_inputs.push_back(id);
            } else {
                out_decls.emplace_back(lineno, net);
            }
            continue;
        }

        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw BenchParseError(lineno, "expected '='");
        std::string out_name = trim(line.substr(0, eq));
        std::string rhs = trim(line.substr(eq + 1));
        std::size_t open = rhs.find('(');
        if (open == std::string::npos) throw BenchParseError(lineno, "expected gate call");
        std::string kw = trim(rhs.substr(0, open));
        GateKind kind;
        if (!kind_from_keyword(kw, kind))
            throw BenchParseError(lineno, "unknown gate keyword '" + kw + "'");
        std::string args = paren(rhs, open);

        PendingGate pg;
        pg.line = lineno;
        pg.out = out_name;
        pg.kind = kind;
        std::istringstream as(args);
        std::string tok;
        while (std::getline(as, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) throw BenchParseError(lineno, "empty operand");
            pg.ins.push_back(tok);
        }
        if (pg.ins.empty()) throw BenchParseError(lineno, "gate with no operands");
        pending.push_back(std::move(pg));
    }

    // Register gate outputs, then resolve operands so use-before-def works.
    for (const PendingGate& pg : pending) {
        NetId out = c.net_by_name(pg.out);
        if (out != -1 && (c.is_input(out)))
            throw BenchParseError(pg.line, "input net '" + pg.out + "' redefined by a gate");
        c.add_net(pg.out);
    }
    std::vector<char> defined(c.num_nets(), 0);
    for (NetId n : c.primary_inputs) defined[n] = 1;
    for (NetId n : c.key_inputs) defined[n] = 1;
    std::vector<char> driven(c.num_nets(), 0);
    for (const PendingGate& pg : pending) {
        NetId out = c.net_by_name(pg.out);
        if (driven[out]) throw BenchParseError(pg.line, "net '" + pg.out + "' has two drivers");
        driven[out] = 1;
    }

    for (const PendingGate& pg : pending) {
        NetId out = c.net_by_name(pg.out);
        std::vector<NetId> ins;
        for (const std::string& in : pg.ins) {
            NetId id = c.net_by_name(in);
            if (id == -1 || (!defined[id] && !driven[id]))
                throw BenchParseError(pg.line, "undefined net '" + in + "'");
            ins.push_back(id);
        }
        try {
            c.add_gate(pg.kind, std::move(ins), out);
        } catch (const NetlistError& e) {
            throw BenchParseError(pg.line, e.what());
        }
    }

    for (auto& [ln, net] : out_decls) {
        NetId id = c.net_by_name(net);
        if (id == -1) throw BenchParseError(ln, "output of undefined net '" + net + "'");
        c.outputs.push_back(id);
    }

    try {
        c.finalize();
    } catch (const NetlistError& e) {
        throw BenchParseError(0, e.what());
    }
    return c;
}

std::string write_bench(const Circuit& c) {
    std::ostringstream os;
    os << "# " << c.name << "\n";
    for (NetId n : c.primary_inputs) os << "INPUT(" << c.net_name(n) << ")\n";
    for (NetId n : c.key_inputs) os << "INPUT(" << c.net_name(n) << ")\n";
    for (NetId n : c.outputs) os << "OUTPUT(" << c.net_name(n) << ")\n";
    for (const Gate& g : c.gates) {
        os << c.net_name(g.output) << " = " << gate_kind_name(g.kind) << "(";
        for (std::size_t i = 0; i < g.inputs.size(); ++i) {
            if (i) os << ", ";
            os << c.net_name(g.inputs[i]);
        }
        os << ")\n";
    }
    return os.str();
}

Circuit load_bench_file(const std::string& path, const BenchOptions& opts) {
    std::ifstream in(path);
    if (!in) throw NetlistError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    Circuit c = parse_bench(buf.str(), opts);
    c.name = path;
    return c;
}

void save_bench_file(const Circuit& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw NetlistError("cannot write '" + path + "'");
    out << write_bench(c);
}

}  // namespace nngsat
