// Gate-level netlist: representation, simulation, structural editing.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace nngsat {

using NetId = int;

enum class GateKind { And, Nand, Or, Nor, Xor, Xnor, Not, Buf, Mux2 };

const char* gate_kind_name(GateKind k);

struct Gate {
    int id = -1;
    GateKind kind = GateKind::And;
    std::vector<NetId> inputs;  // MUX2 order: select, in0, in1
    NetId output = -1;
};

// Total boolean assignment over some set of net ids (or CNF variables).
class BitAssignment {
  public:
    BitAssignment() = default;

    void set(int id, bool v) { bits_[id] = v; }
    bool get(int id) const;
    bool contains(int id) const { return bits_.count(id) != 0; }
    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }

    const std::unordered_map<int, bool>& raw() const { return bits_; }

    bool operator==(const BitAssignment& o) const { return bits_ == o.bits_; }

  private:
    std::unordered_map<int, bool> bits_;
};

class NetlistError : public std::runtime_error {
  public:
    explicit NetlistError(const std::string& msg) : std::runtime_error(msg) {}
};

// Immutable once built; nets are dense integers with a retained name table.
class Circuit {
  public:
    std::string name;
    std::vector<NetId> primary_inputs;  // excludes key inputs
    std::vector<NetId> key_inputs;
    std::vector<NetId> outputs;
    std::vector<Gate> gates;

    NetId add_net(const std::string& net_name);
    NetId net_by_name(const std::string& net_name) const;  // -1 if absent
    const std::string& net_name(NetId n) const { return net_names_.at(n); }
    int num_nets() const { return static_cast<int>(net_names_.size()); }

    void add_gate(GateKind kind, std::vector<NetId> inputs, NetId output);

    // Checks arity, single drivers, acyclicity, reachability; computes the
    // topological order used by simulate(). Throws NetlistError.
    void finalize();
    bool finalized() const { return finalized_; }
    const std::vector<int>& topo_order() const { return topo_order_; }

    // Gate index driving a net, or -1 when the net is an input.
    int driver_of(NetId n) const;

    bool is_input(NetId n) const;

  private:
    std::vector<std::string> net_names_;
    std::unordered_map<std::string, NetId> name_index_;
    std::vector<int> driver_;     // net -> gate index, -1 for inputs
    std::vector<int> topo_order_; // gate indices
    bool finalized_ = false;
};

// Topological evaluation; pure. `pi` must cover primary_inputs, `key` the
// key_inputs. Returns the assignment of the output nets.
BitAssignment simulate(const Circuit& c, const BitAssignment& pi, const BitAssignment& key);

// Evaluates every net, not just outputs. Used by tests and CNF cross-checks.
std::vector<bool> simulate_all_nets(const Circuit& c, const BitAssignment& pi,
                                    const BitAssignment& key);

enum class EmbedOutputMode { NewOutputs, Splice };

struct EmbedResult {
    Circuit circuit;
    std::vector<NetId> sub_input_nets;   // host nets feeding the sub's inputs
    std::vector<NetId> sub_output_nets;  // host nets carrying the sub's outputs
    std::vector<NetId> sub_key_nets;     // host key nets introduced for the sub
    int fresh_primary_inputs = 0;
};

// Copies `sub` into `host`. Taps feed the sub's primary inputs; when there are
// fewer taps than sub inputs, fresh host PIs make up the difference. Key
// inputs of the sub become key inputs of the host. With Splice, the sub's
// outputs replace the fan-out of `splice_targets` (acyclicity re-checked).
EmbedResult embed_structure(const Circuit& host, const Circuit& sub,
                            const std::vector<NetId>& input_taps, EmbedOutputMode mode,
                            const std::vector<NetId>& splice_targets = {});

// --- BENCH format (bench_io.cpp) ---

struct BenchOptions {
    std::string key_prefix = "keyinput";
};

class BenchParseError : public NetlistError {
  public:
    BenchParseError(int line, const std::string& msg)
        : NetlistError("line " + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

Circuit parse_bench(const std::string& text, const BenchOptions& opts = {});
std::string write_bench(const Circuit& c);

Circuit load_bench_file(const std::string& path, const BenchOptions& opts = {});
void save_bench_file(const Circuit& c, const std::string& path);

}  // namespace nngsat
