// CNF clause database, Tseitin encoding, miter construction, DIMACS I/O.
#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "nngsat/netlist.hpp"

namespace nngsat {

struct Lit {
    int var = 0;  // >= 1
    bool neg = false;

    Lit() = default;
    Lit(int v, bool n) : var(v), neg(n) {}
    explicit Lit(int dimacs) : var(dimacs < 0 ? -dimacs : dimacs), neg(dimacs < 0) {}

    Lit operator~() const { return Lit(var, !neg); }
    int dimacs() const { return neg ? -var : var; }
    bool operator==(const Lit& o) const { return var == o.var && neg == o.neg; }
};

inline Lit pos(int v) { return Lit(v, false); }
inline Lit neg(int v) { return Lit(v, true); }

using Clause = std::vector<Lit>;

struct Cnf {
    int num_vars = 0;
    std::vector<Clause> clauses;

    int new_var() { return ++num_vars; }
    void add_clause(Clause cl);
    std::size_t num_clauses() const { return clauses.size(); }
};

class CnfError : public std::runtime_error {
  public:
    explicit CnfError(const std::string& m) : std::runtime_error(m) {}
};

// Which duplicated circuit copy a variable belongs to in the miter.
enum class CopyTag { Shared, Copy1, Copy2 };

// net id <-> CNF variable, per copy. X is shared across copies, keys and
// internal nets are per-copy.
class VarMap {
  public:
    void bind(NetId net, CopyTag tag, int var);
    int var_of(NetId net, CopyTag tag) const;  // throws if unbound
    bool bound(NetId net, CopyTag tag) const;
    NetId net_of(int var, CopyTag& tag_out) const;  // -1 if auxiliary

    std::string to_json(const Circuit& c) const;

  private:
    static std::uint64_t key(NetId n, CopyTag t) {
        return (std::uint64_t)n << 2 | (std::uint64_t)t;
    }
    std::unordered_map<std::uint64_t, int> fwd_;
    std::unordered_map<int, std::uint64_t> rev_;
};

// Standard Tseitin encoding; n-ary gates decomposed to binary chains. Every
// net gets a variable under CopyTag::Shared.
std::pair<Cnf, VarMap> tseitin_encode(const Circuit& c);

struct Miter {
    Cnf cnf;
    VarMap vm;
    std::vector<int> diff_vars;  // per-output XOR auxiliaries
    Clause diff_clause;          // OR over diff_vars (already in cnf)
    int num_base_vars = 0;       // vars before any DIP block
};

// Two copies sharing X with independent keys K1/K2, plus Y1 != Y2.
// The difference constraint is the last clause; callers that need F_i without
// it (final key extraction) should use miter_without_difference().
Miter build_miter(const Circuit& locked);
Cnf miter_without_difference(const Miter& m, const Cnf& grown);

// Appends two circuit copies with X fixed to `dip` and outputs fixed to `y`,
// reusing the K1/K2 variables of `m`. Returns the grown formula.
Cnf add_dip_block(const Cnf& f, const Miter& m, const Circuit& locked, const BitAssignment& dip,
                  const BitAssignment& y);

// DIMACS text I/O.
std::string write_dimacs(const Cnf& f);
Cnf read_dimacs(const std::string& text);

// Classic fixed-length random 3-SAT: floor(ratio*n) clauses over 3 distinct
// variables with uniform signs; deterministic in seed.
Cnf random_3sat(int n, double ratio, std::uint64_t seed);

}  // namespace nngsat
