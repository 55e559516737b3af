#include "nngsat/solver.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <random>

namespace nngsat {

bool check_model(const Cnf& f, const BitAssignment& m) {
    for (const Clause& cl : f.clauses) {
        bool ok = false;
        for (const Lit& l : cl)
            if (m.get(l.var) != l.neg) {
                ok = true;
                break;
            }
        if (!ok) return false;
    }
    return true;
}

namespace {

// Packed literal: 2*var + neg, vars 0-based internally.
using PLit = int;
inline PLit plit(int var0, bool neg) { return var0 * 2 + (neg ? 1 : 0); }
inline int pvar(PLit p) { return p >> 1; }
inline bool psign(PLit p) { return p & 1; }
inline PLit pneg(PLit p) { return p ^ 1; }

constexpr char kUndef = 2;

struct InternalClause {
    std::vector<PLit> lits;
    double activity = 0.0;
    bool learnt = false;
};

double luby(double y, std::uint64_t x) {
    std::uint64_t size, seq;
    for (size = 1, seq = 0; size < x + 1; seq++, size = 2 * size + 1) {}
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        seq--;
        x = x % size;
    }
    return std::pow(y, (double)seq);
}

class Cdcl {
  public:
    Cdcl(const Cnf& f, std::uint64_t seed) : nvars_(f.num_vars) {
        assigns_.assign(nvars_, kUndef);
        level_.assign(nvars_, 0);
        reason_.assign(nvars_, -1);
        activity_.assign(nvars_, 0.0);
        phase_.assign(nvars_, 1);  // saved phase, default false (neg literal true)
        watches_.assign(2 * nvars_, {});
        seen_.assign(nvars_, 0);
        in_heap_.assign(nvars_, 0);

        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
        std::uniform_real_distribution<double> d(0.0, 1e-6);
        for (int v = 0; v < nvars_; ++v) activity_[v] = d(rng);

        clauses_.reserve(f.clauses.size());
        for (const Clause& cl : f.clauses) {
            std::vector<PLit> lits;
            lits.reserve(cl.size());
            for (const Lit& l : cl) lits.push_back(plit(l.var - 1, l.neg));
            std::sort(lits.begin(), lits.end());
            lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
            bool taut = false;
            for (std::size_t i = 0; i + 1 < lits.size(); ++i)
                if (lits[i + 1] == pneg(lits[i])) taut = true;
            if (taut) continue;
            if (lits.size() == 1) {
                if (!enqueue(lits[0], -1)) {
                    root_conflict_ = true;
                    return;
                }
            } else {
                attach(add_clause(std::move(lits), false));
            }
        }
        if (propagate() != -1) root_conflict_ = true;
        for (int v = 0; v < nvars_; ++v)
            if (assigns_[v] == kUndef) heap_insert(v);
    }

    SolverOutcome run(const std::vector<Lit>& assumptions, const SolveBudget& budget) {
        SolverOutcome out;
        auto deadline_start = std::chrono::steady_clock::now();
        auto over_budget = [&](SolveStatus& st) {
            if (budget.cancel && budget.cancel->load(std::memory_order_relaxed)) {
                st = SolveStatus::Cancelled;
                return true;
            }
            if (budget.conflict_limit && stats_.conflicts > *budget.conflict_limit) {
                st = SolveStatus::Timeout;
                return true;
            }
            if (budget.time_limit_s) {
                double el = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                          deadline_start)
                                .count();
                if (el > *budget.time_limit_s) {
                    st = SolveStatus::Timeout;
                    return true;
                }
            }
            return false;
        };

        if (root_conflict_) {
            out.status = SolveStatus::Unsat;
            out.stats = stats_;
            return out;
        }

        assumptions_.clear();
        for (const Lit& l : assumptions) {
            if (l.var < 1 || l.var > nvars_) throw CnfError("assumption variable out of range");
            assumptions_.push_back(plit(l.var - 1, l.neg));
        }

        std::uint64_t restart_num = 0;
        std::uint64_t conflicts_until_restart = (std::uint64_t)(luby(2.0, restart_num) * 64);
        std::uint64_t conflicts_this_restart = 0;
        std::uint64_t max_learnts = 4000;

        for (;;) {
            int confl = propagate();
            if (confl != -1) {
                stats_.conflicts++;
                conflicts_this_restart++;
                if (decision_level() == 0) {
                    out.status = SolveStatus::Unsat;
                    out.stats = stats_;
                    return out;
                }
                std::vector<PLit> learnt;
                int bt;
                analyze(confl, learnt, bt);
                backtrack(bt);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], -1);
                } else {
                    int ci = add_clause(std::move(learnt), true);
                    attach(ci);
                    bump_clause(ci);
                    enqueue(clauses_[ci].lits[0], ci);
                }
                decay_activities();
                SolveStatus st;
                if ((stats_.conflicts & 0xfff) == 0 && over_budget(st)) {
                    out.status = st;
                    out.stats = stats_;
                    return out;
                }
            } else {
                SolveStatus st;
                if ((stats_.propagations >> 12) != (last_budget_check_ >> 12)) {
                    last_budget_check_ = stats_.propagations;
                    if (over_budget(st)) {
                        out.status = st;
                        out.stats = stats_;
                        return out;
                    }
                }
                if (conflicts_this_restart >= conflicts_until_restart) {
                    stats_.restarts++;
                    restart_num++;
                    conflicts_this_restart = 0;
                    conflicts_until_restart = (std::uint64_t)(luby(2.0, restart_num) * 64);
                    backtrack(0);
                    if (over_budget(st)) {
                        out.status = st;
                        out.stats = stats_;
                        return out;
                    }
                }
                if (num_learnts_ >= max_learnts) {
                    reduce_db();
                    max_learnts += max_learnts / 2;  // geometric schedule
                }

                // Place pending assumptions, then decide.
                PLit next = -1;
                while ((std::size_t)decision_level() < assumptions_.size()) {
                    PLit a = assumptions_[decision_level()];
                    if (value(a) == 1) {
                        new_decision_level();  // already satisfied, dummy level
                    } else if (value(a) == 0) {
                        analyze_final(a, out.failed_assumptions);
                        out.status = SolveStatus::Unsat;
                        out.stats = stats_;
                        return out;
                    } else {
                        next = a;
                        break;
                    }
                }
                if (next == -1) {
                    next = pick_branch();
                    if (next == -1) {
                        out.status = SolveStatus::Sat;
                        for (int v = 0; v < nvars_; ++v)
                            out.model.set(v + 1, assigns_[v] == 1);
                        out.stats = stats_;
                        return out;
                    }
                    stats_.decisions++;
                }
                new_decision_level();
                enqueue(next, -1);
            }
        }
    }

  private:
    int nvars_;
    std::vector<InternalClause> clauses_;
    std::vector<char> assigns_;  // per var: 1 true, 0 false, 2 undef
    std::vector<int> level_;
    std::vector<int> reason_;  // clause index or -1
    std::vector<double> activity_;
    std::vector<char> phase_;
    std::vector<std::vector<int>> watches_;  // per literal, clause indices watching ~lit? see attach
    std::vector<PLit> trail_;
    std::vector<int> trail_lim_;
    std::size_t qhead_ = 0;
    std::vector<char> seen_;
    std::vector<PLit> assumptions_;
    SolverStats stats_;
    bool root_conflict_ = false;
    double var_inc_ = 1.0, cla_inc_ = 1.0;
    std::uint64_t num_learnts_ = 0;
    std::uint64_t last_budget_check_ = ~0ull;

    // activity heap
    std::vector<int> heap_;
    std::vector<int> heap_pos_;
    std::vector<char> in_heap_;

    int decision_level() const { return (int)trail_lim_.size(); }
    void new_decision_level() { trail_lim_.push_back((int)trail_.size()); }

    // 1 true, 0 false, 2 undef -- of a literal
    char value(PLit p) const {
        char a = assigns_[pvar(p)];
        if (a == kUndef) return kUndef;
        return psign(p) ? (char)(1 - a) : a;
    }

    int add_clause(std::vector<PLit> lits, bool learnt) {
        InternalClause ic;
        ic.lits = std::move(lits);
        ic.learnt = learnt;
        if (learnt) num_learnts_++;
        clauses_.push_back(std::move(ic));
        return (int)clauses_.size() - 1;
    }

    void attach(int ci) {
        auto& c = clauses_[ci].lits;
        watches_[pneg(c[0])].push_back(ci);
        watches_[pneg(c[1])].push_back(ci);
    }

    bool enqueue(PLit p, int reason) {
        if (value(p) == 0) return false;
        if (value(p) == 1) return true;
        int v = pvar(p);
        assigns_[v] = psign(p) ? 0 : 1;
        level_[v] = decision_level();
        reason_[v] = reason;
        phase_[v] = psign(p);
        trail_.push_back(p);
        return true;
    }

    // Returns conflicting clause index or -1.
    int propagate() {
        while (qhead_ < trail_.size()) {
            PLit p = trail_[qhead_++];
            stats_.propagations++;
            std::vector<int>& ws = watches_[p];
            std::size_t i = 0, j = 0;
            int confl = -1;
            for (; i < ws.size(); ++i) {
                int ci = ws[i];
                auto& c = clauses_[ci].lits;
                // make sure c[1] is the false literal ~p
                PLit false_lit = pneg(p);
                if (c[0] == false_lit) std::swap(c[0], c[1]);
                if (value(c[0]) == 1) {
                    ws[j++] = ci;
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < c.size(); ++k) {
                    if (value(c[k]) != 0) {
                        std::swap(c[1], c[k]);
                        watches_[pneg(c[1])].push_back(ci);
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                // unit or conflict
                ws[j++] = ci;
                if (!enqueue(c[0], ci)) {
                    confl = ci;
                    qhead_ = trail_.size();
                    for (++i; i < ws.size(); ++i) ws[j++] = ws[i];
                    break;
                }
            }
            ws.resize(j);
            if (confl != -1) return confl;
        }
        return -1;
    }

    void analyze(int confl, std::vector<PLit>& learnt, int& bt_level) {
        learnt.clear();
        learnt.push_back(-1);  // slot for the asserting literal
        int path = 0;
        PLit p = -1;
        std::size_t idx = trail_.size();
        std::vector<int> to_clear;

        for (;;) {
            auto& c = clauses_[confl].lits;
            if (clauses_[confl].learnt) bump_clause(confl);
            for (std::size_t k = (p == -1 ? 0 : 1); k < c.size(); ++k) {
                PLit q = c[k];
                int v = pvar(q);
                if (!seen_[v] && level_[v] > 0) {
                    seen_[v] = 1;
                    to_clear.push_back(v);
                    bump_var(v);
                    if (level_[v] == decision_level())
                        path++;
                    else
                        learnt.push_back(q);
                }
            }
            // next literal on trail at current level
            while (!seen_[pvar(trail_[--idx])]) {}
            p = trail_[idx];
            seen_[pvar(p)] = 0;
            confl = reason_[pvar(p)];
            path--;
            if (path == 0) break;
        }
        learnt[0] = pneg(p);

        // clause minimization: drop literals implied by the rest
        std::size_t j = 1;
        for (std::size_t k = 1; k < learnt.size(); ++k) {
            int v = pvar(learnt[k]);
            if (reason_[v] == -1 || !redundant(learnt[k])) learnt[j++] = learnt[k];
        }
        learnt.resize(j);

        bt_level = 0;
        if (learnt.size() > 1) {
            std::size_t max_i = 1;
            for (std::size_t k = 2; k < learnt.size(); ++k)
                if (level_[pvar(learnt[k])] > level_[pvar(learnt[max_i])]) max_i = k;
            std::swap(learnt[1], learnt[max_i]);
            bt_level = level_[pvar(learnt[1])];
        }
        for (int v : to_clear) seen_[v] = 0;
    }

    // Local (non-recursive-deep) redundancy check: literal removable if every
    // literal of its reason is already seen or at level 0.
    bool redundant(PLit q) {
        int r = reason_[pvar(q)];
        if (r == -1) return false;
        for (std::size_t k = 1; k < clauses_[r].lits.size(); ++k) {
            PLit l = clauses_[r].lits[k];
            int v = pvar(l);
            if (v == pvar(q)) continue;
            if (!seen_[v] && level_[v] > 0) return false;
        }
        return true;
    }

    void analyze_final(PLit conflicting_assumption, std::vector<Lit>& out) {
        out.clear();
        out.push_back(Lit(pvar(conflicting_assumption) + 1, psign(conflicting_assumption)));
        if (decision_level() == 0) return;
        std::vector<char> mark(nvars_, 0);
        mark[pvar(conflicting_assumption)] = 1;
        for (int i = (int)trail_.size() - 1; i >= trail_lim_[0]; --i) {
            int v = pvar(trail_[i]);
            if (!mark[v]) continue;
            if (reason_[v] == -1) {
                // decision: it is one of the assumptions
                if (v != pvar(conflicting_assumption))
                    out.push_back(Lit(v + 1, psign(trail_[i])));
            } else {
                for (PLit l : clauses_[reason_[v]].lits)
                    if (level_[pvar(l)] > 0) mark[pvar(l)] = 1;
            }
        }
    }

    void backtrack(int lvl) {
        if (decision_level() <= lvl) return;
        for (int i = (int)trail_.size() - 1; i >= trail_lim_[lvl]; --i) {
            int v = pvar(trail_[i]);
            assigns_[v] = kUndef;
            reason_[v] = -1;
            if (!in_heap_[v]) heap_insert(v);
        }
        trail_.resize(trail_lim_[lvl]);
        trail_lim_.resize(lvl);
        qhead_ = trail_.size();
    }

    PLit pick_branch() {
        while (!heap_.empty()) {
            int v = heap_[0];
            heap_remove_top();
            if (assigns_[v] == kUndef) return plit(v, phase_[v]);
        }
        return -1;
    }

    void bump_var(int v) {
        activity_[v] += var_inc_;
        if (activity_[v] > 1e100) {
            for (double& a : activity_) a *= 1e-100;
            var_inc_ *= 1e-100;
        }
        if (in_heap_[v]) heap_up(heap_pos_[v]);
    }

    void bump_clause(int ci) {
        clauses_[ci].activity += cla_inc_;
        if (clauses_[ci].activity > 1e20) {
            for (auto& c : clauses_)
                if (c.learnt) c.activity *= 1e-20;
            cla_inc_ *= 1e-20;
        }
    }

    void decay_activities() {
        var_inc_ /= 0.95;
        cla_inc_ /= 0.999;
    }

    void reduce_db() {
        // Drop the less active half of non-reason learnt clauses, then rebuild
        // the watch lists.
        std::vector<int> learnt_idx;
        for (int i = 0; i < (int)clauses_.size(); ++i)
            if (clauses_[i].learnt) learnt_idx.push_back(i);
        std::sort(learnt_idx.begin(), learnt_idx.end(), [&](int a, int b) {
            return clauses_[a].activity < clauses_[b].activity;
        });
        std::vector<char> drop(clauses_.size(), 0);
        std::vector<char> is_reason(clauses_.size(), 0);
        for (int v = 0; v < nvars_; ++v)
            if (assigns_[v] != kUndef && reason_[v] != -1) is_reason[reason_[v]] = 1;
        std::size_t limit = learnt_idx.size() / 2;
        std::size_t dropped = 0;
        for (int ci : learnt_idx) {
            if (dropped >= limit) break;
            if (is_reason[ci] || clauses_[ci].lits.size() <= 2) continue;
            drop[ci] = 1;
            dropped++;
        }
        if (dropped == 0) return;

        std::vector<int> remap(clauses_.size(), -1);
        std::vector<InternalClause> kept;
        kept.reserve(clauses_.size() - dropped);
        for (int i = 0; i < (int)clauses_.size(); ++i) {
            if (drop[i]) continue;
            remap[i] = (int)kept.size();
            kept.push_back(std::move(clauses_[i]));
        }
        clauses_ = std::move(kept);
        num_learnts_ -= dropped;
        for (int v = 0; v < nvars_; ++v)
            if (reason_[v] != -1) reason_[v] = remap[reason_[v]];
        for (auto& w : watches_) w.clear();
        for (int i = 0; i < (int)clauses_.size(); ++i) attach(i);
    }

    // --- binary max-heap on activity ---
    void heap_insert(int v) {
        heap_pos_.resize(std::max<std::size_t>(heap_pos_.size(), v + 1));
        heap_.push_back(v);
        heap_pos_[v] = (int)heap_.size() - 1;
        in_heap_[v] = 1;
        heap_up((int)heap_.size() - 1);
    }
    void heap_remove_top() {
        int v = heap_[0];
        in_heap_[v] = 0;
        heap_[0] = heap_.back();
        heap_pos_[heap_[0]] = 0;
        heap_.pop_back();
        if (!heap_.empty()) heap_down(0);
    }
    void heap_up(int i) {
        int v = heap_[i];
        while (i > 0) {
            int p = (i - 1) >> 1;
            if (activity_[heap_[p]] >= activity_[v]) break;
            heap_[i] = heap_[p];
            heap_pos_[heap_[i]] = i;
            i = p;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }
    void heap_down(int i) {
        int v = heap_[i];
        int n = (int)heap_.size();
        for (;;) {
            int l = 2 * i + 1, r = 2 * i + 2, best = i;
            double bv = activity_[v];
            if (l < n && activity_[heap_[l]] > bv) { best = l; bv = activity_[heap_[l]]; }
            if (r < n && activity_[heap_[r]] > bv) { best = r; }
            if (best == i) break;
            heap_[i] = heap_[best];
            heap_pos_[heap_[i]] = i;
            i = best;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }
};

}  // namespace

SolverOutcome Solver::solve(const Cnf& f, const std::vector<Lit>& assumptions,
                            const SolveBudget& budget) {
    if (f.num_vars == 0 && f.clauses.empty()) {
        SolverOutcome out;
        out.status = SolveStatus::Sat;
        return out;
    }
    Cdcl cdcl(f, seed_);
    SolverOutcome out = cdcl.run(assumptions, budget);
#ifndef NDEBUG
    if (out.sat()) assert(check_model(f, out.model));
#endif
    return out;
}

}  // namespace nngsat
