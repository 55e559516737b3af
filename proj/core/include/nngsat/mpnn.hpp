// Message-passing network over literal/clause graphs: graph encoding of CNFs, the
// iterative clause/literal updates, literal voting and confidence, and
// 2-means assignment decoding.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nngsat/cnf.hpp"
#include "nngsat/solver.hpp"
#include "nngsat/tensor.hpp"

namespace nngsat {

// Literal node ordering: variables 1..n_v, then their negations.
struct GraphEncoding {
    int n_v = 0;
    int n_c = 0;  // encoded clause count (after any cap)
    SpMat adj;    // n_c x 2n_v, adj(i,j)=1 iff literal j occurs in clause i
    SpMat adj_t;  // transpose, kept for backward passes
    std::vector<int> clause_index;  // encoded row -> original clause index

    static int lit_node(const Lit& l, int n_v) { return l.neg ? n_v + l.var - 1 : l.var - 1; }
};

// Full encoding when n_c fits the cap; otherwise whole ascending-size groups
// of clauses are taken, and a seeded random subset of the next group fills
// the remaining budget. Variables are never dropped.
GraphEncoding encode_graph(const Cnf& f, int clause_cap = 50000, std::uint64_t seed = 0);

struct Mlp {
    Mat w1, b1, w2, b2, w3, b3;  // 3 layers, relu, final linear
};

struct LayerNormLstmCell {
    // Per gate (i, f, g, o): weight over [x, h] and layer-norm gain/bias.
    Mat wi, wf, wg, wo;          // (x_dim + d) x d each
    Mat gi, bi, gf, bf, gg, bg, go_, bo;  // 1 x d each
    Mat gc, bc;                  // cell-state layer norm
};

struct MpnnModel {
    int d = 32;
    Mat l_init, c_init;  // 1 x d
    Mlp l_msg, c_msg;    // d -> d
    Mlp l_vote;          // d -> 1
    LayerNormLstmCell l_u;  // x dim 2d
    LayerNormLstmCell c_u;  // x dim d
    Mlp v_proj;          // 2d -> 1 (applied to the flopped literal matrix)
    double temperature = 1.0;  // CR calibration (fitted after phase 1)

    static MpnnModel init(int d, std::uint64_t seed);

    // Parameter traversal in fixed serialization order.
    std::vector<Mat*> params();
    std::vector<const Mat*> params() const;
};

struct VoteTrace {
    int n_v = 0;
    std::vector<std::vector<double>> votes;  // per iteration, 2n_v literal votes
    std::vector<double> mean_vote;           // y^(t) per iteration
    double cr = 0.5;                         // sigmoid(y^(T) / temperature)
    std::vector<double> cr_bit;              // per-variable margin confidence
    std::vector<double> projection;          // V_proj output, n_v entries
};

double sigmoid(double x);

// Pure function of (model, g, T); votes recorded every iteration.
VoteTrace mp_forward(const MpnnModel& model, const GraphEncoding& g, int iterations);

// Incremental evaluator for the race: one message-passing iteration per step.
class MpnnEvaluator {
  public:
    MpnnEvaluator(const MpnnModel& model, const GraphEncoding& g);
    void step();
    int iterations_done() const { return t_; }
    const VoteTrace& trace() const { return trace_; }

  private:
    const MpnnModel& model_;
    const GraphEncoding& g_;
    Mat l_, c_, lh_, ch_;
    VoteTrace trace_;
    int t_ = 0;
    void finalize_confidence();
};

// Deterministic 1-D 2-means: min/max initial centroids, 20 Lloyd iterations.
// Returns per-point cluster (0/1) and the two centroids (c0 <= c1).
std::pair<std::vector<int>, std::pair<double, double>> two_means(
    const std::vector<double>& xs);

// Tries each recorded iteration latest-first; returns the first assignment
// (over f's variables) that passes check_model on the full formula.
std::optional<BitAssignment> decode_assignment(const VoteTrace& trace, const Cnf& f);

// --- training-facing graph execution ---

// Batched forward to the per-problem logits; graphs are disjoint-union
// encoded. Returns the tape and the logits node (k x 1).
struct BatchGraph {
    GraphEncoding g;                              // block-diagonal union
    std::vector<std::pair<int, int>> vote_segments;  // per problem, rows in the vote vector
    std::vector<int> n_v_each;
};

BatchGraph batch_graphs(const std::vector<const GraphEncoding*>& gs);

struct ForwardResult {
    Tape tape;
    Tape::Id logits = -1;               // k x 1 mean votes per problem
    std::vector<Tape::Id> param_nodes;  // aligned with model.params()
};

// Differentiable forward over a (possibly batched) encoding.
void mp_forward_tape(const MpnnModel& model, const GraphEncoding& g,
                     const std::vector<std::pair<int, int>>& vote_segments, int iterations,
                     ForwardResult& out);

struct LossResult {
    double loss = 0.0;
    std::vector<Mat> grads;  // aligned with model.params()
};

// Sigmoid cross-entropy of y^(T) against a single SAT/UNSAT label.
LossResult loss_and_grad(const MpnnModel& model, const GraphEncoding& g, bool sat_label,
                         int iterations);

// Batched variant used by training loops; labels per problem.
LossResult loss_and_grad_batch(const MpnnModel& model, const BatchGraph& bg,
                               const std::vector<bool>& labels, int iterations);

// --- optimizer ---

struct AdamState {
    std::vector<Mat> m, v;
    std::int64_t step = 0;
};

// Standard ADAM (beta1 0.9, beta2 0.999, eps 1e-8); state sized on first call.
void adam_step(std::vector<Mat*> params, const std::vector<Mat>& grads, AdamState& state,
               double lr);

// --- checkpoint I/O (checkpoint.cpp) ---

void save_checkpoint(const MpnnModel& model, const std::string& path);
MpnnModel load_checkpoint(const std::string& path);

}  // namespace nngsat
