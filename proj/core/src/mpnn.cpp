#include "nngsat/mpnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace nngsat {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---------------------------------------------------------------- encoding

GraphEncoding encode_graph(const Cnf& f, int clause_cap, std::uint64_t seed) {
    GraphEncoding g;
    g.n_v = f.num_vars;

    std::vector<int> chosen;
    if ((int)f.clauses.size() <= clause_cap) {
        chosen.resize(f.clauses.size());
        std::iota(chosen.begin(), chosen.end(), 0);
    } else {
        // Keep whole size groups, shortest clauses first; the group that
        // straddles the budget contributes a seeded random subset.
        std::vector<int> order(f.clauses.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return f.clauses[a].size() < f.clauses[b].size();
        });
        std::size_t i = 0;
        while (i < order.size() && (int)chosen.size() < clause_cap) {
            std::size_t j = i;
            std::size_t sz = f.clauses[order[i]].size();
            while (j < order.size() && f.clauses[order[j]].size() == sz) ++j;
            std::size_t group = j - i;
            std::size_t room = clause_cap - chosen.size();
            if (group <= room) {
                for (std::size_t k = i; k < j; ++k) chosen.push_back(order[k]);
            } else {
                std::vector<int> grp(order.begin() + i, order.begin() + j);
                std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
                std::shuffle(grp.begin(), grp.end(), rng);
                grp.resize(room);
                chosen.insert(chosen.end(), grp.begin(), grp.end());
            }
            i = j;
        }
        std::sort(chosen.begin(), chosen.end());
    }

    g.n_c = (int)chosen.size();
    g.clause_index = chosen;
    std::vector<Eigen::Triplet<double>> trips;
    for (int row = 0; row < g.n_c; ++row)
        for (const Lit& l : f.clauses[chosen[row]])
            trips.emplace_back(row, GraphEncoding::lit_node(l, g.n_v), 1.0);
    g.adj.resize(g.n_c, 2 * g.n_v);
    g.adj.setFromTriplets(trips.begin(), trips.end(), [](double, double) { return 1.0; });
    g.adj_t = g.adj.transpose();
    return g;
}

BatchGraph batch_graphs(const std::vector<const GraphEncoding*>& gs) {
    BatchGraph bg;
    int nv = 0, nc = 0;
    for (const auto* g : gs) {
        nv += g->n_v;
        nc += g->n_c;
    }
    bg.g.n_v = nv;
    bg.g.n_c = nc;
    // The global layout keeps all positive literals first, then all
    // negatives, so per-problem columns have to be remapped.
    std::vector<Eigen::Triplet<double>> trips;
    int vo = 0, co = 0;
    for (std::size_t p = 0; p < gs.size(); ++p) {
        const auto* g = gs[p];
        for (int k = 0; k < g->adj.outerSize(); ++k)
            for (SpMat::InnerIterator it(g->adj, k); it; ++it) {
                int col = (int)it.col();
                int gcol = col < g->n_v ? vo + col : nv + vo + (col - g->n_v);
                trips.emplace_back(co + (int)it.row(), gcol, 1.0);
            }
        bg.vote_segments.emplace_back(vo, g->n_v);  // positive-literal rows
        bg.n_v_each.push_back(g->n_v);
        vo += g->n_v;
        co += g->n_c;
    }
    bg.g.adj.resize(nc, 2 * nv);
    bg.g.adj.setFromTriplets(trips.begin(), trips.end());
    bg.g.adj_t = bg.g.adj.transpose();
    return bg;
}

// ------------------------------------------------------------------- model

static Mat xavier(int rows, int cols, std::mt19937_64& rng) {
    double lim = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-lim, lim);
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

static Mlp init_mlp(int in, int hidden, int out, std::mt19937_64& rng) {
    Mlp m;
    m.w1 = xavier(in, hidden, rng);
    m.b1 = Mat::Zero(1, hidden);
    m.w2 = xavier(hidden, hidden, rng);
    m.b2 = Mat::Zero(1, hidden);
    m.w3 = xavier(hidden, out, rng);
    m.b3 = Mat::Zero(1, out);
    return m;
}

static LayerNormLstmCell init_lstm(int x_dim, int d, std::mt19937_64& rng) {
    LayerNormLstmCell c;
    c.wi = xavier(x_dim + d, d, rng);
    c.wf = xavier(x_dim + d, d, rng);
    c.wg = xavier(x_dim + d, d, rng);
    c.wo = xavier(x_dim + d, d, rng);
    auto ones = Mat::Ones(1, d);
    auto zeros = Mat::Zero(1, d);
    c.gi = ones;
    c.bi = zeros;
    c.gf = ones;
    c.bf = ones;  // forget-gate bias starts at 1 for stable early training
    c.gg = ones;
    c.bg = zeros;
    c.go_ = ones;
    c.bo = zeros;
    c.gc = ones;
    c.bc = zeros;
    return c;
}

MpnnModel MpnnModel::init(int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    MpnnModel m;
    m.d = d;
    std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt((double)d));
    m.l_init = Mat::NullaryExpr(1, d, [&] { return nd(rng); });
    m.c_init = Mat::NullaryExpr(1, d, [&] { return nd(rng); });
    m.l_msg = init_mlp(d, d, d, rng);
    m.c_msg = init_mlp(d, d, d, rng);
    m.l_vote = init_mlp(d, d, 1, rng);
    m.l_u = init_lstm(2 * d, d, rng);
    m.c_u = init_lstm(d, d, rng);
    m.v_proj = init_mlp(2 * d, d, 1, rng);
    return m;
}

static void collect(std::vector<Mat*>& out, Mlp& m) {
    out.insert(out.end(), {&m.w1, &m.b1, &m.w2, &m.b2, &m.w3, &m.b3});
}
static void collect(std::vector<Mat*>& out, LayerNormLstmCell& c) {
    out.insert(out.end(), {&c.wi, &c.wf, &c.wg, &c.wo, &c.gi, &c.bi, &c.gf, &c.bf, &c.gg,
                           &c.bg, &c.go_, &c.bo, &c.gc, &c.bc});
}

std::vector<Mat*> MpnnModel::params() {
    std::vector<Mat*> out;
    out.push_back(&l_init);
    out.push_back(&c_init);
    collect(out, l_msg);
    collect(out, c_msg);
    collect(out, l_vote);
    collect(out, l_u);
    collect(out, c_u);
    collect(out, v_proj);
    return out;
}

std::vector<const Mat*> MpnnModel::params() const {
    auto mut = const_cast<MpnnModel*>(this)->params();
    return std::vector<const Mat*>(mut.begin(), mut.end());
}

// ---------------------------------------------------- plain-Eigen forward

static Mat mlp_eval(const Mlp& m, const Mat& x) {
    // lazyProduct keeps results independent of row layout, but it makes no
    // temporary, so each layer must land in a fresh matrix (no aliasing).
    Mat h1 = ((x.lazyProduct(m.w1)).rowwise() + m.b1.row(0)).cwiseMax(0.0);
    Mat h2 = ((h1.lazyProduct(m.w2)).rowwise() + m.b2.row(0)).cwiseMax(0.0);
    return (h2.lazyProduct(m.w3)).rowwise() + m.b3.row(0);
}

static Mat ln_eval(const Mat& x, const Mat& gain, const Mat& bias) {
    Mat out(x.rows(), x.cols());
    const double eps = 1e-6;
    for (int i = 0; i < x.rows(); ++i) {
        double mean = x.row(i).mean();
        double var = (x.row(i).array() - mean).square().mean();
        double inv = 1.0 / std::sqrt(var + eps);
        out.row(i) =
            ((x.row(i).array() - mean) * inv * gain.row(0).array() + bias.row(0).array())
                .matrix();
    }
    return out;
}

static void lstm_eval(const LayerNormLstmCell& cell, const Mat& x, Mat& h, Mat& c) {
    Mat z(x.rows(), x.cols() + h.cols());
    z << x, h;
    Mat i = ln_eval(z.lazyProduct(cell.wi), cell.gi, cell.bi).unaryExpr([](double v) { return sigmoid(v); });
    Mat f = ln_eval(z.lazyProduct(cell.wf), cell.gf, cell.bf).unaryExpr([](double v) { return sigmoid(v); });
    Mat g = ln_eval(z.lazyProduct(cell.wg), cell.gg, cell.bg).array().tanh().matrix();
    Mat o = ln_eval(z.lazyProduct(cell.wo), cell.go_, cell.bo).unaryExpr([](double v) { return sigmoid(v); });
    c = (f.array() * c.array() + i.array() * g.array()).matrix();
    h = (o.array() * ln_eval(c, cell.gc, cell.bc).array().tanh()).matrix();
}

static Mat flip_eval(const Mat& l, int half) {
    Mat out(l.rows(), l.cols());
    out.topRows(half) = l.bottomRows(half);
    out.bottomRows(half) = l.topRows(half);
    return out;
}

MpnnEvaluator::MpnnEvaluator(const MpnnModel& model, const GraphEncoding& g)
    : model_(model), g_(g) {
    l_ = model.l_init.replicate(2 * g.n_v, 1);
    c_ = model.c_init.replicate(g.n_c, 1);
    lh_ = Mat::Zero(2 * g.n_v, model.d);
    ch_ = Mat::Zero(g.n_c, model.d);
    trace_.n_v = g.n_v;
    finalize_confidence();
}

void MpnnEvaluator::step() {
    Mat lmsg = mlp_eval(model_.l_msg, l_);
    Mat cin = spmm_eval(g_.adj, lmsg);  // n_c x d
    lstm_eval(model_.c_u, cin, c_, ch_);
    Mat cmsg = mlp_eval(model_.c_msg, c_);
    Mat lin(2 * g_.n_v, 2 * model_.d);
    lin << spmm_eval(g_.adj_t, cmsg), flip_eval(l_, g_.n_v);
    lstm_eval(model_.l_u, lin, l_, lh_);
    ++t_;

    Mat votes = mlp_eval(model_.l_vote, l_);  // 2n_v x 1
    trace_.votes.emplace_back(votes.data(), votes.data() + votes.size());
    trace_.mean_vote.push_back(votes.mean());
    finalize_confidence();
}

void MpnnEvaluator::finalize_confidence() {
    int nv = g_.n_v;
    trace_.cr_bit.assign(nv, 0.5);
    if (trace_.votes.empty()) {
        trace_.cr = 0.5;
        trace_.projection.assign(nv, 0.0);
        return;
    }
    const auto& last = trace_.votes.back();
    for (int v = 0; v < nv; ++v)
        trace_.cr_bit[v] = sigmoid(std::abs(last[v] - last[nv + v]));
    trace_.cr = sigmoid(trace_.mean_vote.back() / model_.temperature);
    Mat flopped(nv, 2 * model_.d);
    flopped << l_.topRows(nv), l_.bottomRows(nv);
    Mat proj = mlp_eval(model_.v_proj, flopped);
    trace_.projection.assign(proj.data(), proj.data() + proj.size());
}

VoteTrace mp_forward(const MpnnModel& model, const GraphEncoding& g, int iterations) {
    MpnnEvaluator ev(model, g);
    for (int t = 0; t < iterations; ++t) ev.step();
    return ev.trace();
}

// ---------------------------------------------------------------- decoding

std::pair<std::vector<int>, std::pair<double, double>> two_means(
    const std::vector<double>& xs) {
    std::vector<int> cluster(xs.size(), 0);
    if (xs.empty()) return {cluster, {0.0, 0.0}};
    auto [mn_it, mx_it] = std::minmax_element(xs.begin(), xs.end());
    double c0 = *mn_it, c1 = *mx_it;
    for (int iter = 0; iter < 20; ++iter) {
        double s0 = 0, s1 = 0;
        int n0 = 0, n1 = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            int c = std::abs(xs[i] - c0) <= std::abs(xs[i] - c1) ? 0 : 1;
            cluster[i] = c;
            (c == 0 ? s0 : s1) += xs[i];
            (c == 0 ? n0 : n1) += 1;
        }
        double nc0 = n0 ? s0 / n0 : c0;
        double nc1 = n1 ? s1 / n1 : c1;
        if (nc0 == c0 && nc1 == c1) break;
        c0 = nc0;
        c1 = nc1;
    }
    return {cluster, {c0, c1}};
}

std::optional<BitAssignment> decode_assignment(const VoteTrace& trace, const Cnf& f) {
    int nv = trace.n_v;
    for (int t = (int)trace.votes.size() - 1; t >= 0; --t) {
        const auto& votes = trace.votes[t];
        std::vector<double> margin(nv);
        for (int v = 0; v < nv; ++v) margin[v] = votes[v] - votes[nv + v];
        auto [cluster, cents] = two_means(margin);
        for (int mapping = 0; mapping < 2; ++mapping) {
            // mapping 0: the higher-centroid cluster is assigned true.
            bool hi_true = (mapping == 0) == (cents.second >= cents.first);
            BitAssignment a;
            for (int v = 0; v < nv; ++v) {
                bool in_c1 = cluster[v] == 1;
                a.set(v + 1, in_c1 ? hi_true : !hi_true);
            }
            if (check_model(f, a)) return a;
        }
    }
    return std::nullopt;
}

// -------------------------------------------------------------- tape path

namespace {

struct MlpNodes {
    Tape::Id w1, b1, w2, b2, w3, b3;
};
struct LstmNodes {
    Tape::Id wi, wf, wg, wo, gi, bi, gf, bf, gg, bg, go_, bo, gc, bc;
};

Tape::Id mlp_tape(Tape& tp, const MlpNodes& m, Tape::Id x) {
    Tape::Id h = tp.relu(tp.linear(x, m.w1, m.b1));
    h = tp.relu(tp.linear(h, m.w2, m.b2));
    return tp.linear(h, m.w3, m.b3);
}

void lstm_tape(Tape& tp, const LstmNodes& c, Tape::Id zero_b, Tape::Id x, Tape::Id& h,
               Tape::Id& cs) {
    Tape::Id z = tp.concat_cols(x, h);
    Tape::Id i = tp.sigmoid(tp.layer_norm(tp.linear(z, c.wi, zero_b), c.gi, c.bi));
    Tape::Id f = tp.sigmoid(tp.layer_norm(tp.linear(z, c.wf, zero_b), c.gf, c.bf));
    Tape::Id g = tp.tanh_(tp.layer_norm(tp.linear(z, c.wg, zero_b), c.gg, c.bg));
    Tape::Id o = tp.sigmoid(tp.layer_norm(tp.linear(z, c.wo, zero_b), c.go_, c.bo));
    cs = tp.add(tp.mul(f, cs), tp.mul(i, g));
    h = tp.mul(o, tp.tanh_(tp.layer_norm(cs, c.gc, c.bc)));
}

}  // namespace

void mp_forward_tape(const MpnnModel& model, const GraphEncoding& g,
                     const std::vector<std::pair<int, int>>& vote_segments, int iterations,
                     ForwardResult& out) {
    Tape& tp = out.tape;
    auto params = model.params();
    out.param_nodes.clear();
    for (const Mat* p : params) out.param_nodes.push_back(tp.leaf(*p, true));
    // Param order: l_init, c_init, l_msg(6), c_msg(6), l_vote(6), l_u(14), c_u(14), v_proj(6).
    auto take_mlp = [&](int at) {
        const auto& n = out.param_nodes;
        return MlpNodes{n[at], n[at + 1], n[at + 2], n[at + 3], n[at + 4], n[at + 5]};
    };
    auto take_lstm = [&](int at) {
        const auto& n = out.param_nodes;
        return LstmNodes{n[at],     n[at + 1], n[at + 2],  n[at + 3],  n[at + 4],
                         n[at + 5], n[at + 6], n[at + 7],  n[at + 8],  n[at + 9],
                         n[at + 10], n[at + 11], n[at + 12], n[at + 13]};
    };
    Tape::Id l_init = out.param_nodes[0], c_init = out.param_nodes[1];
    MlpNodes l_msg = take_mlp(2), c_msg = take_mlp(8), l_vote = take_mlp(14);
    LstmNodes l_u = take_lstm(20), c_u = take_lstm(34);

    Tape::Id zero_b = tp.leaf(Mat::Zero(1, model.d), false);
    Tape::Id l = tp.tile_rows(l_init, 2 * g.n_v);
    Tape::Id c = tp.tile_rows(c_init, g.n_c);
    Tape::Id lc = tp.leaf(Mat::Zero(2 * g.n_v, model.d), false);
    Tape::Id cc = tp.leaf(Mat::Zero(g.n_c, model.d), false);

    for (int t = 0; t < iterations; ++t) {
        Tape::Id lmsg = mlp_tape(tp, l_msg, l);
        Tape::Id cin = tp.spmm(&g.adj, &g.adj_t, lmsg);
        lstm_tape(tp, c_u, zero_b, cin, c, cc);
        Tape::Id cmsg = mlp_tape(tp, c_msg, c);
        Tape::Id lin = tp.concat_cols(tp.spmm(&g.adj_t, &g.adj, cmsg), tp.flip_rows(l, g.n_v));
        lstm_tape(tp, l_u, zero_b, lin, l, lc);
    }

    Tape::Id votes = mlp_tape(tp, l_vote, l);  // 2n_v x 1
    // y^(T) per problem: mean over all of that problem's literal votes.
    std::vector<std::pair<int, int>> segs;
    for (auto [start, len] : vote_segments) {
        segs.emplace_back(start, len);               // positive rows
        segs.emplace_back(g.n_v + start, len);       // negative rows
    }
    // Collapse the two halves of each problem into one mean by averaging the
    // per-half means (halves are equal length, so this equals the joint mean).
    Tape::Id half_means = tp.segment_mean(votes, segs);  // 2k x 1, interleaved
    std::vector<std::pair<int, int>> pair_segs;
    for (std::size_t p = 0; p < vote_segments.size(); ++p)
        pair_segs.emplace_back(2 * (int)p, 2);
    out.logits = tp.segment_mean(half_means, pair_segs);  // k x 1
}

static LossResult finish_loss(const MpnnModel& model, ForwardResult& fr,
                              const std::vector<double>& labels) {
    Tape::Id loss = fr.tape.bce_with_logits(fr.logits, labels);
    fr.tape.backward(loss);
    LossResult res;
    res.loss = fr.tape.value(loss)(0, 0);
    auto params = model.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Mat& grd = fr.tape.grad(fr.param_nodes[i]);
        res.grads.push_back(grd.size() ? grd
                                       : Mat::Zero(params[i]->rows(), params[i]->cols()));
    }
    return res;
}

LossResult loss_and_grad(const MpnnModel& model, const GraphEncoding& g, bool sat_label,
                         int iterations) {
    ForwardResult fr;
    mp_forward_tape(model, g, {{0, g.n_v}}, iterations, fr);
    return finish_loss(model, fr, {sat_label ? 1.0 : 0.0});
}

LossResult loss_and_grad_batch(const MpnnModel& model, const BatchGraph& bg,
                               const std::vector<bool>& labels, int iterations) {
    if (labels.size() != bg.vote_segments.size())
        throw std::invalid_argument("label count does not match batch size");
    ForwardResult fr;
    mp_forward_tape(model, bg.g, bg.vote_segments, iterations, fr);
    std::vector<double> ls;
    for (bool b : labels) ls.push_back(b ? 1.0 : 0.0);
    return finish_loss(model, fr, ls);
}

// --------------------------------------------------------------- optimizer

void adam_step(std::vector<Mat*> params, const std::vector<Mat>& grads, AdamState& state,
               double lr) {
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    if (state.m.empty()) {
        for (Mat* p : params) {
            state.m.push_back(Mat::Zero(p->rows(), p->cols()));
            state.v.push_back(Mat::Zero(p->rows(), p->cols()));
        }
    }
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("optimizer state/parameter mismatch");
    ++state.step;
    double bc1 = 1.0 - std::pow(b1, (double)state.step);
    double bc2 = 1.0 - std::pow(b2, (double)state.step);
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
        state.v[i] = (b2 * state.v[i].array() + (1.0 - b2) * grads[i].array().square()).matrix();
        Eigen::ArrayXXd mhat = state.m[i].array() / bc1;
        Eigen::ArrayXXd vhat = state.v[i].array() / bc2;
        params[i]->array() -= lr * mhat / (vhat.sqrt() + eps);
    }
}

}  // namespace nngsat
