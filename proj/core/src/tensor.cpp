#include "nngsat/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>
#include <stdexcept>

namespace nngsat {

Tape::Id Tape::push(Mat value, bool requires_grad, std::function<void()> back) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.back = std::move(back);
    if (requires_grad) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    nodes_.push_back(std::move(n));
    return (Id)nodes_.size() - 1;
}

Tape::Id Tape::leaf(Mat value, bool requires_grad) {
    return push(std::move(value), requires_grad, nullptr);
}

Tape::Id Tape::tile_rows(Id row, int rows) {
    Mat v = nodes_[row].value.replicate(rows, 1);
    bool r = rg(row);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, row, out] { g(row) += nodes_[out].grad.colwise().sum(); };
    return out;
}

Tape::Id Tape::linear(Id x, Id w, Id b) {
    Mat v = nodes_[x].value.lazyProduct(nodes_[w].value);
    v.rowwise() += nodes_[b].value.row(0);
    bool r = rg(x) || rg(w) || rg(b);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, x, w, b, out] {
            const Mat& go = nodes_[out].grad;
            if (rg(x)) g(x).noalias() += go * nodes_[w].value.transpose();
            if (rg(w)) g(w).noalias() += nodes_[x].value.transpose() * go;
            if (rg(b)) g(b) += go.colwise().sum();
        };
    return out;
}

Tape::Id Tape::relu(Id x) {
    Mat v = nodes_[x].value.cwiseMax(0.0);
    bool r = rg(x);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, x, out] {
            g(x).array() +=
                nodes_[out].grad.array() * (nodes_[x].value.array() > 0.0).cast<double>();
        };
    return out;
}

Tape::Id Tape::sigmoid(Id x) {
    Mat v = (1.0 / (1.0 + (-nodes_[x].value.array()).exp())).matrix();
    bool r = rg(x);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, x, out] {
            const auto& s = nodes_[out].value.array();
            g(x).array() += nodes_[out].grad.array() * s * (1.0 - s);
        };
    return out;
}

Tape::Id Tape::tanh_(Id x) {
    Mat v = nodes_[x].value.array().tanh().matrix();
    bool r = rg(x);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, x, out] {
            const auto& t = nodes_[out].value.array();
            g(x).array() += nodes_[out].grad.array() * (1.0 - t * t);
        };
    return out;
}

Tape::Id Tape::add(Id x, Id y) {
    Mat v = nodes_[x].value + nodes_[y].value;
    bool r = rg(x) || rg(y);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, x, y, out] {
            if (rg(x)) g(x) += nodes_[out].grad;
            if (rg(y)) g(y) += nodes_[out].grad;
        };
    return out;
}

Tape::Id Tape::mul(Id x, Id y) {
    Mat v = nodes_[x].value.cwiseProduct(nodes_[y].value);
    bool r = rg(x) || rg(y);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, x, y, out] {
            if (rg(x)) g(x).array() += nodes_[out].grad.array() * nodes_[y].value.array();
            if (rg(y)) g(y).array() += nodes_[out].grad.array() * nodes_[x].value.array();
        };
    return out;
}

Tape::Id Tape::concat_cols(Id x, Id y) {
    const Mat& a = nodes_[x].value;
    const Mat& b = nodes_[y].value;
    Mat v(a.rows(), a.cols() + b.cols());
    v << a, b;
    bool r = rg(x) || rg(y);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, x, y, out] {
            const Mat& go = nodes_[out].grad;
            long ac = nodes_[x].value.cols();
            if (rg(x)) g(x) += go.leftCols(ac);
            if (rg(y)) g(y) += go.rightCols(go.cols() - ac);
        };
    return out;
}

Mat spmm_eval(const SpMat& m, const Mat& x) {
    std::vector<std::vector<std::pair<int, double>>> contrib(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            contrib[it.row()].emplace_back((int)it.col(), it.value());
    Mat out = Mat::Zero(m.rows(), x.cols());
    for (int i = 0; i < (int)contrib.size(); ++i) {
        auto& cs = contrib[i];
        std::sort(cs.begin(), cs.end(), [&](const auto& a, const auto& b) {
            for (int j = 0; j < x.cols(); ++j)
                if (x(a.first, j) != x(b.first, j)) return x(a.first, j) < x(b.first, j);
            return a.second < b.second;
        });
        for (const auto& [c, w] : cs) out.row(i) += w * x.row(c);
    }
    return out;
}

Tape::Id Tape::spmm(const SpMat* m, const SpMat* mt, Id x) {
    Mat v = spmm_eval(*m, nodes_[x].value);
    bool r = rg(x);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, mt, x, out] { g(x) += (*mt) * nodes_[out].grad; };
    return out;
}

Tape::Id Tape::flip_rows(Id x, int half) {
    const Mat& a = nodes_[x].value;
    Mat v(a.rows(), a.cols());
    v.topRows(half) = a.bottomRows(half);
    v.bottomRows(half) = a.topRows(half);
    bool r = rg(x);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, x, half, out] {
            const Mat& go = nodes_[out].grad;
            g(x).topRows(half) += go.bottomRows(half);
            g(x).bottomRows(half) += go.topRows(half);
        };
    return out;
}

Tape::Id Tape::flop(Id x, int half) {
    const Mat& a = nodes_[x].value;
    Mat v(half, 2 * a.cols());
    v << a.topRows(half), a.bottomRows(half);
    bool r = rg(x);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, x, half, out] {
            const Mat& go = nodes_[out].grad;
            long c = nodes_[x].value.cols();
            g(x).topRows(half) += go.leftCols(c);
            g(x).bottomRows(half) += go.rightCols(c);
        };
    return out;
}

Tape::Id Tape::layer_norm(Id x, Id gain, Id bias) {
    constexpr double eps = 1e-6;
    const Mat& a = nodes_[x].value;
    Eigen::VectorXd mean = a.rowwise().mean();
    Mat centered = a.colwise() - mean;
    Eigen::VectorXd var = centered.array().square().matrix().rowwise().mean();
    Eigen::VectorXd inv_std = (var.array() + eps).rsqrt();
    Mat xhat = centered.array().colwise() * inv_std.array();
    Mat v = (xhat.array().rowwise() * nodes_[gain].value.row(0).array()).matrix();
    v.rowwise() += nodes_[bias].value.row(0);
    bool r = rg(x) || rg(gain) || rg(bias);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, x, gain, bias, out, xhat = std::move(xhat),
                            inv_std = std::move(inv_std)] {
            const Mat& go = nodes_[out].grad;
            if (rg(gain)) g(gain) += (go.array() * xhat.array()).colwise().sum().matrix();
            if (rg(bias)) g(bias) += go.colwise().sum();
            if (rg(x)) {
                Mat dxhat = (go.array().rowwise() * nodes_[gain].value.row(0).array()).matrix();
                Eigen::VectorXd m1 = dxhat.rowwise().mean();
                Eigen::VectorXd m2 = (dxhat.array() * xhat.array()).matrix().rowwise().mean();
                Mat dx = dxhat;
                dx.colwise() -= m1;
                dx.array() -= xhat.array().colwise() * m2.array();
                g(x).array() += dx.array().colwise() * inv_std.array();
            }
        };
    return out;
}

Tape::Id Tape::segment_mean(Id x, std::vector<std::pair<int, int>> segments) {
    const Mat& a = nodes_[x].value;
    if (a.cols() != 1) throw std::invalid_argument("segment_mean expects a column vector");
    Mat v((long)segments.size(), 1);
    for (std::size_t i = 0; i < segments.size(); ++i)
        v((long)i, 0) = a.col(0).segment(segments[i].first, segments[i].second).mean();
    bool r = rg(x);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, x, out, segments = std::move(segments)] {
            const Mat& go = nodes_[out].grad;
            for (std::size_t i = 0; i < segments.size(); ++i)
                g(x).col(0).segment(segments[i].first, segments[i].second).array() +=
                    go((long)i, 0) / segments[i].second;
        };
    return out;
}

Tape::Id Tape::bce_with_logits(Id logits, const std::vector<double>& labels) {
    const Mat& z = nodes_[logits].value;
    if ((std::size_t)z.rows() != labels.size())
        throw std::invalid_argument("label count mismatch");
    double loss = 0.0;
    for (long i = 0; i < z.rows(); ++i) {
        double zi = z(i, 0);
        // log(1 + exp(-|z|)) + max(z,0) - z*y, numerically stable
        loss += std::log1p(std::exp(-std::abs(zi))) + std::max(zi, 0.0) - zi * labels[i];
    }
    loss /= (double)z.rows();
    Mat v(1, 1);
    v(0, 0) = loss;
    bool r = rg(logits);
    Id out = push(std::move(v), r, nullptr);
    if (r)
        nodes_[out].back = [this, logits, out, labels] {
            double go = nodes_[out].grad(0, 0);
            const Mat& z = nodes_[logits].value;
            for (long i = 0; i < z.rows(); ++i) {
                double s = 1.0 / (1.0 + std::exp(-z(i, 0)));
                g(logits)(i, 0) += go * (s - labels[i]) / (double)z.rows();
            }
        };
    return out;
}

void Tape::backward(Id loss) {
    if (nodes_[loss].value.size() != 1) throw std::invalid_argument("backward needs a scalar");
    if (!nodes_[loss].requires_grad) return;
    nodes_[loss].grad(0, 0) = 1.0;
    for (Id i = loss; i >= 0; --i)
        if (nodes_[i].back && nodes_[i].requires_grad) nodes_[i].back();
}

}  // namespace nngsat
