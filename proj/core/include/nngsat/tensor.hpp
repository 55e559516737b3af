// Reverse-mode autodiff over dense Eigen matrices, sized for the
// message-passing network: coarse ops, one tape per forward pass.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace nngsat {

using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

// m * x with each output row accumulated in an order chosen from the operand
// values, not the column numbering: relabeling the columns of m (with the
// matching row permutation of x) gives a bit-identical result.
Mat spmm_eval(const SpMat& m, const Mat& x);

class Tape {
  public:
    // Node handles index into the tape; valid for the tape's lifetime.
    using Id = int;

    Id leaf(Mat value, bool requires_grad);

    Id tile_rows(Id row, int rows);             // 1xd -> rows x d
    Id linear(Id x, Id w, Id b);                // X*W + b (b is 1 x out)
    Id relu(Id x);
    Id sigmoid(Id x);
    Id tanh_(Id x);
    Id add(Id x, Id y);
    Id mul(Id x, Id y);                          // elementwise
    Id concat_cols(Id x, Id y);
    Id spmm(const SpMat* m, const SpMat* mt, Id x);  // m * X
    Id flip_rows(Id x, int half);                // swap row i with row i+half
    Id flop(Id x, int half);                     // [X_top | X_bottom], half rows
    Id layer_norm(Id x, Id gain, Id bias);       // per-row, eps 1e-6
    // x is N x 1; segments are (start,len) row ranges; result k x 1 of means
    Id segment_mean(Id x, std::vector<std::pair<int, int>> segments);
    // mean of sigmoid cross-entropy between logits (k x 1) and labels in {0,1}
    Id bce_with_logits(Id logits, const std::vector<double>& labels);

    const Mat& value(Id i) const { return nodes_[i].value; }
    const Mat& grad(Id i) const { return nodes_[i].grad; }

    void backward(Id loss);

    std::size_t size() const { return nodes_.size(); }

  private:
    struct Node {
        Mat value;
        Mat grad;
        bool requires_grad = false;
        std::function<void()> back;  // accumulates into parents' grads
    };
    std::vector<Node> nodes_;

    Id push(Mat value, bool requires_grad, std::function<void()> back);
    Mat& g(Id i) { return nodes_[i].grad; }
    bool rg(Id i) const { return nodes_[i].requires_grad; }
};

}  // namespace nngsat
