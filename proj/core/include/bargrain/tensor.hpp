#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bargrain/matrix.hpp"

namespace bargrain {

namespace detail {

struct Node {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<double> grad;  // empty until a backward pass reaches the node
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into the parents that require it.
    std::function<void(Node&)> backward_fn;

    bool is_leaf() const noexcept { return !backward_fn; }
    void ensure_grad();
};

}  // namespace detail

/// Reverse-mode differentiable dense matrix of doubles.
///
/// Tensors are cheap handles: copies share the same node. Every operation
/// below returns a fresh node and records, when any input requires a
/// gradient, the closure that pushes the output gradient back into the
/// inputs. Scalars are 1x1 tensors; vectors are 1xn rows.
///
/// `backward()` accumulates into leaf gradients. Intermediate buffers are
/// reset on each call, so calling it twice on the same graph doubles every
/// leaf gradient.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
    static Tensor from_values(std::size_t rows, std::size_t cols, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor from_matrix(const Matrix& m, bool requires_grad = false);
    /// Non-differentiable input (noise, adjacency constants, features).
    static Tensor constant(const Matrix& m) { return from_matrix(m, false); }
    static Tensor scalar(double v, bool requires_grad = false);

    bool defined() const noexcept { return static_cast<bool>(node_); }
    std::size_t rows() const { return node_->rows; }
    std::size_t cols() const { return node_->cols; }
    std::size_t size() const { return node_->values.size(); }
    bool requires_grad() const { return node_->requires_grad; }

    std::span<const double> values() const { return node_->values; }
    double at(std::size_t r, std::size_t c) const { return node_->values[r * node_->cols + c]; }
    double item() const;
    Matrix to_matrix() const;

    /// Direct write access, for optimizers and initializers only. Mutating a
    /// tensor that participates in a live graph invalidates that graph.
    std::span<double> mutable_values() { return node_->values; }

    bool has_grad() const { return !node_->grad.empty(); }
    std::span<const double> grad() const { return node_->grad; }
    Matrix grad_matrix() const;
    void zero_grad();

    void backward() const;

    bool same_node(const Tensor& other) const noexcept { return node_ == other.node_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    std::shared_ptr<detail::Node> node_;

    friend struct TensorAccess;
};

// Shape-checked matrix product.
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise, operands of identical shape.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

// Adds a 1xc row to every row of an rxc tensor (bias broadcast).
Tensor add_row(const Tensor& a, const Tensor& row);

Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor transpose(const Tensor& a);

Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor log(const Tensor& a);
Tensor pow(const Tensor& a, double exponent);
// log(p / (1 - p)) for p in (0,1).
Tensor logit(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// rxc -> rx1
Tensor row_sum(const Tensor& a);

// Stack vertically (same column count) or horizontally (same row count).
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);
// Flatten both operands row-major and join them into one 1x(n+m) vector.
Tensor concat_vec(const Tensor& a, const Tensor& b);

Tensor reshape(const Tensor& a, std::size_t rows, std::size_t cols);
// Row-major flattening to 1x(r*c).
Tensor flatten(const Tensor& a);

// out row k = a row index[k]; backward scatter-adds.
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index);

// Numerically stable binary cross-entropy on a scalar logit. label must be 0 or 1.
Tensor bce_with_logits(const Tensor& logit, int label);

}  // namespace bargrain
