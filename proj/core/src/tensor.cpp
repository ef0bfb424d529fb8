#include "bargrain/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "bargrain/errors.hpp"

namespace bargrain {

void detail::Node::ensure_grad() {
    if (grad.empty()) grad.assign(values.size(), 0.0);
}

struct TensorAccess {
    static const std::shared_ptr<detail::Node>& node(const Tensor& t) { return t.node_; }
    static Tensor wrap(std::shared_ptr<detail::Node> n) { return Tensor(std::move(n)); }
};

namespace {

using NodePtr = std::shared_ptr<detail::Node>;

const NodePtr& node_of(const Tensor& t) {
    if (!t.defined()) throw ContractError("operation on an undefined tensor");
    return TensorAccess::node(t);
}

std::string shape_of(const Tensor& t) { return shape_string(t.rows(), t.cols()); }

// Builds the output node. The backward closure is attached only when some
// parent requires a gradient.
Tensor make_result(std::size_t rows, std::size_t cols, std::vector<double> values,
                   std::vector<NodePtr> parents, std::function<void(detail::Node&)> backward_fn) {
    auto out = std::make_shared<detail::Node>();
    out->rows = rows;
    out->cols = cols;
    out->values = std::move(values);
    const bool any = std::any_of(parents.begin(), parents.end(),
                                 [](const NodePtr& p) { return p->requires_grad; });
    if (any) {
        out->requires_grad = true;
        out->parents = std::move(parents);
        out->backward_fn = std::move(backward_fn);
    }
    return TensorAccess::wrap(std::move(out));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_of(a) + " vs " +
                             shape_of(b));
    }
}

// Applies f elementwise; backward multiplies the incoming gradient by
// dfdx(x, y) where y is the forward output.
template <class F, class DF>
Tensor unary(const Tensor& a, F f, DF dfdx) {
    const auto& pa = node_of(a);
    std::vector<double> out(pa->values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(pa->values[i]);
    return make_result(pa->rows, pa->cols, std::move(out), {pa}, [dfdx](detail::Node& self) {
        auto& in = *self.parents[0];
        in.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            in.grad[i] += self.grad[i] * dfdx(in.values[i], self.values[i]);
        }
    });
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction and access

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
    return from_values(rows, cols, std::vector<double>(rows * cols, 0.0), requires_grad);
}

Tensor Tensor::from_values(std::size_t rows, std::size_t cols, std::vector<double> values,
                           bool requires_grad) {
    if (values.size() != rows * cols) {
        throw DimensionError("Tensor: " + std::to_string(values.size()) +
                             " values do not fill shape " + shape_string(rows, cols));
    }
    auto n = std::make_shared<detail::Node>();
    n->rows = rows;
    n->cols = cols;
    n->values = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::from_matrix(const Matrix& m, bool requires_grad) {
    return from_values(m.rows(), m.cols(), m.values(), requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) { return from_values(1, 1, {v}, requires_grad); }

double Tensor::item() const {
    if (size() != 1) throw ContractError("item() on non-scalar tensor " + shape_of(*this));
    return node_->values[0];
}

Matrix Tensor::to_matrix() const { return Matrix(rows(), cols(), node_->values); }

Matrix Tensor::grad_matrix() const {
    if (!has_grad()) return Matrix(rows(), cols());
    return Matrix(rows(), cols(), node_->grad);
}

void Tensor::zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::backward() const {
    const auto& root = node_of(*this);
    if (root->values.size() != 1) {
        throw ContractError("backward() requires a scalar loss, got " + shape_of(*this));
    }
    if (!root->requires_grad) {
        throw ContractError("backward() on a tensor that does not require grad");
    }

    // Iterative post-order DFS gives a topological order (inputs before outputs).
    std::vector<detail::Node*> order;
    std::unordered_set<const detail::Node*> visited;
    std::vector<std::pair<detail::Node*, std::size_t>> stack{{root.get(), 0}};
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            detail::Node* p = n->parents[next++].get();
            if (p->requires_grad && !p->is_leaf() && visited.insert(p).second) {
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    for (detail::Node* n : order) n->grad.assign(n->values.size(), 0.0);
    root->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) (*it)->backward_fn(**it);
}

// ---------------------------------------------------------------------------
// Linear algebra

Tensor matmul(const Tensor& a, const Tensor& b) {
    const auto& pa = node_of(a);
    const auto& pb = node_of(b);
    if (pa->cols != pb->rows) {
        throw DimensionError("matmul: inner dimensions differ " + shape_of(a) + " x " + shape_of(b));
    }
    const std::size_t m = pa->rows, k = pa->cols, n = pb->cols;
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa->values[i * k + p];
            if (av == 0.0) continue;
            const double* brow = &pb->values[p * n];
            double* orow = &out[i * n];
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    return make_result(m, n, std::move(out), {pa, pb}, [m, k, n](detail::Node& self) {
        auto& A = *self.parents[0];
        auto& B = *self.parents[1];
        const auto& g = self.grad;
        if (A.requires_grad) {
            A.ensure_grad();
            // dA = g * B^T
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * B.values[p * n + j];
                    A.grad[i * k + p] += acc;
                }
            }
        }
        if (B.requires_grad) {
            B.ensure_grad();
            // dB = A^T * g
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    const double av = A.values[i * k + p];
                    if (av == 0.0) continue;
                    for (std::size_t j = 0; j < n; ++j) B.grad[p * n + j] += av * g[i * n + j];
                }
            }
        }
    });
}

Tensor transpose(const Tensor& a) {
    const auto& pa = node_of(a);
    const std::size_t r = pa->rows, c = pa->cols;
    std::vector<double> out(r * c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = pa->values[i * c + j];
    return make_result(c, r, std::move(out), {pa}, [r, c](detail::Node& self) {
        auto& in = *self.parents[0];
        in.ensure_grad();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) in.grad[i * c + j] += self.grad[j * r + i];
    });
}

// ---------------------------------------------------------------------------
// Elementwise binary

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    const auto& pa = node_of(a);
    const auto& pb = node_of(b);
    std::vector<double> out(pa->values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pa->values[i] + pb->values[i];
    return make_result(pa->rows, pa->cols, std::move(out), {pa, pb}, [](detail::Node& self) {
        for (auto& p : self.parents) {
            if (!p->requires_grad) continue;
            p->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    const auto& pa = node_of(a);
    const auto& pb = node_of(b);
    std::vector<double> out(pa->values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pa->values[i] - pb->values[i];
    return make_result(pa->rows, pa->cols, std::move(out), {pa, pb}, [](detail::Node& self) {
        auto& A = *self.parents[0];
        auto& B = *self.parents[1];
        if (A.requires_grad) {
            A.ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) A.grad[i] += self.grad[i];
        }
        if (B.requires_grad) {
            B.ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) B.grad[i] -= self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    const auto& pa = node_of(a);
    const auto& pb = node_of(b);
    std::vector<double> out(pa->values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pa->values[i] * pb->values[i];
    return make_result(pa->rows, pa->cols, std::move(out), {pa, pb}, [](detail::Node& self) {
        auto& A = *self.parents[0];
        auto& B = *self.parents[1];
        if (A.requires_grad) {
            A.ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) A.grad[i] += self.grad[i] * B.values[i];
        }
        if (B.requires_grad) {
            B.ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) B.grad[i] += self.grad[i] * A.values[i];
        }
    });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
    const auto& pa = node_of(a);
    const auto& pr = node_of(row);
    if (pr->rows != 1 || pr->cols != pa->cols) {
        throw DimensionError("add_row: cannot broadcast " + shape_of(row) + " over " + shape_of(a));
    }
    const std::size_t r = pa->rows, c = pa->cols;
    std::vector<double> out(pa->values);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] += pr->values[j];
    return make_result(r, c, std::move(out), {pa, pr}, [r, c](detail::Node& self) {
        auto& A = *self.parents[0];
        auto& R = *self.parents[1];
        if (A.requires_grad) {
            A.ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) A.grad[i] += self.grad[i];
        }
        if (R.requires_grad) {
            R.ensure_grad();
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) R.grad[j] += self.grad[i * c + j];
        }
    });
}

// ---------------------------------------------------------------------------
// Elementwise unary

Tensor scale(const Tensor& a, double s) {
    return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
    return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& a) {
    // Subgradient at exactly 0 is 0.
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
    return unary(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor log(const Tensor& a) {
    return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor pow(const Tensor& a, double exponent) {
    return unary(a, [exponent](double x) { return std::pow(x, exponent); },
                 [exponent](double x, double) { return exponent * std::pow(x, exponent - 1.0); });
}

Tensor logit(const Tensor& a) {
    return unary(a, [](double p) { return std::log(p / (1.0 - p)); },
                 [](double p, double) { return 1.0 / (p * (1.0 - p)); });
}

// ---------------------------------------------------------------------------
// Reductions

Tensor sum(const Tensor& a) {
    const auto& pa = node_of(a);
    double total = 0.0;
    for (double v : pa->values) total += v;
    return make_result(1, 1, {total}, {pa}, [](detail::Node& self) {
        auto& in = *self.parents[0];
        in.ensure_grad();
        for (double& g : in.grad) g += self.grad[0];
    });
}

Tensor mean(const Tensor& a) {
    if (a.size() == 0) throw DimensionError("mean of an empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor row_sum(const Tensor& a) {
    const auto& pa = node_of(a);
    const std::size_t r = pa->rows, c = pa->cols;
    std::vector<double> out(r, 0.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[i] += pa->values[i * c + j];
    return make_result(r, 1, std::move(out), {pa}, [r, c](detail::Node& self) {
        auto& in = *self.parents[0];
        in.ensure_grad();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) in.grad[i * c + j] += self.grad[i];
    });
}

// ---------------------------------------------------------------------------
// Shape manipulation

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    const auto& pa = node_of(a);
    const auto& pb = node_of(b);
    if (pa->cols != pb->cols) {
        throw DimensionError("concat_rows: column counts differ " + shape_of(a) + " vs " + shape_of(b));
    }
    std::vector<double> out(pa->values);
    out.insert(out.end(), pb->values.begin(), pb->values.end());
    const std::size_t split = pa->values.size();
    return make_result(pa->rows + pb->rows, pa->cols, std::move(out), {pa, pb},
                       [split](detail::Node& self) {
                           auto& A = *self.parents[0];
                           auto& B = *self.parents[1];
                           if (A.requires_grad) {
                               A.ensure_grad();
                               for (std::size_t i = 0; i < split; ++i) A.grad[i] += self.grad[i];
                           }
                           if (B.requires_grad) {
                               B.ensure_grad();
                               for (std::size_t i = 0; i < B.grad.size(); ++i)
                                   B.grad[i] += self.grad[split + i];
                           }
                       });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    const auto& pa = node_of(a);
    const auto& pb = node_of(b);
    if (pa->rows != pb->rows) {
        throw DimensionError("concat_cols: row counts differ " + shape_of(a) + " vs " + shape_of(b));
    }
    const std::size_t r = pa->rows, ca = pa->cols, cb = pb->cols, c = ca + cb;
    std::vector<double> out(r * c);
    for (std::size_t i = 0; i < r; ++i) {
        std::copy_n(&pa->values[i * ca], ca, &out[i * c]);
        std::copy_n(&pb->values[i * cb], cb, &out[i * c + ca]);
    }
    return make_result(r, c, std::move(out), {pa, pb}, [r, ca, cb, c](detail::Node& self) {
        auto& A = *self.parents[0];
        auto& B = *self.parents[1];
        if (A.requires_grad) {
            A.ensure_grad();
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < ca; ++j) A.grad[i * ca + j] += self.grad[i * c + j];
        }
        if (B.requires_grad) {
            B.ensure_grad();
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < cb; ++j) B.grad[i * cb + j] += self.grad[i * c + ca + j];
        }
    });
}

Tensor concat_vec(const Tensor& a, const Tensor& b) { return concat_cols(flatten(a), flatten(b)); }

Tensor reshape(const Tensor& a, std::size_t rows, std::size_t cols) {
    const auto& pa = node_of(a);
    if (rows * cols != pa->values.size()) {
        throw DimensionError("reshape: cannot view " + shape_of(a) + " as " + shape_string(rows, cols));
    }
    return make_result(rows, cols, pa->values, {pa}, [](detail::Node& self) {
        auto& in = *self.parents[0];
        in.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i];
    });
}

Tensor flatten(const Tensor& a) { return reshape(a, 1, a.size()); }

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index) {
    const auto& pa = node_of(a);
    const std::size_t c = pa->cols;
    std::vector<double> out(index.size() * c);
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (index[k] >= pa->rows) {
            throw DimensionError("gather_rows: index " + std::to_string(index[k]) + " out of range for " +
                                 shape_of(a));
        }
        std::copy_n(&pa->values[index[k] * c], c, &out[k * c]);
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    const std::size_t rows = idx.size();
    return make_result(rows, c, std::move(out), {pa}, [idx = std::move(idx), c](detail::Node& self) {
        auto& in = *self.parents[0];
        in.ensure_grad();
        for (std::size_t k = 0; k < idx.size(); ++k)
            for (std::size_t j = 0; j < c; ++j) in.grad[idx[k] * c + j] += self.grad[k * c + j];
    });
}

// ---------------------------------------------------------------------------
// Loss

Tensor bce_with_logits(const Tensor& logit_t, int label) {
    if (label != 0 && label != 1) {
        throw ValidationError("bce_with_logits: label must be 0 or 1, got " + std::to_string(label));
    }
    const auto& pz = node_of(logit_t);
    if (pz->values.size() != 1) {
        throw DimensionError("bce_with_logits: expected a scalar logit, got " + shape_of(logit_t));
    }
    const double z = pz->values[0];
    const double y = static_cast<double>(label);
    // max(z,0) - z*y + log(1 + exp(-|z|))
    const double loss = std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    return make_result(1, 1, {loss}, {pz}, [y, z](detail::Node& self) {
        auto& in = *self.parents[0];
        in.ensure_grad();
        in.grad[0] += self.grad[0] * (stable_sigmoid(z) - y);
    });
}

}  // namespace bargrain
