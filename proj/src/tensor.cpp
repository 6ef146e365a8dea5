#include "chaosssl/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "chaosssl/errors.hpp"

namespace chaosssl {

namespace {

using detail::Node;
using detail::TensorImpl;
using ImplPtr = std::shared_ptr<TensorImpl>;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

ConstMatMap as_matrix(const TensorImpl& t) {
    return {t.data.data(), static_cast<Eigen::Index>(t.shape[0]), static_cast<Eigen::Index>(t.shape[1])};
}

Buffer& grad_of(TensorImpl& t) {
    if (t.grad.empty()) t.grad.assign(t.data.size(), 0.0);
    return t.grad;
}

MatMap grad_matrix(TensorImpl& t) {
    auto& g = grad_of(t);
    return {g.data(), static_cast<Eigen::Index>(t.shape[0]), static_cast<Eigen::Index>(t.shape[1])};
}

ConstMatMap out_grad_matrix(const TensorImpl& out) {
    return {out.grad.data(), static_cast<Eigen::Index>(out.shape[0]), static_cast<Eigen::Index>(out.shape[1])};
}

const TensorImpl& get(const Tensor& t) {
    if (!t.defined()) throw ContractError("operation on an undefined tensor");
    return *t.handle();
}

void require_matrix(const Tensor& t, const char* op) {
    if (get(t).shape.size() != 2) {
        throw DimensionError(std::string(op) + ": expected a 2-D tensor, got " + shape_str(t.shape()));
    }
}

// Builds the output tensor and, when any input needs gradients, the node that
// carries the backward rule.
Tensor make_result(Shape shape, Buffer data, std::string op, std::vector<ImplPtr> inputs,
                   std::function<void(const TensorImpl&)> backward_fn) {
    auto out = std::make_shared<TensorImpl>();
    out->shape = std::move(shape);
    out->data = std::move(data);
    const bool needs_grad =
        std::any_of(inputs.begin(), inputs.end(), [](const ImplPtr& p) { return p->requires_grad; });
    if (needs_grad) {
        out->requires_grad = true;
        auto node = std::make_shared<Node>();
        node->op = std::move(op);
        node->inputs = std::move(inputs);
        node->backward = std::move(backward_fn);
        out->creator = std::move(node);
    }
    return Tensor(std::move(out));
}

enum class Broadcast { Same, LeftScalar, RightScalar };

Broadcast check_broadcast(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() == b.shape()) return Broadcast::Same;
    if (a.numel() == 1) return Broadcast::LeftScalar;
    if (b.numel() == 1) return Broadcast::RightScalar;
    throw DimensionError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " are not broadcast-compatible");
}

template <typename Fwd, typename DA, typename DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, Fwd fwd, DA da, DB db) {
    const auto mode = check_broadcast(a, b, op);
    const auto& ai = get(a);
    const auto& bi = get(b);
    const Shape shape = mode == Broadcast::LeftScalar ? bi.shape : ai.shape;
    const std::size_t n = shape_numel(shape);
    auto a_at = [mode](const TensorImpl& t, std::size_t i) { return mode == Broadcast::LeftScalar ? t.data[0] : t.data[i]; };
    auto b_at = [mode](const TensorImpl& t, std::size_t i) { return mode == Broadcast::RightScalar ? t.data[0] : t.data[i]; };
    Buffer out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fwd(a_at(ai, i), b_at(bi, i));

    ImplPtr pa = a.handle();
    ImplPtr pb = b.handle();
    return make_result(shape, std::move(out), op, {pa, pb}, [pa, pb, mode, a_at, b_at, da, db](const TensorImpl& o) {
        const std::size_t n = o.data.size();
        if (pa->requires_grad) {
            auto& g = grad_of(*pa);
            for (std::size_t i = 0; i < n; ++i) {
                const double v = o.grad[i] * da(a_at(*pa, i), b_at(*pb, i));
                if (mode == Broadcast::LeftScalar) g[0] += v; else g[i] += v;
            }
        }
        if (pb->requires_grad) {
            auto& g = grad_of(*pb);
            for (std::size_t i = 0; i < n; ++i) {
                const double v = o.grad[i] * db(a_at(*pa, i), b_at(*pb, i));
                if (mode == Broadcast::RightScalar) g[0] += v; else g[i] += v;
            }
        }
    });
}

// Elementwise unary op whose derivative is expressed from input x and output y.
template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& x, const char* op, Fwd fwd, Deriv deriv) {
    const auto& xi = get(x);
    Buffer out(xi.data.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xi.data[i]);
    ImplPtr px = x.handle();
    return make_result(xi.shape, std::move(out), op, {px}, [px, deriv](const TensorImpl& o) {
        auto& g = grad_of(*px);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * deriv(px->data[i], o.data[i]);
    });
}

double stable_sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

}  // namespace

// --- Tensor -------------------------------------------------------------------

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << ']';
    return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const std::size_t n = shape_numel(shape);
    return from_buffer(std::move(shape), Buffer(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
    return from_buffer(std::move(shape), Buffer(data.begin(), data.end()), requires_grad);
}

Tensor Tensor::from_buffer(Shape shape, Buffer data, bool requires_grad) {
    if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
    for (auto d : shape) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
    }
    if (shape_numel(shape) != data.size()) {
        throw DimensionError("shape " + shape_str(shape) + " does not match " + std::to_string(data.size()) +
                             " values");
    }
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from_buffer({1}, Buffer{value}, requires_grad); }

detail::TensorImpl& Tensor::impl() const {
    if (!impl_) throw ContractError("access to an undefined tensor");
    return *impl_;
}

const Shape& Tensor::shape() const { return impl().shape; }

std::size_t Tensor::rows() const {
    if (dim() != 2) throw DimensionError("rows() on non-matrix tensor " + shape_str(shape()));
    return shape()[0];
}

std::size_t Tensor::cols() const {
    if (dim() != 2) throw DimensionError("cols() on non-matrix tensor " + shape_str(shape()));
    return shape()[1];
}

double Tensor::item() const {
    if (numel() != 1) throw ContractError("item() on tensor with " + std::to_string(numel()) + " elements");
    return impl().data[0];
}

double Tensor::at(std::size_t r, std::size_t c) const { return impl().data[r * cols() + c]; }

void Tensor::zero_grad() {
    auto& g = impl().grad;
    std::fill(g.begin(), g.end(), 0.0);
}

Tensor Tensor::detach() const { return from_buffer(shape(), impl().data, false); }

Tensor Tensor::clone() const { return from_buffer(shape(), impl().data, requires_grad()); }

// --- Linear algebra -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
    }
    const std::size_t m = a.rows(), n = b.cols();
    Buffer out(m * n);
    MatMap(out.data(), m, n).noalias() = as_matrix(get(a)) * as_matrix(get(b));
    ImplPtr pa = a.handle(), pb = b.handle();
    return make_result({m, n}, std::move(out), "matmul", {pa, pb}, [pa, pb](const TensorImpl& o) {
        const auto g = out_grad_matrix(o);
        if (pa->requires_grad) grad_matrix(*pa).noalias() += g * as_matrix(*pb).transpose();
        if (pb->requires_grad) grad_matrix(*pb).noalias() += as_matrix(*pa).transpose() * g;
    });
}

Tensor transpose(const Tensor& a) {
    require_matrix(a, "transpose");
    const std::size_t m = a.rows(), n = a.cols();
    Buffer out(m * n);
    MatMap(out.data(), n, m) = as_matrix(get(a)).transpose();
    ImplPtr pa = a.handle();
    return make_result({n, m}, std::move(out), "transpose", {pa}, [pa](const TensorImpl& o) {
        grad_matrix(*pa) += out_grad_matrix(o).transpose();
    });
}

Tensor linear(const Tensor& x, const Tensor& w, const std::optional<Tensor>& b) {
    require_matrix(x, "linear");
    require_matrix(w, "linear");
    if (x.cols() != w.cols()) {
        throw DimensionError("linear: input width " + std::to_string(x.cols()) + " does not match weight " +
                             shape_str(w.shape()));
    }
    const std::size_t batch = x.rows(), out_dim = w.rows();
    if (b && (b->dim() != 1 || b->numel() != out_dim)) {
        throw DimensionError("linear: bias " + shape_str(b->shape()) + " does not match output width " +
                             std::to_string(out_dim));
    }
    Buffer out(batch * out_dim);
    MatMap y(out.data(), batch, out_dim);
    y.noalias() = as_matrix(get(x)) * as_matrix(get(w)).transpose();
    if (b) y.rowwise() += ConstVecMap(b->data().data(), out_dim).transpose();

    ImplPtr px = x.handle(), pw = w.handle();
    ImplPtr pb = b ? b->handle() : nullptr;
    std::vector<ImplPtr> inputs{px, pw};
    if (pb) inputs.push_back(pb);
    return make_result({batch, out_dim}, std::move(out), "linear", std::move(inputs),
                       [px, pw, pb](const TensorImpl& o) {
                           const auto g = out_grad_matrix(o);
                           if (px->requires_grad) grad_matrix(*px).noalias() += g * as_matrix(*pw);
                           if (pw->requires_grad) grad_matrix(*pw).noalias() += g.transpose() * as_matrix(*px);
                           if (pb && pb->requires_grad) {
                               auto& gb = grad_of(*pb);
                               VecMap(gb.data(), gb.size()) += g.colwise().sum().transpose();
                           }
                       });
}

Tensor add_rowwise(const Tensor& x, const Tensor& row) {
    require_matrix(x, "add_rowwise");
    if (row.dim() != 1 || row.numel() != x.cols()) {
        throw DimensionError("add_rowwise: row " + shape_str(row.shape()) + " does not match " +
                             shape_str(x.shape()));
    }
    const std::size_t m = x.rows(), n = x.cols();
    Buffer out(get(x).data);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] += row.data()[j];
    ImplPtr px = x.handle(), pr = row.handle();
    return make_result({m, n}, std::move(out), "add_rowwise", {px, pr}, [px, pr, m, n](const TensorImpl& o) {
        if (px->requires_grad) {
            auto& g = grad_of(*px);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
        }
        if (pr->requires_grad) {
            auto& g = grad_of(*pr);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) g[j] += o.grad[i * n + j];
        }
    });
}

// --- Elementwise ------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    return binary(
        a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
        [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary(
        a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
        [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary(
        a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
        [](double x, double) { return x; });
}

Tensor scale(const Tensor& a, double factor) {
    return unary(a, "scale", [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor relu(const Tensor& x) {
    return unary(x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
                 [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
    return unary(x, "sigmoid", stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor log(const Tensor& x) {
    for (double v : x.data()) {
        if (!(v > 0.0)) throw DomainError("log of nonpositive value " + std::to_string(v));
    }
    return unary(x, "log", [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor exp(const Tensor& x) {
    auto out = unary(x, "exp", [](double v) { return std::exp(v); }, [](double, double y) { return y; });
    for (double v : out.data()) {
        if (!std::isfinite(v)) throw DomainError("exp overflow");
    }
    return out;
}

Tensor clamp(const Tensor& x, double lo, double hi) {
    if (lo > hi) throw ContractError("clamp: lower bound exceeds upper bound");
    return unary(x, "clamp", [lo, hi](double v) { return std::clamp(v, lo, hi); },
                 [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

// --- Reductions and row-wise ops -----------------------------------------------

Tensor sum(const Tensor& x) {
    const auto& xi = get(x);
    double s = 0.0;
    for (double v : xi.data) s += v;
    ImplPtr px = x.handle();
    return make_result({1}, {s}, "sum", {px}, [px](const TensorImpl& o) {
        auto& g = grad_of(*px);
        for (auto& v : g) v += o.grad[0];
    });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor softmax(const Tensor& logits) {
    require_matrix(logits, "softmax");
    const std::size_t m = logits.rows(), n = logits.cols();
    const auto& in = get(logits).data;
    Buffer out(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = in.data() + i * n;
        const double mx = *std::max_element(row, row + n);
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) z += (out[i * n + j] = std::exp(row[j] - mx));
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= z;
    }
    ImplPtr px = logits.handle();
    return make_result({m, n}, std::move(out), "softmax", {px}, [px, m, n](const TensorImpl& o) {
        auto& g = grad_of(*px);
        for (std::size_t i = 0; i < m; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += o.grad[i * n + j] * o.data[i * n + j];
            for (std::size_t j = 0; j < n; ++j) g[i * n + j] += o.data[i * n + j] * (o.grad[i * n + j] - dot);
        }
    });
}

Tensor log_softmax(const Tensor& logits) {
    require_matrix(logits, "log_softmax");
    const std::size_t m = logits.rows(), n = logits.cols();
    const auto& in = get(logits).data;
    Buffer out(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = in.data() + i * n;
        const double mx = *std::max_element(row, row + n);
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) z += std::exp(row[j] - mx);
        const double lse = mx + std::log(z);
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = row[j] - lse;
    }
    ImplPtr px = logits.handle();
    return make_result({m, n}, std::move(out), "log_softmax", {px}, [px, m, n](const TensorImpl& o) {
        auto& g = grad_of(*px);
        for (std::size_t i = 0; i < m; ++i) {
            double gsum = 0.0;
            for (std::size_t j = 0; j < n; ++j) gsum += o.grad[i * n + j];
            for (std::size_t j = 0; j < n; ++j)
                g[i * n + j] += o.grad[i * n + j] - std::exp(o.data[i * n + j]) * gsum;
        }
    });
}

Tensor logsumexp_rows(const Tensor& x, bool exclude_diagonal) {
    require_matrix(x, "logsumexp_rows");
    const std::size_t m = x.rows(), n = x.cols();
    if (exclude_diagonal && n < 2) throw DimensionError("logsumexp_rows: nothing left after excluding the diagonal");
    const auto& in = get(x).data;
    auto skip = [exclude_diagonal](std::size_t i, std::size_t j) { return exclude_diagonal && i == j; };
    Buffer out(m);
    for (std::size_t i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (!skip(i, j)) mx = std::max(mx, in[i * n + j]);
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (!skip(i, j)) z += std::exp(in[i * n + j] - mx);
        out[i] = mx + std::log(z);
    }
    ImplPtr px = x.handle();
    return make_result({m}, std::move(out), "logsumexp_rows", {px}, [px, m, n, skip](const TensorImpl& o) {
        auto& g = grad_of(*px);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (!skip(i, j)) g[i * n + j] += o.grad[i] * std::exp(px->data[i * n + j] - o.data[i]);
    });
}

Tensor normalize_rows(const Tensor& x) {
    require_matrix(x, "normalize_rows");
    const std::size_t m = x.rows(), n = x.cols();
    const auto& in = get(x).data;
    Buffer out(m * n);
    Buffer norms(m);
    for (std::size_t i = 0; i < m; ++i) {
        double ss = 0.0;
        for (std::size_t j = 0; j < n; ++j) ss += in[i * n + j] * in[i * n + j];
        norms[i] = std::sqrt(ss);
        if (norms[i] == 0.0) throw DomainError("normalize_rows: row " + std::to_string(i) + " has zero norm");
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = in[i * n + j] / norms[i];
    }
    ImplPtr px = x.handle();
    return make_result({m, n}, std::move(out), "normalize_rows", {px},
                       [px, m, n, norms = std::move(norms)](const TensorImpl& o) {
                           auto& g = grad_of(*px);
                           for (std::size_t i = 0; i < m; ++i) {
                               double dot = 0.0;
                               for (std::size_t j = 0; j < n; ++j) dot += o.grad[i * n + j] * o.data[i * n + j];
                               for (std::size_t j = 0; j < n; ++j)
                                   g[i * n + j] += (o.grad[i * n + j] - o.data[i * n + j] * dot) / norms[i];
                           }
                       });
}

Tensor gather_cols(const Tensor& x, std::span<const std::size_t> cols) {
    require_matrix(x, "gather_cols");
    const std::size_t m = x.rows(), n = x.cols();
    if (cols.size() != m) throw DimensionError("gather_cols: need one column index per row");
    std::vector<std::size_t> idx(cols.begin(), cols.end());
    Buffer out(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (idx[i] >= n) throw DimensionError("gather_cols: column index out of range");
        out[i] = x.data()[i * n + idx[i]];
    }
    ImplPtr px = x.handle();
    return make_result({m}, std::move(out), "gather_cols", {px}, [px, n, idx = std::move(idx)](const TensorImpl& o) {
        auto& g = grad_of(*px);
        for (std::size_t i = 0; i < idx.size(); ++i) g[i * n + idx[i]] += o.grad[i];
    });
}

Tensor concat_cols(const Tensor& left, const Tensor& right) {
    require_matrix(left, "concat_cols");
    require_matrix(right, "concat_cols");
    if (left.rows() != right.rows()) throw DimensionError("concat_cols: row counts differ");
    const std::size_t m = left.rows(), n1 = left.cols(), n2 = right.cols(), n = n1 + n2;
    Buffer out(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        std::copy_n(left.data().data() + i * n1, n1, out.data() + i * n);
        std::copy_n(right.data().data() + i * n2, n2, out.data() + i * n + n1);
    }
    ImplPtr pl = left.handle(), pr = right.handle();
    return make_result({m, n}, std::move(out), "concat_cols", {pl, pr}, [pl, pr, m, n1, n2, n](const TensorImpl& o) {
        if (pl->requires_grad) {
            auto& g = grad_of(*pl);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n1; ++j) g[i * n1 + j] += o.grad[i * n + j];
        }
        if (pr->requires_grad) {
            auto& g = grad_of(*pr);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n2; ++j) g[i * n2 + j] += o.grad[i * n + n1 + j];
        }
    });
}

Tensor concat_rows(const Tensor& top, const Tensor& bottom) {
    require_matrix(top, "concat_rows");
    require_matrix(bottom, "concat_rows");
    if (top.cols() != bottom.cols()) throw DimensionError("concat_rows: column counts differ");
    const std::size_t n_top = top.numel();
    Buffer out(top.data().begin(), top.data().end());
    out.insert(out.end(), bottom.data().begin(), bottom.data().end());
    ImplPtr pt = top.handle(), pb = bottom.handle();
    return make_result({top.rows() + bottom.rows(), top.cols()}, std::move(out), "concat_rows", {pt, pb},
                       [pt, pb, n_top](const TensorImpl& o) {
                           if (pt->requires_grad) {
                               auto& g = grad_of(*pt);
                               for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
                           }
                           if (pb->requires_grad) {
                               auto& g = grad_of(*pb);
                               for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[n_top + i];
                           }
                       });
}

// --- Graph --------------------------------------------------------------------

Graph::Graph(const Tensor& root) : root_(root) {
    if (!root.defined()) throw ContractError("graph of an undefined tensor");
    // Iterative post-order DFS: a tensor is emitted after all of its inputs.
    std::unordered_set<const TensorImpl*> visited;
    std::vector<std::pair<ImplPtr, std::size_t>> stack;
    stack.emplace_back(root.handle(), 0);
    visited.insert(root.handle().get());
    while (!stack.empty()) {
        auto& [impl, next] = stack.back();
        const auto* inputs = impl->creator ? &impl->creator->inputs : nullptr;
        if (inputs && next < inputs->size()) {
            ImplPtr child = (*inputs)[next++];
            if (visited.insert(child.get()).second) stack.emplace_back(std::move(child), 0);
            continue;
        }
        order_.emplace_back(impl);
        stack.pop_back();
    }
}

std::size_t Graph::node_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(order_.begin(), order_.end(), [](const Tensor& t) { return !t.is_leaf(); }));
}

void Graph::backward() {
    if (root_.numel() != 1) {
        throw ContractError("backward needs a scalar loss, got shape " + shape_str(root_.shape()));
    }
    auto& root = *root_.handle();
    if (!root.requires_grad) return;
    grad_of(root)[0] += 1.0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        const auto& impl = *it->handle();
        if (!impl.creator) continue;
        if (impl.grad.empty()) continue;  // not on any path from the root with nonzero seed
        impl.creator->backward(impl);
    }
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ContractError("backward needs a scalar loss");
    }
    Graph(loss).backward();
}

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& fn, Tensor x, double step) {
    Buffer out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = finite_diff_at(fn, x, i, step);
    return Tensor::from_buffer(x.shape(), std::move(out));
}

double finite_diff_at(const std::function<double(const Tensor&)>& fn, Tensor x, std::size_t index, double step) {
    if (index >= x.numel()) throw ContractError("finite_diff_at: index out of range");
    auto values = x.mutable_data();
    const double saved = values[index];
    values[index] = saved + step;
    const double plus = fn(x);
    values[index] = saved - step;
    const double minus = fn(x);
    values[index] = saved;
    return (plus - minus) / (2.0 * step);
}

}  // namespace chaosssl
