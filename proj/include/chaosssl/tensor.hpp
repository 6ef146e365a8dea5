#pragma once

// Dense double-precision tensors with define-by-run reverse-mode autodiff.
//
// A Tensor is a shared handle: copies alias the same storage, which is how
// parameters are shared between a model, its optimizer and the graphs built
// from it. Every op that sees an input with requires_grad() records a node on
// its output; backward() walks those nodes in reverse topological order.

#include <cstddef>
#include <functional>
#include <memory>
#include <new>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chaosssl {

using Shape = std::vector<std::size_t>;

class Tensor;

// Allocator with a fixed 64-byte alignment. Vectorized kernels peel a
// different number of leading elements depending on a buffer's alignment,
// which changes the summation order; fixing the alignment keeps results
// independent of where the heap put each buffer.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using Buffer = std::vector<double, AlignedAllocator<double>>;

namespace detail {

struct TensorImpl;

struct Node {
    std::string op;
    std::vector<std::shared_ptr<TensorImpl>> inputs;
    // Reads the output's data and grad, accumulates into the inputs' grads.
    std::function<void(const TensorImpl& out)> backward;
};

struct TensorImpl {
    Shape shape;
    Buffer data;
    Buffer grad;  // empty until first accumulation
    bool requires_grad = false;
    std::shared_ptr<Node> creator;
};

}  // namespace detail

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
    static Tensor from_buffer(Shape shape, Buffer data, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const noexcept { return impl_ != nullptr; }

    const Shape& shape() const;
    std::size_t dim() const { return shape().size(); }
    std::size_t numel() const { return impl().data.size(); }
    // Only valid for 2-D tensors.
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<const double> data() const { return impl().data; }
    // Direct write access, for initialization and optimizer updates.
    std::span<double> mutable_data() { return impl().data; }
    double item() const;
    double at(std::size_t r, std::size_t c) const;

    bool requires_grad() const { return impl().requires_grad; }
    void set_requires_grad(bool on) { impl().requires_grad = on; }
    bool is_leaf() const { return impl().creator == nullptr; }

    bool has_grad() const { return !impl().grad.empty(); }
    std::span<const double> grad() const { return impl().grad; }
    void zero_grad();

    // Copy of the values with no history and requires_grad off.
    Tensor detach() const;
    // Deep copy keeping requires_grad, dropping history and grad.
    Tensor clone() const;

    bool same_storage(const Tensor& other) const noexcept { return impl_ == other.impl_; }

    // Internal access for ops and the graph walker.
    const std::shared_ptr<detail::TensorImpl>& handle() const { return impl_; }
    explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

private:
    detail::TensorImpl& impl() const;

    std::shared_ptr<detail::TensorImpl> impl_;
};

// --- Linear algebra -------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
// x[B×in] · wᵀ + b, w is [out×in], b (optional) is [out].
Tensor linear(const Tensor& x, const Tensor& w, const std::optional<Tensor>& b = std::nullopt);
// Adds a [n] vector to every row of an [m×n] matrix.
Tensor add_rowwise(const Tensor& x, const Tensor& row);

// --- Elementwise ------------------------------------------------------------
// Binary ops accept equal shapes, or one operand with a single element.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor log(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor clamp(const Tensor& x, double lo, double hi);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

// --- Reductions and row-wise ops ---------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor softmax(const Tensor& logits);
Tensor log_softmax(const Tensor& logits);
// Row-wise log-sum-exp. With exclude_diagonal, entry (i,i) is left out of row i.
Tensor logsumexp_rows(const Tensor& x, bool exclude_diagonal = false);
// Divides each row by its Euclidean norm; zero rows are a DomainError.
Tensor normalize_rows(const Tensor& x);
// out[i] = x[i, cols[i]].
Tensor gather_cols(const Tensor& x, std::span<const std::size_t> cols);
Tensor concat_cols(const Tensor& left, const Tensor& right);
Tensor concat_rows(const Tensor& top, const Tensor& bottom);

// --- Graph and gradients --------------------------------------------------

// Every tensor reachable from a root, ordered so that each node's inputs
// come before it.
class Graph {
public:
    explicit Graph(const Tensor& root);

    const std::vector<Tensor>& order() const noexcept { return order_; }
    std::size_t node_count() const noexcept;

    // Seeds d(root)/d(root) = 1 and propagates to every requires_grad tensor.
    void backward();

private:
    Tensor root_;
    std::vector<Tensor> order_;
};

// Throws ContractError if loss is not a single element.
void backward(const Tensor& loss);

// Central differences (fn(x + h e_i) - fn(x - h e_i)) / 2h for every
// coordinate. x is perturbed in place and restored, so fn may read it through
// any alias (e.g. a model parameter).
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& fn, Tensor x, double step);
double finite_diff_at(const std::function<double(const Tensor&)>& fn, Tensor x, std::size_t index,
                      double step);

}  // namespace chaosssl
