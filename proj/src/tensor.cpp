#include "dcat/tensor.hpp"

#include <atomic>
#include <sstream>
#include <unordered_set>

namespace dcat {

namespace {
std::atomic<bool> g_checked_mode{true};
}

void set_checked_mode(bool enabled) { g_checked_mode.store(enabled); }
bool checked_mode() { return g_checked_mode.load(std::memory_order_relaxed); }

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Index shape_size(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

template <typename Scalar>
BasicTensor<Scalar>::BasicTensor(Shape shape, Array values, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  for (Index d : shape) {
    if (d <= 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape));
  }
  if (shape_size(shape) != values.size()) {
    throw DimensionError("shape " + shape_string(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

template <typename Scalar>
BasicTensor<Scalar> BasicTensor<Scalar>::zeros(Shape shape, bool requires_grad) {
  const Index n = shape_size(shape);
  return BasicTensor(std::move(shape), Array::Zero(n), requires_grad);
}

template <typename Scalar>
BasicTensor<Scalar> BasicTensor<Scalar>::constant(Shape shape, Scalar value, bool requires_grad) {
  const Index n = shape_size(shape);
  return BasicTensor(std::move(shape), Array::Constant(n, value), requires_grad);
}

template <typename Scalar>
BasicTensor<Scalar> BasicTensor<Scalar>::from(Shape shape, std::initializer_list<Scalar> values,
                                              bool requires_grad) {
  Array a(static_cast<Index>(values.size()));
  Index i = 0;
  for (Scalar v : values) a[i++] = v;
  return BasicTensor(std::move(shape), std::move(a), requires_grad);
}

template <typename Scalar>
BasicTensor<Scalar> BasicTensor<Scalar>::scalar(Scalar value, bool requires_grad) {
  return BasicTensor(Shape{}, Array::Constant(1, value), requires_grad);
}

template <typename Scalar>
Index BasicTensor<Scalar>::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " +
                         shape_string(shape()));
  }
  return node_->shape[static_cast<std::size_t>(axis)];
}

template <typename Scalar>
Scalar BasicTensor<Scalar>::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

template <typename Scalar>
Scalar BasicTensor<Scalar>::at(std::initializer_list<Index> idx) const {
  if (static_cast<int>(idx.size()) != rank()) throw DimensionError("at(): index rank mismatch");
  Index flat = 0;
  std::size_t axis = 0;
  for (Index i : idx) {
    const Index d = node_->shape[axis++];
    if (i < 0 || i >= d) throw DimensionError("at(): index out of range");
    flat = flat * d + i;
  }
  return node_->value[flat];
}

template <typename Scalar>
BasicTensor<Scalar> BasicTensor<Scalar>::detach(bool requires_grad) const {
  return BasicTensor(shape(), data(), requires_grad);
}

template <typename Scalar>
bool BasicGradTape<Scalar>::contains(const Node* node) const {
  for (const auto& n : ops_) {
    if (n.get() == node) return true;
  }
  return false;
}

template <typename Scalar>
void BasicGradTape<Scalar>::backward(const BasicTensor<Scalar>& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got " +
                        (loss.defined() ? shape_string(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad() || !contains(loss.node().get())) {
    throw ContractError("backward(): loss was not produced under this tape");
  }
  loss.node()->grad_buffer().setOnes();
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    Node& node = **it;
    if (node.grad.size() == 0 || !node.backward) continue;
    node.backward(node);
  }
  for (auto& node : ops_) {
    node->backward = nullptr;
    node->inputs.clear();
  }
  ops_.clear();
}

namespace detail {

template <typename Scalar>
void check_finite(const typename Node<Scalar>::Array& values, const char* op) {
  if (!values.allFinite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
}

template void check_finite<float>(const Node<float>::Array&, const char*);
template void check_finite<double>(const Node<double>::Array&, const char*);

}  // namespace detail

template class BasicTensor<float>;
template class BasicTensor<double>;
template class BasicGradTape<float>;
template class BasicGradTape<double>;

}  // namespace dcat
