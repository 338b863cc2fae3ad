#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dcat {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string shape_string(const Shape& shape);
Index shape_size(const Shape& shape);

// Checked mode rejects NaN/Inf at every op boundary. On by default.
void set_checked_mode(bool enabled);
bool checked_mode();

template <typename Scalar>
class BasicTensor;

namespace detail {

template <typename Scalar>
struct Node {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Shape shape;
  Array value;
  Array grad;  // empty until something is accumulated
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Propagates this node's grad into its inputs' grads.
  std::function<void(Node&)> backward;

  Array& grad_buffer() {
    if (grad.size() == 0) grad = Array::Zero(value.size());
    return grad;
  }
};

}  // namespace detail

/// Ordered record of the differentiable ops executed while it is active.
///
/// Constructing a tape activates it for the current thread; the destructor
/// restores whichever tape was active before. Ops only record when a tape is
/// active and at least one of their inputs requires a gradient, so inference
/// outside a tape builds no graph at all.
template <typename Scalar>
class BasicGradTape {
 public:
  using Node = detail::Node<Scalar>;

  BasicGradTape() : previous_(active_) { active_ = this; }
  ~BasicGradTape() { active_ = previous_; }
  BasicGradTape(const BasicGradTape&) = delete;
  BasicGradTape& operator=(const BasicGradTape&) = delete;

  static BasicGradTape* active() { return active_; }

  void record(std::shared_ptr<Node> node) { ops_.push_back(std::move(node)); }
  std::size_t size() const { return ops_.size(); }
  bool contains(const Node* node) const;

  /// Runs reverse accumulation from `loss` and consumes the tape.
  void backward(const BasicTensor<Scalar>& loss);

 private:
  std::vector<std::shared_ptr<Node>> ops_;
  BasicGradTape* previous_;
  static thread_local BasicGradTape* active_;
};

template <typename Scalar>
thread_local BasicGradTape<Scalar>* BasicGradTape<Scalar>::active_ = nullptr;

/// Dense row-major tensor. Copies share storage; values are treated as
/// immutable once an op has consumed them, except through mutable_data() on
/// parameters between steps.
template <typename Scalar>
class BasicTensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Node = detail::Node<Scalar>;

  BasicTensor() = default;
  BasicTensor(Shape shape, Array values, bool requires_grad = false);

  static BasicTensor zeros(Shape shape, bool requires_grad = false);
  static BasicTensor constant(Shape shape, Scalar value, bool requires_grad = false);
  static BasicTensor from(Shape shape, std::initializer_list<Scalar> values,
                          bool requires_grad = false);
  static BasicTensor scalar(Scalar value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  Index dim(int axis) const;
  Index size() const { return node_->value.size(); }

  const Array& data() const { return node_->value; }
  Array& mutable_data() { return node_->value; }
  Scalar item() const;
  Scalar operator[](Index i) const { return node_->value[i]; }
  Scalar at(std::initializer_list<Index> idx) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value) { node_->requires_grad = value; }
  bool has_grad() const { return node_->grad.size() != 0; }
  const Array& grad() const { return node_->grad; }
  Array& mutable_grad() { return node_->grad_buffer(); }
  void zero_grad() { node_->grad.resize(0); }

  /// Deep copy of the values with no graph attached.
  BasicTensor detach(bool requires_grad = false) const;

  template <typename Other>
  BasicTensor<Other> cast() const {
    return BasicTensor<Other>(shape(), data().template cast<Other>());
  }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

using Tensor = BasicTensor<float>;
using GradTape = BasicGradTape<float>;

template <typename Scalar>
void backward(const BasicTensor<Scalar>& loss, BasicGradTape<Scalar>& tape) {
  tape.backward(loss);
}

namespace detail {

template <typename Scalar>
void check_finite(const typename Node<Scalar>::Array& values, const char* op);

/// Wraps a freshly computed op result. When a tape is active and any input
/// tracks gradients, the result is wired into the graph and recorded.
template <typename Scalar>
BasicTensor<Scalar> make_result(
    Shape shape, typename Node<Scalar>::Array value,
    std::vector<std::shared_ptr<Node<Scalar>>> inputs,
    std::function<void(Node<Scalar>&)> backward, const char* op) {
  if (checked_mode()) check_finite<Scalar>(value, op);
  BasicTensor<Scalar> out(std::move(shape), std::move(value));
  auto* tape = BasicGradTape<Scalar>::active();
  if (tape == nullptr) return out;
  bool track = false;
  for (const auto& in : inputs) track = track || in->requires_grad;
  if (!track) return out;
  const auto& node = out.node();
  node->requires_grad = true;
  node->inputs = std::move(inputs);
  node->backward = std::move(backward);
  tape->record(node);
  return out;
}

}  // namespace detail

}  // namespace dcat
