#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "graphite/numerics/tensor.hpp"

namespace graphite::num {

// One recorded value on the dynamic tape. Intermediate nodes keep their
// inputs alive so backward() can reach every Parameter ancestor; the tape is
// simply the DAG of shared nodes hanging off a loss.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  bool is_leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this->grad and adds contributions into inputs' grads.
  std::function<void(Node&)> backward_fn;
};

// Handle to a tape node. Cheap to copy; copies alias the same node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool defined() const noexcept { return static_cast<bool>(node_); }
  const std::shared_ptr<Node>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Wraps a tensor that takes no part in differentiation.
Var constant(Tensor value);

// Learnable tensor with an accumulated gradient. Copies are deep: a copied
// Parameter owns its own value and gradient.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string identifier, Tensor initial);
  Parameter(const Parameter& other);
  Parameter& operator=(const Parameter& other);
  Parameter(Parameter&&) noexcept = default;
  Parameter& operator=(Parameter&&) noexcept = default;

  const std::string& id() const noexcept { return id_; }
  const Tensor& value() const { return node_->value; }
  // Replaces the value; shape must not change.
  void set_value(Tensor value);
  // Mutable view for in-place optimizer updates.
  std::span<double> mutable_values() { return node_->value.data(); }
  const Tensor& grad() const { return node_->grad; }
  void zero_grad();
  Var var() const { return Var(node_); }

 private:
  std::string id_;
  std::shared_ptr<Node> node_;
};

// Accumulates d(loss)/d(parameter) into every reachable Parameter. Gradients
// add onto whatever the parameters already hold; call zero_grad() between
// independent steps.
void backward(const Var& loss);

void zero_grad(std::span<Parameter* const> params);

}  // namespace graphite::num
