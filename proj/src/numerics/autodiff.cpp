#include "graphite/numerics/autodiff.hpp"

#include <unordered_set>

#include "graphite/errors.hpp"

namespace graphite::num {

Var constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = "constant";
  return Var(std::move(node));
}

Parameter::Parameter(std::string identifier, Tensor initial) : id_(std::move(identifier)) {
  if (!initial.all_finite()) throw NumericError("parameter '" + id_ + "' initialised non-finite");
  node_ = std::make_shared<Node>();
  node_->grad = Tensor(initial.shape());
  node_->value = std::move(initial);
  node_->requires_grad = true;
  node_->op = "parameter";
}

Parameter::Parameter(const Parameter& other) : id_(other.id_) {
  if (other.node_) {
    node_ = std::make_shared<Node>();
    node_->value = other.node_->value;
    node_->grad = other.node_->grad;
    node_->requires_grad = true;
    node_->op = "parameter";
  }
}

Parameter& Parameter::operator=(const Parameter& other) {
  if (this != &other) {
    Parameter copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Parameter::set_value(Tensor value) {
  if (value.shape() != node_->value.shape()) {
    throw DimensionError("parameter '" + id_ + "' expects shape " +
                         to_string(node_->value.shape()) + ", got " + to_string(value.shape()));
  }
  node_->value = std::move(value);
}

void Parameter::zero_grad() { node_->grad.fill(0.0); }

void zero_grad(std::span<Parameter* const> params) {
  for (auto* p : params) p->zero_grad();
}

void backward(const Var& loss) {
  if (!loss.defined()) throw ContractError("backward on an undefined value");
  if (loss.value().size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        to_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* node : order) {
    if (!node->is_leaf) node->grad = Tensor(node->value.shape());
  }
  loss.node()->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward_fn) node->backward_fn(*node);
  }
  // Release intermediate gradient buffers; leaves keep their accumulation.
  for (Node* node : order) {
    if (!node->is_leaf) node->grad = Tensor();
  }
}

}  // namespace graphite::num
