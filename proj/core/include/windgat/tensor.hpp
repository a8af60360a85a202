#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace windgat {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {

// One recorded value in the compute graph. Nodes are created in strictly
// increasing `seq` order, so a parent always has a smaller seq than its child
// and reverse seq order is a valid reverse topological order.
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  std::uint64_t seq = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents' grads.
  std::function<void(Node&)> backward;
};

}  // namespace detail

// Dense row-major f64 tensor with reverse-mode autodiff.
//
// A Tensor is a cheap handle; copies share storage. Operations live in
// ops.hpp and record themselves on the graph whenever any input requires a
// gradient. Calling backward() on a scalar zeroes the gradient of every node
// reachable from it, seeds 1 and accumulates in reverse creation order.
class Tensor {
 public:
  Tensor();

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Direct write access; meant for parameter updates and initialisation.
  std::span<double> mutable_data();
  std::vector<double> to_vector() const;

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  // Empty when no gradient has been computed.
  std::span<double> mutable_grad();
  void zero_grad();

  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  void backward() const;

  // New leaf sharing no graph history (data is copied).
  Tensor detach() const;

  bool same_as(const Tensor& other) const { return node_ == other.node_; }
  explicit operator bool() const { return node_ != nullptr; }

  // Used by ops.cpp to build graph nodes.
  static Tensor from_node(std::shared_ptr<detail::Node> node);
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// While alive, ops on this thread record no graph history (inference mode).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

}  // namespace windgat
