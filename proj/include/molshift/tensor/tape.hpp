//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_TENSOR_TAPE_HPP_
#define MOLSHIFT_TENSOR_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "molshift/errors.hpp"

namespace molshift::tensor {

template <typename Scalar>
using Matrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Derived>
std::string shape_string(const Eigen::EigenBase<Derived> &m) {
  std::ostringstream os;
  os << '[' << m.rows() << 'x' << m.cols() << ']';
  return os.str();
}

// Named, ordered collection of trainable matrices.
template <typename Scalar>
class ParamStore {
public:
  using Mat = Matrix<Scalar>;

  std::size_t add(std::string name, Mat value) {
    if (index_.count(name) > 0)
      throw std::invalid_argument("duplicate parameter '" + name + "'");
    index_.emplace(name, values_.size());
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return values_.size() - 1;
  }

  std::size_t size() const { return values_.size(); }
  const std::string &name(std::size_t i) const { return names_[i]; }
  Mat &value(std::size_t i) { return values_[i]; }
  const Mat &value(std::size_t i) const { return values_[i]; }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end())
      return std::nullopt;
    return it->second;
  }

  std::size_t index(std::string_view name) const {
    auto i = find(name);
    if (!i)
      throw std::out_of_range("no parameter named '" + std::string(name) + "'");
    return *i;
  }

  Mat &operator[](std::string_view name) { return values_[index(name)]; }
  const Mat &operator[](std::string_view name) const { return values_[index(name)]; }

  std::size_t num_scalars() const {
    std::size_t total = 0;
    for (const Mat &v: values_)
      total += static_cast<std::size_t>(v.size());
    return total;
  }

  template <typename Other>
  ParamStore<Other> cast() const {
    ParamStore<Other> out;
    for (std::size_t i = 0; i < size(); ++i)
      out.add(names_[i], values_[i].template cast<Other>());
    return out;
  }

  void set_zero() {
    for (Mat &v: values_)
      v.setZero();
  }

private:
  std::vector<std::string> names_;
  std::vector<Mat> values_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// One gradient buffer per parameter of a store, aligned by index.
template <typename Scalar>
class Gradients {
public:
  using Mat = Matrix<Scalar>;

  Gradients() = default;
  explicit Gradients(const ParamStore<Scalar> &store) {
    grads_.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i)
      grads_.push_back(Mat::Zero(store.value(i).rows(), store.value(i).cols()));
  }

  std::size_t size() const { return grads_.size(); }
  Mat &operator[](std::size_t i) { return grads_[i]; }
  const Mat &operator[](std::size_t i) const { return grads_[i]; }

  Gradients &operator+=(const Gradients &other) {
    if (other.size() != size())
      throw ShapeError("gradient sets differ in size");
    for (std::size_t i = 0; i < size(); ++i)
      grads_[i] += other.grads_[i];
    return *this;
  }

  Gradients &operator*=(Scalar factor) {
    for (Mat &g: grads_)
      g *= factor;
    return *this;
  }

  void set_zero() {
    for (Mat &g: grads_)
      g.setZero();
  }

  // Index of the first parameter holding a NaN or infinity.
  std::optional<std::size_t> first_non_finite() const {
    for (std::size_t i = 0; i < size(); ++i) {
      if (!grads_[i].allFinite())
        return i;
    }
    return std::nullopt;
  }

private:
  std::vector<Mat> grads_;
};

template <typename Scalar>
class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
template <typename Scalar>
class Var {
public:
  using Mat = Matrix<Scalar>;

  Var() = default;
  Var(Tape<Scalar> *tape, std::size_t id): tape_(tape), id_(id) { }

  const Mat &value() const { return tape_->value(id_); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  std::size_t id() const { return id_; }
  Tape<Scalar> *tape() const { return tape_; }
  bool requires_grad() const { return tape_->requires_grad(id_); }

  // Gradient accumulated by the last backward pass (zero if none reached).
  Mat grad() const { return tape_->grad(id_); }

private:
  Tape<Scalar> *tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records a forward computation for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so the tape is topologically
/// sorted by construction and backward() walks it once in reverse. A tape
/// supports a single backward pass; its closures are released afterwards.
template <typename Scalar>
class Tape {
public:
  using Mat = Matrix<Scalar>;
  using BackwardFn = std::function<void(Tape &, const Mat &)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var<Scalar> constant(Mat value) {
    nodes_.push_back(Node { std::move(value), Mat(), false, false, {}, nullptr });
    return Var<Scalar>(this, nodes_.size() - 1);
  }

  // Leaf bound to parameter `index` of `store`; repeated calls share a node.
  // The leaf refers to the stored matrix without copying it, so the store
  // must outlive the tape and stay unmodified until backward() returns.
  Var<Scalar> parameter(const ParamStore<Scalar> &store, std::size_t index) {
    if (bound_store_ != nullptr && bound_store_ != &store)
      throw std::logic_error("a tape can only track one parameter store");
    bound_store_ = &store;
    if (auto it = param_nodes_.find(index); it != param_nodes_.end())
      return Var<Scalar>(this, it->second);
    if (index >= store.size())
      throw std::out_of_range("parameter index " + std::to_string(index) + " out of range");
    nodes_.push_back(Node { Mat(), Mat(), true, false, {}, &store.value(index) });
    param_nodes_.emplace(index, nodes_.size() - 1);
    return Var<Scalar>(this, nodes_.size() - 1);
  }

  Var<Scalar> parameter(const ParamStore<Scalar> &store, std::string_view name) {
    return parameter(store, store.index(name));
  }

  Var<Scalar> record(Mat value, std::initializer_list<Var<Scalar>> inputs,
                     BackwardFn backward) {
    bool needs = false;
    for (const Var<Scalar> &in: inputs) {
      check_owner(in);
      needs |= nodes_[in.id()].requires_grad;
    }
    return push(std::move(value), needs, std::move(backward));
  }

  Var<Scalar> record(Mat value, const std::vector<Var<Scalar>> &inputs,
                     BackwardFn backward) {
    bool needs = false;
    for (const Var<Scalar> &in: inputs) {
      check_owner(in);
      needs |= nodes_[in.id()].requires_grad;
    }
    return push(std::move(value), needs, std::move(backward));
  }

  const Mat &value(std::size_t id) const { return nodes_[id].get(); }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  Mat grad(std::size_t id) const {
    const Node &node = nodes_[id];
    if (!node.has_grad)
      return Mat::Zero(node.get().rows(), node.get().cols());
    return node.grad;
  }

  template <typename Derived>
  void add_grad(std::size_t id, const Eigen::MatrixBase<Derived> &g) {
    Node &node = nodes_[id];
    if (!node.requires_grad)
      return;
    if (!node.has_grad) {
      node.grad = g;
      node.has_grad = true;
    } else {
      node.grad += g;
    }
  }

  void backward(const Var<Scalar> &loss) {
    check_owner(loss);
    if (consumed_)
      throw std::logic_error("backward already ran on this tape");
    if (loss.rows() != 1 || loss.cols() != 1)
      throw ShapeError("backward needs a scalar loss, got " + shape_string(loss.value()));
    if (!nodes_[loss.id()].requires_grad)
      throw std::logic_error("loss is detached from every parameter");

    add_grad(loss.id(), Mat::Ones(1, 1));
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node &node = nodes_[i];
      if (node.has_grad && node.backward)
        node.backward(*this, node.grad);
    }

    for (Node &node: nodes_)
      node.backward = nullptr;
    consumed_ = true;
  }

  // Adds every parameter-leaf gradient into `grads`.
  void accumulate_gradients(Gradients<Scalar> &grads) const {
    for (const auto &[index, id]: param_nodes_) {
      const Node &node = nodes_[id];
      if (node.has_grad)
        grads[index] += node.grad;
    }
  }

private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad;
    bool has_grad;
    BackwardFn backward;
    const Mat *external;

    const Mat &get() const { return external != nullptr ? *external : value; }
  };

  void check_owner(const Var<Scalar> &v) const {
    if (v.tape() != this)
      throw std::logic_error("variable belongs to a different tape");
  }

  Var<Scalar> push(Mat value, bool needs, BackwardFn backward) {
    if (consumed_)
      throw std::logic_error("tape already consumed by backward");
    nodes_.push_back(Node { std::move(value), Mat(), needs, false,
                            needs ? std::move(backward) : BackwardFn(), nullptr });
    return Var<Scalar>(this, nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  std::unordered_map<std::size_t, std::size_t> param_nodes_;
  const ParamStore<Scalar> *bound_store_ = nullptr;
  bool consumed_ = false;
};

}  // namespace molshift::tensor

#endif  // MOLSHIFT_TENSOR_TAPE_HPP_
