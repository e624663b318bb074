//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_TENSOR_OPTIM_HPP_
#define MOLSHIFT_TENSOR_OPTIM_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "molshift/errors.hpp"
#include "molshift/tensor/tape.hpp"

namespace molshift::tensor {

// Glorot/Xavier uniform: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <typename Scalar>
Matrix<Scalar> xavier_uniform(Eigen::Index fan_in, Eigen::Index fan_out,
                              std::mt19937_64 &rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix<Scalar> m(fan_in, fan_out);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<Scalar>(dist(rng));
  return m;
}

template <typename Scalar>
Matrix<Scalar> normal_init(Eigen::Index rows, Eigen::Index cols, double stddev,
                           std::mt19937_64 &rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<Scalar>(dist(rng));
  return m;
}

template <typename Scalar>
struct AdamState {
  using Mat = Matrix<Scalar>;

  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<Mat> m;
  std::vector<Mat> v;

  AdamState() = default;
  AdamState(const ParamStore<Scalar> &params, double learning_rate): lr(learning_rate) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m.push_back(Mat::Zero(params.value(i).rows(), params.value(i).cols()));
      v.push_back(Mat::Zero(params.value(i).rows(), params.value(i).cols()));
    }
  }
};

/// One bias-corrected Adam update, in place. Throws NumericError naming the
/// first parameter whose gradient is not finite; nothing is modified then.
template <typename Scalar>
void adam_step(ParamStore<Scalar> &params, const Gradients<Scalar> &grads,
               AdamState<Scalar> &state) {
  if (grads.size() != params.size() || state.m.size() != params.size()
      || state.v.size() != params.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment counts differ");
  }
  if (!(state.lr > 0))
    throw std::invalid_argument("adam_step: learning rate must be positive");
  if (auto bad = grads.first_non_finite()) {
    throw NumericError("non-finite gradient for parameter '" + params.name(*bad)
                       + "' at step " + std::to_string(state.step + 1));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params.value(i).rows()
        || grads[i].cols() != params.value(i).cols()) {
      throw ShapeError("adam_step: gradient for '" + params.name(i) + "' is "
                       + shape_string(grads[i]) + ", parameter is "
                       + shape_string(params.value(i)));
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const Scalar b1 = static_cast<Scalar>(state.beta1);
  const Scalar b2 = static_cast<Scalar>(state.beta2);
  const Scalar step_size = static_cast<Scalar>(state.lr / (1.0 - std::pow(state.beta1, t)));
  const Scalar v_correction = static_cast<Scalar>(1.0 / (1.0 - std::pow(state.beta2, t)));
  const Scalar eps = static_cast<Scalar>(state.eps);

  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (Scalar(1) - b1) * grads[i];
    state.v[i] = b2 * state.v[i] + (Scalar(1) - b2) * grads[i].cwiseAbs2();
    params.value(i).array() -=
        step_size * state.m[i].array()
        / ((state.v[i].array() * v_correction).sqrt() + eps);
  }
}

}  // namespace molshift::tensor

#endif  // MOLSHIFT_TENSOR_OPTIM_HPP_
