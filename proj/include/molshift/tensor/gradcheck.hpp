//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_TENSOR_GRADCHECK_HPP_
#define MOLSHIFT_TENSOR_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "molshift/tensor/tape.hpp"

namespace molshift::tensor {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Builds a scalar loss on `tape` from parameters of `store`.
template <typename Scalar>
using LossFn = std::function<Var<Scalar>(Tape<Scalar> &, const ParamStore<Scalar> &)>;

/// Compares tape gradients of every parameter entry with central differences
/// (f(x+h) - f(x-h)) / 2h. The relative error of an entry is
/// |a - n| / max(|a|, |n|, floor); `floor` keeps entries whose true gradient
/// is zero from being judged on rounding noise alone.
template <typename Scalar>
GradCheckResult check_gradients(ParamStore<Scalar> &store, const LossFn<Scalar> &loss,
                                double h = 1e-5, double floor = 1e-6) {
  Gradients<Scalar> analytic(store);
  {
    Tape<Scalar> tape;
    tape.backward(loss(tape, store));
    tape.accumulate_gradients(analytic);
  }
  auto evaluate = [&]() {
    Tape<Scalar> tape;
    return static_cast<double>(loss(tape, store).value()(0, 0));
  };

  GradCheckResult result;
  for (std::size_t p = 0; p < store.size(); ++p) {
    for (Eigen::Index k = 0; k < store.value(p).size(); ++k) {
      Scalar &x = store.value(p).data()[k];
      const Scalar saved = x;
      x = saved + static_cast<Scalar>(h);
      const double up = evaluate();
      x = saved - static_cast<Scalar>(h);
      const double down = evaluate();
      x = saved;

      const double numeric = (up - down) / (2.0 * h);
      const double exact = static_cast<double>(analytic[p].data()[k]);
      const double denom = std::max({ std::abs(numeric), std::abs(exact), floor });
      const double err = std::abs(numeric - exact) / denom;
      ++result.checked;
      if (err > result.max_rel_error || result.worst_index < 0) {
        result.max_rel_error = err;
        result.worst_param = store.name(p);
        result.worst_index = k;
        result.analytic = exact;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace molshift::tensor

#endif  // MOLSHIFT_TENSOR_GRADCHECK_HPP_
