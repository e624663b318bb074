//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_TENSOR_OPS_HPP_
#define MOLSHIFT_TENSOR_OPS_HPP_

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "molshift/tensor/tape.hpp"

// Differentiable primitives. Every function evaluates eagerly, records a
// backward rule on the tape of its inputs and returns the new node.
namespace molshift::tensor {

namespace internal {

template <typename Scalar>
Tape<Scalar> &tape_of(const Var<Scalar> &a, const Var<Scalar> &b) {
  if (a.tape() != b.tape())
    throw std::logic_error("operands live on different tapes");
  return *a.tape();
}

template <typename Scalar>
void require_same_shape(const char *op, const Var<Scalar> &a, const Var<Scalar> &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.value())
                     + " vs " + shape_string(b.value()));
  }
}

}  // namespace internal

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar> &a, const Var<Scalar> &b) {
  Tape<Scalar> &tape = internal::tape_of(a, b);
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: shape mismatch " + shape_string(a.value()) + " vs "
                     + shape_string(b.value()));
  }
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(a.value() * b.value(), { a, b },
                     [ia, ib](Tape<Scalar> &t, const Matrix<Scalar> &g) {
                       t.add_grad(ia, g * t.value(ib).transpose());
                       t.add_grad(ib, t.value(ia).transpose() * g);
                     });
}

template <typename Scalar>
Var<Scalar> transpose(const Var<Scalar> &a) {
  const std::size_t ia = a.id();
  return a.tape()->record(a.value().transpose(), { a },
                          [ia](Tape<Scalar> &t, const Matrix<Scalar> &g) {
                            t.add_grad(ia, g.transpose());
                          });
}

template <typename Scalar>
Var<Scalar> add(const Var<Scalar> &a, const Var<Scalar> &b) {
  Tape<Scalar> &tape = internal::tape_of(a, b);
  internal::require_same_shape("add", a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(a.value() + b.value(), { a, b },
                     [ia, ib](Tape<Scalar> &t, const Matrix<Scalar> &g) {
                       t.add_grad(ia, g);
                       t.add_grad(ib, g);
                     });
}

// a + row, with the 1 x c row broadcast over every row of a.
template <typename Scalar>
Var<Scalar> add_row(const Var<Scalar> &a, const Var<Scalar> &row) {
  Tape<Scalar> &tape = internal::tape_of(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError("add_row: shape mismatch " + shape_string(a.value()) + " vs "
                     + shape_string(row.value()));
  }
  const std::size_t ia = a.id(), ir = row.id();
  Matrix<Scalar> out = a.value().rowwise() + row.value().row(0);
  return tape.record(std::move(out), { a, row },
                     [ia, ir](Tape<Scalar> &t, const Matrix<Scalar> &g) {
                       t.add_grad(ia, g);
                       t.add_grad(ir, g.colwise().sum());
                     });
}

// Elementwise product.
template <typename Scalar>
Var<Scalar> mul(const Var<Scalar> &a, const Var<Scalar> &b) {
  Tape<Scalar> &tape = internal::tape_of(a, b);
  internal::require_same_shape("mul", a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(a.value().cwiseProduct(b.value()), { a, b },
                     [ia, ib](Tape<Scalar> &t, const Matrix<Scalar> &g) {
                       t.add_grad(ia, g.cwiseProduct(t.value(ib)));
                       t.add_grad(ib, g.cwiseProduct(t.value(ia)));
                     });
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar> &a, Scalar factor) {
  const std::size_t ia = a.id();
  return a.tape()->record(a.value() * factor, { a },
                          [ia, factor](Tape<Scalar> &t, const Matrix<Scalar> &g) {
                            t.add_grad(ia, g * factor);
                          });
}

// Elementwise product with a constant mask (dropout and similar).
template <typename Scalar>
Var<Scalar> mul_constant(const Var<Scalar> &a, Matrix<Scalar> mask) {
  if (mask.rows() != a.rows() || mask.cols() != a.cols()) {
    throw ShapeError("mul_constant: shape mismatch " + shape_string(a.value()) + " vs "
                     + shape_string(mask));
  }
  const std::size_t ia = a.id();
  Matrix<Scalar> out = a.value().cwiseProduct(mask);
  return a.tape()->record(std::move(out), { a },
                          [ia, mask = std::move(mask)](Tape<Scalar> &t,
                                                       const Matrix<Scalar> &g) {
                            t.add_grad(ia, g.cwiseProduct(mask));
                          });
}

template <typename Scalar>
Var<Scalar> softmax_rows(const Var<Scalar> &a) {
  Matrix<Scalar> y = a.value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    y.row(r).array() -= y.row(r).maxCoeff();
    y.row(r) = y.row(r).array().exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  const std::size_t ia = a.id();
  Matrix<Scalar> saved = y;
  return a.tape()->record(std::move(y), { a },
                          [ia, y = std::move(saved)](Tape<Scalar> &t,
                                                     const Matrix<Scalar> &g) {
                            Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dots =
                                g.cwiseProduct(y).rowwise().sum();
                            t.add_grad(ia, y.cwiseProduct((g.colwise() - dots).eval()));
                          });
}

/// Row-wise layer normalization with affine gamma/beta (both 1 x c).
/// Rows whose entries are all equal normalize to exactly zero.
template <typename Scalar>
Var<Scalar> layer_norm(const Var<Scalar> &x, const Var<Scalar> &gamma,
                       const Var<Scalar> &beta, Scalar eps = Scalar(1e-5)) {
  Tape<Scalar> &tape = internal::tape_of(x, gamma);
  if (gamma.rows() != 1 || gamma.cols() != x.cols() || beta.rows() != 1
      || beta.cols() != x.cols()) {
    throw ShapeError("layer_norm: shape mismatch " + shape_string(x.value()) + " vs "
                     + shape_string(gamma.value()) + "/" + shape_string(beta.value()));
  }
  const Eigen::Index n = x.rows(), c = x.cols();
  Matrix<Scalar> xhat(n, c);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_std(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = x.value().row(r);
    if (row.maxCoeff() == row.minCoeff()) {
      xhat.row(r).setZero();
      inv_std(r) = Scalar(1) / std::sqrt(eps);
      continue;
    }
    const Scalar mean = row.mean();
    const Scalar var = (row.array() - mean).square().mean();
    inv_std(r) = Scalar(1) / std::sqrt(var + eps);
    xhat.row(r) = (row.array() - mean) * inv_std(r);
  }
  Matrix<Scalar> y =
      (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise()
      + beta.value().row(0).array();

  const std::size_t ix = x.id(), ig = gamma.id(), ib = beta.id();
  return tape.record(
      std::move(y), { x, gamma, beta },
      [ix, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          Tape<Scalar> &t, const Matrix<Scalar> &g) {
        const Eigen::Index cols = g.cols();
        t.add_grad(ig, g.cwiseProduct(xhat).colwise().sum());
        t.add_grad(ib, g.colwise().sum());
        if (!t.requires_grad(ix))
          return;
        Matrix<Scalar> gxhat = g.array().rowwise() * t.value(ig).row(0).array();
        Matrix<Scalar> gx(g.rows(), cols);
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          const Scalar mean_g = gxhat.row(r).mean();
          const Scalar mean_gx = gxhat.row(r).cwiseProduct(xhat.row(r)).mean();
          gx.row(r) = inv_std(r)
                      * (gxhat.row(r).array() - mean_g - xhat.row(r).array() * mean_gx);
        }
        t.add_grad(ix, gx);
      });
}

// Exact (erf-based) GELU.
template <typename Scalar>
Var<Scalar> gelu(const Var<Scalar> &x) {
  const Scalar inv_sqrt2 = Scalar(0.70710678118654752440);
  Matrix<Scalar> y = x.value().unaryExpr([inv_sqrt2](Scalar v) {
    return Scalar(0.5) * v * (Scalar(1) + std::erf(v * inv_sqrt2));
  });
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(y), { x },
                          [ix, inv_sqrt2](Tape<Scalar> &t, const Matrix<Scalar> &g) {
                            const Scalar inv_sqrt_2pi = Scalar(0.39894228040143267794);
                            Matrix<Scalar> d = t.value(ix).unaryExpr([&](Scalar v) {
                              const Scalar cdf =
                                  Scalar(0.5) * (Scalar(1) + std::erf(v * inv_sqrt2));
                              const Scalar pdf = inv_sqrt_2pi * std::exp(Scalar(-0.5) * v * v);
                              return cdf + v * pdf;
                            });
                            t.add_grad(ix, g.cwiseProduct(d));
                          });
}

// Rows `indices` of `a`, in order; repeated indices are allowed.
template <typename Scalar>
Var<Scalar> gather_rows(const Var<Scalar> &a, const std::vector<int> &indices) {
  Matrix<Scalar> out(static_cast<Eigen::Index>(indices.size()), a.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= a.rows()) {
      throw std::out_of_range("gather_rows: index " + std::to_string(indices[i])
                              + " outside " + shape_string(a.value()));
    }
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(indices[i]);
  }
  const std::size_t ia = a.id();
  const Eigen::Index rows = a.rows(), cols = a.cols();
  return a.tape()->record(std::move(out), { a },
                          [ia, indices, rows, cols](Tape<Scalar> &t,
                                                    const Matrix<Scalar> &g) {
                            Matrix<Scalar> ga = Matrix<Scalar>::Zero(rows, cols);
                            for (std::size_t i = 0; i < indices.size(); ++i)
                              ga.row(indices[i]) += g.row(static_cast<Eigen::Index>(i));
                            t.add_grad(ia, ga);
                          });
}

template <typename Scalar>
Var<Scalar> embedding_lookup(const Var<Scalar> &table, const std::vector<int> &ids) {
  return gather_rows(table, ids);
}

/// out(i, j) = table(index(i, j), column). Used to turn a bucketed distance
/// matrix into one head's attention bias.
template <typename Scalar>
Var<Scalar> lookup_grid(const Var<Scalar> &table, const Eigen::MatrixXi &index,
                        Eigen::Index column) {
  if (column < 0 || column >= table.cols())
    throw std::out_of_range("lookup_grid: column outside " + shape_string(table.value()));
  if (index.size() > 0 && (index.minCoeff() < 0 || index.maxCoeff() >= table.rows())) {
    throw std::out_of_range("lookup_grid: bucket outside " + shape_string(table.value()));
  }
  Matrix<Scalar> out(index.rows(), index.cols());
  for (Eigen::Index i = 0; i < index.rows(); ++i) {
    for (Eigen::Index j = 0; j < index.cols(); ++j)
      out(i, j) = table.value()(index(i, j), column);
  }
  const std::size_t it = table.id();
  const Eigen::Index rows = table.rows(), cols = table.cols();
  return table.tape()->record(
      std::move(out), { table },
      [it, index, column, rows, cols](Tape<Scalar> &t, const Matrix<Scalar> &g) {
        Matrix<Scalar> gt = Matrix<Scalar>::Zero(rows, cols);
        for (Eigen::Index i = 0; i < index.rows(); ++i) {
          for (Eigen::Index j = 0; j < index.cols(); ++j)
            gt(index(i, j), column) += g(i, j);
        }
        t.add_grad(it, gt);
      });
}

template <typename Scalar>
Var<Scalar> mean_over_rows(const Var<Scalar> &a) {
  if (a.rows() == 0)
    throw ShapeError("mean_over_rows: empty input");
  const std::size_t ia = a.id();
  const Eigen::Index n = a.rows();
  return a.tape()->record(a.value().colwise().mean(), { a },
                          [ia, n](Tape<Scalar> &t, const Matrix<Scalar> &g) {
                            t.add_grad(ia, g.replicate(n, 1) / Scalar(n));
                          });
}

template <typename Scalar>
Var<Scalar> sum(const Var<Scalar> &a) {
  const std::size_t ia = a.id();
  const Eigen::Index r = a.rows(), c = a.cols();
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->record(std::move(out), { a },
                          [ia, r, c](Tape<Scalar> &t, const Matrix<Scalar> &g) {
                            t.add_grad(ia, Matrix<Scalar>::Constant(r, c, g(0, 0)));
                          });
}

template <typename Scalar>
Var<Scalar> slice_cols(const Var<Scalar> &a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw ShapeError("slice_cols: columns [" + std::to_string(start) + ", "
                     + std::to_string(start + count) + ") outside "
                     + shape_string(a.value()));
  }
  const std::size_t ia = a.id();
  const Eigen::Index rows = a.rows(), cols = a.cols();
  return a.tape()->record(a.value().middleCols(start, count), { a },
                          [ia, start, count, rows, cols](Tape<Scalar> &t,
                                                         const Matrix<Scalar> &g) {
                            Matrix<Scalar> ga = Matrix<Scalar>::Zero(rows, cols);
                            ga.middleCols(start, count) = g;
                            t.add_grad(ia, ga);
                          });
}

template <typename Scalar>
Var<Scalar> concat_cols(const std::vector<Var<Scalar>> &parts) {
  if (parts.empty())
    throw ShapeError("concat_cols: no inputs");
  Eigen::Index total = 0;
  for (const auto &p: parts) {
    if (p.rows() != parts.front().rows()) {
      throw ShapeError("concat_cols: shape mismatch " + shape_string(parts.front().value())
                       + " vs " + shape_string(p.value()));
    }
    total += p.cols();
  }
  Matrix<Scalar> out(parts.front().rows(), total);
  std::vector<std::size_t> ids;
  std::vector<Eigen::Index> widths;
  Eigen::Index offset = 0;
  for (const auto &p: parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
    ids.push_back(p.id());
    widths.push_back(p.cols());
  }
  return parts.front().tape()->record(
      std::move(out), parts,
      [ids = std::move(ids), widths = std::move(widths)](Tape<Scalar> &t,
                                                         const Matrix<Scalar> &g) {
        Eigen::Index off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          t.add_grad(ids[k], g.middleCols(off, widths[k]));
          off += widths[k];
        }
      });
}

template <typename Scalar>
Var<Scalar> concat_rows(const std::vector<Var<Scalar>> &parts) {
  if (parts.empty())
    throw ShapeError("concat_rows: no inputs");
  Eigen::Index total = 0;
  for (const auto &p: parts) {
    if (p.cols() != parts.front().cols()) {
      throw ShapeError("concat_rows: shape mismatch " + shape_string(parts.front().value())
                       + " vs " + shape_string(p.value()));
    }
    total += p.rows();
  }
  Matrix<Scalar> out(total, parts.front().cols());
  std::vector<std::size_t> ids;
  std::vector<Eigen::Index> heights;
  Eigen::Index offset = 0;
  for (const auto &p: parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
    ids.push_back(p.id());
    heights.push_back(p.rows());
  }
  return parts.front().tape()->record(
      std::move(out), parts,
      [ids = std::move(ids), heights = std::move(heights)](Tape<Scalar> &t,
                                                           const Matrix<Scalar> &g) {
        Eigen::Index off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          t.add_grad(ids[k], g.middleRows(off, heights[k]));
          off += heights[k];
        }
      });
}

// Mean squared error against a constant target; 1 x 1.
template <typename Scalar>
Var<Scalar> mse_loss(const Var<Scalar> &pred, const Matrix<Scalar> &target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw ShapeError("mse_loss: shape mismatch " + shape_string(pred.value()) + " vs "
                     + shape_string(target));
  }
  if (pred.value().size() == 0)
    throw ShapeError("mse_loss: empty input");
  Matrix<Scalar> diff = pred.value() - target;
  const Scalar n = Scalar(diff.size());
  Matrix<Scalar> out(1, 1);
  out(0, 0) = diff.squaredNorm() / n;
  const std::size_t ip = pred.id();
  return pred.tape()->record(std::move(out), { pred },
                             [ip, diff = std::move(diff), n](Tape<Scalar> &t,
                                                             const Matrix<Scalar> &g) {
                               t.add_grad(ip, diff * (Scalar(2) * g(0, 0) / n));
                             });
}

/// Mean binary cross-entropy on logits, evaluated as
/// max(x, 0) - x * y + log1p(exp(-|x|)) so large logits stay finite.
template <typename Scalar>
Var<Scalar> bce_with_logits_loss(const Var<Scalar> &logits, const Matrix<Scalar> &targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw ShapeError("bce_with_logits_loss: shape mismatch " + shape_string(logits.value())
                     + " vs " + shape_string(targets));
  }
  if (logits.value().size() == 0)
    throw ShapeError("bce_with_logits_loss: empty input");
  const Matrix<Scalar> &x = logits.value();
  const Scalar n = Scalar(x.size());
  Scalar total = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar v = x.data()[i], y = targets.data()[i];
    total += std::max(v, Scalar(0)) - v * y + std::log1p(std::exp(-std::abs(v)));
  }
  Matrix<Scalar> out(1, 1);
  out(0, 0) = total / n;
  const std::size_t il = logits.id();
  return logits.tape()->record(
      std::move(out), { logits },
      [il, targets, n](Tape<Scalar> &t, const Matrix<Scalar> &g) {
        Matrix<Scalar> sig = t.value(il).unaryExpr([](Scalar v) {
          return v >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-v))
                        : std::exp(v) / (Scalar(1) + std::exp(v));
        });
        t.add_grad(il, (sig - targets) * (g(0, 0) / n));
      });
}

}  // namespace molshift::tensor

#endif  // MOLSHIFT_TENSOR_OPS_HPP_
