// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/tensor.hpp"

#include <Eigen/Core>
#include <fmt/format.h>

#include "nnaqat/error.hpp"

namespace nnaqat {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("tensor {}x{} given {} values", rows, cols, data_.size()));
  }
}

Tensor Tensor::row(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(1, n, std::move(values));
}

std::string Tensor::shape_string() const { return fmt::format("[{}x{}]", rows_, cols_); }

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using Map = Eigen::Map<RowMajor>;

ConstMap view(const Tensor& t) {
  return ConstMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

Map view(Tensor& t) {
  return Map(t.data().data(), static_cast<Eigen::Index>(t.rows()),
             static_cast<Eigen::Index>(t.cols()));
}

}  // namespace

void gemm_nn_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  view(out).noalias() += view(a) * view(b);
}

void gemm_nt_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  view(out).noalias() += view(a) * view(b).transpose();
}

void gemm_tn_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  view(out).noalias() += view(a).transpose() * view(b);
}

}  // namespace nnaqat
