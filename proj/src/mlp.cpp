// Copyright 2026 The ACIL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "acil/mlp.hpp"

#include <cmath>

namespace acil {

namespace {

void fill_normal(Matrix& m, Rng& rng, double scale) {
  for (int c = 0; c < m.cols(); ++c)
    for (int r = 0; r < m.rows(); ++r) m(r, c) = scale * rng.normal();
}

int append_flat(Vector& out, int offset, const Matrix& m) {
  out.segment(offset, m.size()) =
      Eigen::Map<const Vector>(m.data(), m.size());
  return offset + static_cast<int>(m.size());
}

int read_flat(const Vector& in, int offset, Matrix& m) {
  Eigen::Map<Vector>(m.data(), m.size()) = in.segment(offset, m.size());
  return offset + static_cast<int>(m.size());
}

}  // namespace

Mlp::Mlp(int in_dim, int hidden_dim, int out_dim)
    : in_dim_(in_dim),
      hidden_dim_(hidden_dim),
      out_dim_(out_dim),
      w1_(Matrix::Zero(hidden_dim, in_dim)),
      w2_(Matrix::Zero(hidden_dim, hidden_dim)),
      w3_(Matrix::Zero(out_dim, hidden_dim)),
      b1_(Vector::Zero(hidden_dim)),
      b2_(Vector::Zero(hidden_dim)),
      b3_(Vector::Zero(out_dim)) {}

int Mlp::param_count() const {
  return static_cast<int>(w1_.size() + b1_.size() + w2_.size() + b2_.size() +
                          w3_.size() + b3_.size());
}

void Mlp::init_random(Rng& rng) {
  fill_normal(w1_, rng, 1.0 / std::sqrt(static_cast<double>(in_dim_)));
  fill_normal(w2_, rng, 1.0 / std::sqrt(static_cast<double>(hidden_dim_)));
  fill_normal(w3_, rng, 1.0 / std::sqrt(static_cast<double>(hidden_dim_)));
  b1_.setZero();
  b2_.setZero();
  b3_.setZero();
}

Vector Mlp::flat_params() const {
  Vector out(param_count());
  int off = 0;
  off = append_flat(out, off, w1_);
  out.segment(off, b1_.size()) = b1_;
  off += static_cast<int>(b1_.size());
  off = append_flat(out, off, w2_);
  out.segment(off, b2_.size()) = b2_;
  off += static_cast<int>(b2_.size());
  off = append_flat(out, off, w3_);
  out.segment(off, b3_.size()) = b3_;
  return out;
}

void Mlp::set_flat_params(const Vector& p) {
  if (p.size() != param_count())
    throw InputError("mlp: flat parameter size mismatch");
  int off = 0;
  off = read_flat(p, off, w1_);
  b1_ = p.segment(off, b1_.size());
  off += static_cast<int>(b1_.size());
  off = read_flat(p, off, w2_);
  b2_ = p.segment(off, b2_.size());
  off += static_cast<int>(b2_.size());
  off = read_flat(p, off, w3_);
  b3_ = p.segment(off, b3_.size());
}

Matrix Mlp::forward(const Matrix& x, Cache* cache) const {
  Matrix z1 = (x * w1_.transpose()).rowwise() + b1_.transpose();
  Matrix h1 = z1.unaryExpr([](double v) { return swish(v); });
  Matrix z2 = (h1 * w2_.transpose()).rowwise() + b2_.transpose();
  Matrix h2 = z2.unaryExpr([](double v) { return swish(v); });
  Matrix y = (h2 * w3_.transpose()).rowwise() + b3_.transpose();
  if (cache != nullptr) {
    cache->x = x;
    cache->z1 = std::move(z1);
    cache->h1 = std::move(h1);
    cache->z2 = std::move(z2);
    cache->h2 = std::move(h2);
  }
  return y;
}

Vector Mlp::backward(const Cache& cache, const Matrix& dy) const {
  Matrix dw3 = dy.transpose() * cache.h2;
  Vector db3 = dy.colwise().sum();
  Matrix dh2 = dy * w3_;
  Matrix dz2 = dh2.cwiseProduct(
      cache.z2.unaryExpr([](double v) { return swish_grad(v); }));
  Matrix dw2 = dz2.transpose() * cache.h1;
  Vector db2 = dz2.colwise().sum();
  Matrix dh1 = dz2 * w2_;
  Matrix dz1 = dh1.cwiseProduct(
      cache.z1.unaryExpr([](double v) { return swish_grad(v); }));
  Matrix dw1 = dz1.transpose() * cache.x;
  Vector db1 = dz1.colwise().sum();

  Vector grad(param_count());
  int off = 0;
  off = append_flat(grad, off, dw1);
  grad.segment(off, db1.size()) = db1;
  off += static_cast<int>(db1.size());
  off = append_flat(grad, off, dw2);
  grad.segment(off, db2.size()) = db2;
  off += static_cast<int>(db2.size());
  off = append_flat(grad, off, dw3);
  grad.segment(off, db3.size()) = db3;
  return grad;
}

}  // namespace acil
