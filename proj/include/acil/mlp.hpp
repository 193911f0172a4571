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

#ifndef ACIL_MLP_HPP_
#define ACIL_MLP_HPP_

#include <cmath>

#include "acil/common.hpp"

namespace acil {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double swish(double x) { return x * sigmoid(x); }
inline double swish_grad(double x) {
  double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

// Two hidden layers with swish activations and a linear output head.
// Batches are rows. Parameters flatten (column-major per block) in the
// order w1, b1, w2, b2, w3, b3 for checkpointing and gradient checks.
class Mlp {
 public:
  Mlp(int in_dim, int hidden_dim, int out_dim);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  int hidden_dim() const { return hidden_dim_; }
  int param_count() const;

  // Weights ~ N(0, 1/fan_in), biases zero.
  void init_random(Rng& rng);

  Vector flat_params() const;
  void set_flat_params(const Vector& p);

  struct Cache {
    Matrix x, z1, h1, z2, h2;
  };

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const;

  // Backpropagates dL/dy (batch x out_dim) through the cached forward
  // pass; returns the flat parameter gradient.
  Vector backward(const Cache& cache, const Matrix& dy) const;

 private:
  int in_dim_, hidden_dim_, out_dim_;
  Matrix w1_, w2_, w3_;  // (out x in) per layer
  Vector b1_, b2_, b3_;
};

}  // namespace acil

#endif  // ACIL_MLP_HPP_
