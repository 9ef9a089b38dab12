/*
 * Copyright 2026 The etmdp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ETMDP_NN_HPP
#define ETMDP_NN_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace etmdp::nn {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// One named parameter tensor with its gradient and Adam moment buffers, all
// of the same shape. Batches are laid out one sample per column.
struct Param {
  Param(std::string name, Index rows, Index cols);

  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;

  void zero_grad() { grad.setZero(); }
};

using ParamList = std::vector<Param*>;

void zero_grads(const ParamList& params);
double grad_norm(const ParamList& params);
bool grads_finite(const ParamList& params);

// Throws std::invalid_argument mentioning both shapes.
void check_shape(const char* what, const Matrix& m, Index rows, Index cols);

enum class Activation { Identity, Tanh, Relu, Sigmoid };

Matrix activate(Activation act, const Matrix& x);
// Gradient through the activation given its output y and upstream dy.
Matrix activate_backward(Activation act, const Matrix& y, const Matrix& dy);

// y = W x + b.
class Dense {
 public:
  Dense(std::string name, Index in, Index out, std::mt19937_64& rng);

  Index in_dim() const { return weight_.value.cols(); }
  Index out_dim() const { return weight_.value.rows(); }
  Matrix forward(const Matrix& x) const;
  // Returns dL/dx. Parameter gradients are accumulated when
  // accumulate_params is set.
  Matrix backward(const Matrix& x, const Matrix& dy, bool accumulate_params = true);

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }
  const Param& weight() const { return weight_; }
  const Param& bias() const { return bias_; }
  ParamList params() { return {&weight_, &bias_}; }

 private:
  Param weight_;
  Param bias_;
};

// Dense stack with a shared hidden activation and a separate output one.
class Mlp {
 public:
  struct Cache {
    std::vector<Matrix> inputs;   // input to each layer
    std::vector<Matrix> outputs;  // post-activation output of each layer
  };

  // sizes = {in, hidden..., out}.
  Mlp(std::string name, const std::vector<Index>& sizes, Activation hidden,
      Activation output, std::mt19937_64& rng);

  Index in_dim() const { return layers_.front().in_dim(); }
  Index out_dim() const { return layers_.back().out_dim(); }
  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Cache& cache) const;
  Matrix backward(const Cache& cache, const Matrix& dy,
                  bool accumulate_params = true);

  ParamList params();
  std::vector<Dense>& layers() { return layers_; }

 private:
  std::vector<Dense> layers_;
  Activation hidden_;
  Activation output_;
};

// Gated recurrent unit:
//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   c = tanh(Wh x + Uh (r * h) + bh)
//   h' = (1 - z) * h + z * c
class Gru {
 public:
  struct Step {
    Matrix x, h_prev, z, r, c, rh;
  };
  struct Cache {
    std::vector<Step> steps;
  };
  struct InputGrads {
    std::vector<Matrix> dx;
    Matrix dh0;
  };

  Gru(std::string name, Index input, Index hidden, std::mt19937_64& rng);

  Index input_dim() const { return wz_.value.cols(); }
  Index hidden_dim() const { return wz_.value.rows(); }
  // Final hidden state after the whole sequence. Sequences must be non-empty.
  Matrix forward(std::span<const Matrix> xs, const Matrix& h0) const;
  Matrix forward(std::span<const Matrix> xs, const Matrix& h0,
                 Cache& cache) const;
  // Backpropagation through time from dL/dh_final.
  InputGrads backward(const Cache& cache, const Matrix& dh_final,
                      bool accumulate_params = true);

  ParamList params();

 private:
  Param wz_, uz_, bz_;
  Param wr_, ur_, br_;
  Param wh_, uh_, bh_;
};

// Adam with bias correction. A step whose gradients are not all finite is
// skipped and counted.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  // Scales gradients down to global norm clip_norm first when clip_norm > 0.
  // Returns false when the step was skipped.
  bool step(const ParamList& params, double clip_norm = 0.0);

  double learning_rate() const { return lr_; }
  long steps_taken() const { return t_; }
  std::size_t skipped() const { return skipped_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::size_t skipped_ = 0;
};

// target <- tau * source + (1 - tau) * target, tau in [0, 1].
void soft_update(const ParamList& target, const ParamList& source, double tau);
void copy_params(const ParamList& target, const ParamList& source);

// Central differences of `loss` with respect to every entry of `param`.
Matrix numerical_gradient(const std::function<double()>& loss, Matrix& param,
                          double eps = 1e-5);
// ||a - b|| / (||a|| + ||b||), Frobenius norms; 0 when both are zero.
double relative_error(const Matrix& analytic, const Matrix& numeric);

// `<stem>.bin` holds little-endian float64 values back to back; `<stem>.txt`
// lists `name rows cols` per parameter in the same order.
void save_checkpoint(const std::filesystem::path& stem, const ParamList& params);
// Names and shapes must match the manifest exactly.
void load_checkpoint(const std::filesystem::path& stem, const ParamList& params);

}  // namespace etmdp::nn

#endif  // ETMDP_NN_HPP
