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

#include "etmdp/nn.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "etmdp/error.hpp"

namespace etmdp::nn {
namespace {

void init_uniform(Matrix& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  }
}

Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

std::string shape_str(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out = (out << 8) | ((v >> (8 * i)) & 0xffu);
    return out;
  }
  return v;
}

}  // namespace

Param::Param(std::string name_, Index rows, Index cols)
    : name(std::move(name_)),
      value(Matrix::Zero(rows, cols)),
      grad(Matrix::Zero(rows, cols)),
      m(Matrix::Zero(rows, cols)),
      v(Matrix::Zero(rows, cols)) {}

void zero_grads(const ParamList& params) {
  for (Param* p : params) p->zero_grad();
}

double grad_norm(const ParamList& params) {
  double sq = 0.0;
  for (const Param* p : params) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

bool grads_finite(const ParamList& params) {
  for (const Param* p : params) {
    if (!p->grad.allFinite()) return false;
  }
  return true;
}

void check_shape(const char* what, const Matrix& m, Index rows, Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument(std::string(what) + ": expected shape " + shape_str(rows, cols) +
                                ", got " + shape_str(m.rows(), m.cols()));
  }
}

Matrix activate(Activation act, const Matrix& x) {
  switch (act) {
    case Activation::Identity:
      return x;
    case Activation::Tanh:
      return x.array().tanh().matrix();
    case Activation::Relu:
      return x.cwiseMax(0.0);
    case Activation::Sigmoid:
      return sigmoid(x);
  }
  return x;
}

Matrix activate_backward(Activation act, const Matrix& y, const Matrix& dy) {
  switch (act) {
    case Activation::Identity:
      return dy;
    case Activation::Tanh:
      return (dy.array() * (1.0 - y.array().square())).matrix();
    case Activation::Relu:
      return (dy.array() * (y.array() > 0.0).cast<double>()).matrix();
    case Activation::Sigmoid:
      return (dy.array() * y.array() * (1.0 - y.array())).matrix();
  }
  return dy;
}

Dense::Dense(std::string name, Index in, Index out, std::mt19937_64& rng)
    : weight_(name + ".w", out, in), bias_(name + ".b", out, 1) {
  if (in < 1 || out < 1) throw std::invalid_argument("Dense: dimensions must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  init_uniform(weight_.value, bound, rng);
  init_uniform(bias_.value, bound, rng);
}

Matrix Dense::forward(const Matrix& x) const {
  check_shape("Dense input", x, in_dim(), x.cols());
  return (weight_.value * x).colwise() + bias_.value.col(0);
}

Matrix Dense::backward(const Matrix& x, const Matrix& dy, bool accumulate_params) {
  check_shape("Dense upstream gradient", dy, out_dim(), x.cols());
  if (accumulate_params) {
    weight_.grad.noalias() += dy * x.transpose();
    bias_.grad.noalias() += dy.rowwise().sum();
  }
  return weight_.value.transpose() * dy;
}

Mlp::Mlp(std::string name, const std::vector<Index>& sizes, Activation hidden,
         Activation output, std::mt19937_64& rng)
    : hidden_(hidden), output_(output) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
  layers_.reserve(sizes.size() - 1);
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    layers_.emplace_back(name + "." + std::to_string(i), sizes[i], sizes[i + 1], rng);
  }
}

Matrix Mlp::forward(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const bool last = i + 1 == layers_.size();
    h = activate(last ? output_ : hidden_, layers_[i].forward(h));
  }
  return h;
}

Matrix Mlp::forward(const Matrix& x, Cache& cache) const {
  cache.inputs.clear();
  cache.outputs.clear();
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const bool last = i + 1 == layers_.size();
    cache.inputs.push_back(h);
    h = activate(last ? output_ : hidden_, layers_[i].forward(h));
    cache.outputs.push_back(h);
  }
  return h;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& dy, bool accumulate_params) {
  if (cache.inputs.size() != layers_.size()) {
    throw std::invalid_argument("Mlp::backward: cache does not match the network");
  }
  Matrix g = dy;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const bool last = k + 1 == layers_.size();
    g = activate_backward(last ? output_ : hidden_, cache.outputs[k], g);
    g = layers_[k].backward(cache.inputs[k], g, accumulate_params);
  }
  return g;
}

ParamList Mlp::params() {
  ParamList out;
  for (Dense& d : layers_) {
    out.push_back(&d.weight());
    out.push_back(&d.bias());
  }
  return out;
}

Gru::Gru(std::string name, Index input, Index hidden, std::mt19937_64& rng)
    : wz_(name + ".wz", hidden, input),
      uz_(name + ".uz", hidden, hidden),
      bz_(name + ".bz", hidden, 1),
      wr_(name + ".wr", hidden, input),
      ur_(name + ".ur", hidden, hidden),
      br_(name + ".br", hidden, 1),
      wh_(name + ".wh", hidden, input),
      uh_(name + ".uh", hidden, hidden),
      bh_(name + ".bh", hidden, 1) {
  if (input < 1 || hidden < 1) throw std::invalid_argument("Gru: dimensions must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Param* p : params()) init_uniform(p->value, bound, rng);
}

Matrix Gru::forward(std::span<const Matrix> xs, const Matrix& h0) const {
  Cache scratch;
  return forward(xs, h0, scratch);
}

Matrix Gru::forward(std::span<const Matrix> xs, const Matrix& h0, Cache& cache) const {
  if (xs.empty()) throw std::invalid_argument("Gru::forward: empty sequence");
  const Index n = xs.front().cols();
  check_shape("Gru initial state", h0, hidden_dim(), n);
  cache.steps.clear();
  cache.steps.reserve(xs.size());
  Matrix h = h0;
  for (const Matrix& x : xs) {
    check_shape("Gru input", x, input_dim(), n);
    Step st;
    st.x = x;
    st.h_prev = h;
    st.z = sigmoid(((wz_.value * x + uz_.value * h).colwise() + bz_.value.col(0)));
    st.r = sigmoid(((wr_.value * x + ur_.value * h).colwise() + br_.value.col(0)));
    st.rh = st.r.cwiseProduct(h);
    st.c = ((wh_.value * x + uh_.value * st.rh).colwise() + bh_.value.col(0)).array().tanh();
    h = (1.0 - st.z.array()) * h.array() + st.z.array() * st.c.array();
    cache.steps.push_back(std::move(st));
  }
  return h;
}

Gru::InputGrads Gru::backward(const Cache& cache, const Matrix& dh_final,
                              bool accumulate_params) {
  if (cache.steps.empty()) throw std::invalid_argument("Gru::backward: empty cache");
  check_shape("Gru upstream gradient", dh_final, hidden_dim(), cache.steps.front().x.cols());
  InputGrads out;
  out.dx.resize(cache.steps.size());
  Matrix dh = dh_final;
  for (std::size_t k = cache.steps.size(); k-- > 0;) {
    const Step& st = cache.steps[k];
    const Matrix dz = dh.cwiseProduct(st.c - st.h_prev);
    const Matrix dc = dh.cwiseProduct(st.z);
    Matrix dh_prev = dh.array() * (1.0 - st.z.array());

    const Matrix dac = (dc.array() * (1.0 - st.c.array().square())).matrix();
    const Matrix drh = uh_.value.transpose() * dac;
    const Matrix dr = drh.cwiseProduct(st.h_prev);
    dh_prev += drh.cwiseProduct(st.r);

    const Matrix daz = (dz.array() * st.z.array() * (1.0 - st.z.array())).matrix();
    const Matrix dar = (dr.array() * st.r.array() * (1.0 - st.r.array())).matrix();
    dh_prev.noalias() += uz_.value.transpose() * daz;
    dh_prev.noalias() += ur_.value.transpose() * dar;

    out.dx[k] = wh_.value.transpose() * dac + wz_.value.transpose() * daz +
                wr_.value.transpose() * dar;
    if (accumulate_params) {
      wh_.grad.noalias() += dac * st.x.transpose();
      uh_.grad.noalias() += dac * st.rh.transpose();
      bh_.grad.noalias() += dac.rowwise().sum();
      wz_.grad.noalias() += daz * st.x.transpose();
      uz_.grad.noalias() += daz * st.h_prev.transpose();
      bz_.grad.noalias() += daz.rowwise().sum();
      wr_.grad.noalias() += dar * st.x.transpose();
      ur_.grad.noalias() += dar * st.h_prev.transpose();
      br_.grad.noalias() += dar.rowwise().sum();
    }
    dh = std::move(dh_prev);
  }
  out.dh0 = std::move(dh);
  return out;
}

ParamList Gru::params() { return {&wz_, &uz_, &bz_, &wr_, &ur_, &br_, &wh_, &uh_, &bh_}; }

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("Adam: learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam: betas must lie in [0, 1)");
  }
}

bool Adam::step(const ParamList& params, double clip_norm) {
  if (!grads_finite(params)) {
    ++skipped_;
    return false;
  }
  double scale = 1.0;
  if (clip_norm > 0.0) {
    const double norm = grad_norm(params);
    if (norm > clip_norm) scale = clip_norm / norm;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Param* p : params) {
    const Matrix g = p->grad * scale;
    p->m = beta1_ * p->m + (1.0 - beta1_) * g;
    p->v = beta2_ * p->v + (1.0 - beta2_) * g.cwiseAbs2();
    p->value.array() -=
        lr_ * (p->m.array() / c1) / ((p->v.array() / c2).sqrt() + eps_);
  }
  return true;
}

namespace {

void check_pairing(const ParamList& target, const ParamList& source) {
  if (target.size() != source.size()) {
    throw std::invalid_argument("parameter lists differ in length");
  }
  for (std::size_t i = 0; i < target.size(); ++i) {
    check_shape(target[i]->name.c_str(), source[i]->value, target[i]->value.rows(),
                target[i]->value.cols());
  }
}

}  // namespace

void soft_update(const ParamList& target, const ParamList& source, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must lie in [0, 1]");
  check_pairing(target, source);
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (tau == 1.0) {
      target[i]->value = source[i]->value;
    } else {
      target[i]->value = tau * source[i]->value + (1.0 - tau) * target[i]->value;
    }
  }
}

void copy_params(const ParamList& target, const ParamList& source) {
  soft_update(target, source, 1.0);
}

Matrix numerical_gradient(const std::function<double()>& loss, Matrix& param, double eps) {
  Matrix g(param.rows(), param.cols());
  for (Index j = 0; j < param.cols(); ++j) {
    for (Index i = 0; i < param.rows(); ++i) {
      const double keep = param(i, j);
      param(i, j) = keep + eps;
      const double up = loss();
      param(i, j) = keep - eps;
      const double down = loss();
      param(i, j) = keep;
      g(i, j) = (up - down) / (2.0 * eps);
    }
  }
  return g;
}

double relative_error(const Matrix& analytic, const Matrix& numeric) {
  check_shape("relative_error", numeric, analytic.rows(), analytic.cols());
  const double denom = analytic.norm() + numeric.norm();
  if (denom == 0.0) return 0.0;
  return (analytic - numeric).norm() / denom;
}

void save_checkpoint(const std::filesystem::path& stem, const ParamList& params) {
  std::filesystem::path bin = stem;
  bin += ".bin";
  std::filesystem::path txt = stem;
  txt += ".txt";
  std::ofstream data(bin, std::ios::binary);
  std::ofstream index(txt);
  if (!data || !index) throw IoError("cannot write checkpoint " + stem.string());
  for (const Param* p : params) {
    index << p->name << ' ' << p->value.rows() << ' ' << p->value.cols() << '\n';
    for (Index j = 0; j < p->value.cols(); ++j) {
      for (Index i = 0; i < p->value.rows(); ++i) {
        const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(p->value(i, j)));
        data.write(reinterpret_cast<const char*>(&bits), sizeof bits);
      }
    }
  }
  if (!data || !index) throw IoError("failed writing checkpoint " + stem.string());
}

void load_checkpoint(const std::filesystem::path& stem, const ParamList& params) {
  std::filesystem::path bin = stem;
  bin += ".bin";
  std::filesystem::path txt = stem;
  txt += ".txt";
  std::ifstream data(bin, std::ios::binary);
  std::ifstream index(txt);
  if (!data || !index) throw IoError("cannot read checkpoint " + stem.string());
  std::string line;
  std::size_t k = 0;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name;
    Index rows = 0, cols = 0;
    if (!(ls >> name >> rows >> cols)) throw IoError("malformed checkpoint index line: " + line);
    if (k >= params.size()) throw IoError("checkpoint has more parameters than the model");
    Param* p = params[k++];
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols()) {
      throw IoError("checkpoint entry " + name + " " + shape_str(rows, cols) +
                    " does not match " + p->name + " " +
                    shape_str(p->value.rows(), p->value.cols()));
    }
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) {
        std::uint64_t bits = 0;
        if (!data.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
          throw IoError("checkpoint data truncated at " + name);
        }
        p->value(i, j) = std::bit_cast<double>(to_little(bits));
      }
    }
  }
  if (k != params.size()) throw IoError("checkpoint has fewer parameters than the model");
  char extra;
  if (data.read(&extra, 1)) throw IoError("checkpoint data has trailing bytes");
}

}  // namespace etmdp::nn
