// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/vc_dnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "model_io.hpp"
#include "whisperconv/binary_io.hpp"
#include "whisperconv/errors.hpp"

namespace whisperconv {

void DnnHyperparams::validate() const {
  if (hidden_sizes.empty()) throw ConfigError("DNN needs at least one hidden layer");
  for (int h : hidden_sizes) {
    if (h <= 0) throw ConfigError("hidden layer sizes must be positive");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(l2_lambda >= 0.0)) throw ConfigError("l2_lambda must be non-negative");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

Mlp Mlp::initialize(const std::vector<int>& sizes, std::mt19937_64& rng) {
  if (sizes.size() < 2) throw ConfigError("network needs an input and an output size");
  Mlp net;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / in);
    std::uniform_real_distribution<double> u(-limit, limit);
    DenseLayer layer{Matrix(out, in), Vector::Zero(out)};
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = u(rng);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<int> Mlp::sizes() const {
  std::vector<int> s;
  if (layers.empty()) return s;
  s.push_back(input_size());
  for (const auto& l : layers) s.push_back(static_cast<int>(l.weight.rows()));
  return s;
}

Matrix Mlp::forward(const Matrix& x) const {
  Matrix a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = a * layers[l].weight.transpose();
    z.rowwise() += layers[l].bias.transpose();
    if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

bool Mlp::all_finite() const {
  return std::all_of(layers.begin(), layers.end(),
                     [](const DenseLayer& l) { return l.weight.allFinite() && l.bias.allFinite(); });
}

MlpGradients backprop_gradients(const Mlp& net, const Matrix& x, const Matrix& y, double l2_lambda) {
  if (x.rows() != y.rows()) throw DimensionError("batch inputs and targets differ in length");
  if (x.cols() != net.input_size() || y.cols() != net.output_size()) {
    throw DimensionError("batch width does not match the network");
  }
  const std::size_t depth = net.layers.size();
  std::vector<Matrix> acts;  // acts[l] is the input of layer l
  acts.reserve(depth + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < depth; ++l) {
    Matrix z = acts.back() * net.layers[l].weight.transpose();
    z.rowwise() += net.layers[l].bias.transpose();
    if (l + 1 < depth) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  const double count = static_cast<double>(y.rows()) * static_cast<double>(y.cols());
  const Matrix err = acts.back() - y;

  MlpGradients g;
  g.layers.resize(depth);
  g.mse = err.squaredNorm() / count;
  Matrix delta = (2.0 / count) * err;
  for (std::size_t l = depth; l-- > 0;) {
    const auto& layer = net.layers[l];
    g.layers[l].weight = delta.transpose() * acts[l] + 2.0 * l2_lambda * layer.weight;
    g.layers[l].bias = delta.colwise().sum().transpose();
    g.penalty += l2_lambda * layer.weight.squaredNorm();
    if (l > 0) {
      Matrix back = delta * layer.weight;
      // ReLU derivative from the stored post-activation.
      delta = (acts[l].array() > 0.0).select(back, 0.0);
    }
  }
  return g;
}

AdamOptimizer::AdamOptimizer(const Mlp& shape, double learning_rate, double beta1, double beta2,
                             double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& l : shape.layers) {
    m_.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    v_.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  }
}

void AdamOptimizer::step(Mlp& net, const MlpGradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].weight, m_[l].weight, v_[l].weight, grads.layers[l].weight);
    update(net.layers[l].bias, m_[l].bias, v_[l].bias, grads.layers[l].bias);
  }
}

void DnnModel::validate() const {
  if (net.layers.empty()) throw ModelError("DNN has no layers");
  const auto in = net.input_size();
  const auto out = net.output_size();
  if (in_mean.size() != in || in_std.size() != in || out_mean.size() != out || out_std.size() != out) {
    throw ModelError("DNN normalization statistics do not match the network");
  }
  if ((in_std.array() <= 0.0).any() || (out_std.array() <= 0.0).any()) {
    throw ModelError("DNN normalization deviations must be positive");
  }
  if (!net.all_finite()) throw ModelError("DNN parameters are not finite");
}

namespace {

constexpr double kStdFloor = 1e-8;

void column_stats(const Matrix& m, Vector& mean, Vector& sd) {
  mean = m.colwise().mean().transpose();
  sd = ((m.rowwise() - mean.transpose()).colwise().squaredNorm() / static_cast<double>(m.rows()))
           .cwiseSqrt()
           .transpose();
  sd = sd.cwiseMax(kStdFloor);
}

Matrix normalize(const Matrix& m, const Vector& mean, const Vector& sd) {
  return (m.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
}

}  // namespace

DnnModel train_dnn(const Matrix& x, const Matrix& y, const DnnHyperparams& hp, const Matrix& x_val,
                   const Matrix& y_val, DnnTrainReport* report) {
  hp.validate();
  if (x.rows() == 0) throw TrainingError("DNN training needs at least one pair");
  if (x.rows() != y.rows()) throw DimensionError("inputs and targets differ in length");
  if (x_val.rows() != y_val.rows()) throw DimensionError("validation inputs and targets differ");
  if (x_val.rows() > 0 && (x_val.cols() != x.cols() || y_val.cols() != y.cols())) {
    throw DimensionError("validation width differs from training width");
  }
  if (!x.allFinite() || !y.allFinite()) throw TrainingError("DNN training data is not finite");

  DnnModel model;
  column_stats(x, model.in_mean, model.in_std);
  column_stats(y, model.out_mean, model.out_std);
  const Matrix xn = normalize(x, model.in_mean, model.in_std);
  const Matrix yn = normalize(y, model.out_mean, model.out_std);
  const Matrix xv = x_val.rows() > 0 ? normalize(x_val, model.in_mean, model.in_std) : Matrix();
  const Matrix yv = y_val.rows() > 0 ? normalize(y_val, model.out_mean, model.out_std) : Matrix();

  std::vector<int> sizes{static_cast<int>(x.cols())};
  sizes.insert(sizes.end(), hp.hidden_sizes.begin(), hp.hidden_sizes.end());
  sizes.push_back(static_cast<int>(y.cols()));
  std::mt19937_64 rng(hp.seed);
  Mlp net = Mlp::initialize(sizes, rng);
  AdamOptimizer adam(net, hp.learning_rate, hp.adam_beta1, hp.adam_beta2, hp.adam_eps);

  DnnTrainReport local;
  DnnTrainReport& rep = report ? *report : local;
  rep = DnnTrainReport{};

  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Mlp best = net;
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    // Fisher-Yates with the seeded engine so the order is library-independent.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += hp.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(hp.batch_size, n - start);
      Matrix bx(len, xn.cols());
      Matrix by(len, yn.cols());
      for (Eigen::Index r = 0; r < len; ++r) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + r)];
        bx.row(r) = xn.row(src);
        by.row(r) = yn.row(src);
      }
      const MlpGradients g = backprop_gradients(net, bx, by, hp.l2_lambda);
      if (!std::isfinite(g.loss())) {
        throw DivergenceError("DNN loss became non-finite in epoch " + std::to_string(epoch));
      }
      adam.step(net, g);
      epoch_loss += g.mse * static_cast<double>(len);
    }
    if (!net.all_finite()) throw DivergenceError("DNN parameters became non-finite");
    rep.train_loss.push_back(epoch_loss / static_cast<double>(n));
    if (xv.rows() > 0) {
      const double val = (net.forward(xv) - yv).squaredNorm() / static_cast<double>(yv.size());
      rep.val_loss.push_back(val);
      if (val < best_val) {
        best_val = val;
        best = net;
        rep.best_epoch = epoch;
      }
    }
  }
  if (xv.rows() == 0) {
    best = std::move(net);
    rep.best_epoch = hp.epochs - 1;
  }
  model.net = std::move(best);
  return model;
}

DnnModel train_dnn(const AlignedPairSet& pairs, const DnnHyperparams& hp, const AlignedPairSet& val,
                   DnnTrainReport* report) {
  if (pairs.size() == 0) throw TrainingError("DNN training needs at least one aligned pair");
  Matrix xv, yv;
  if (val.size() > 0) {
    if (val.order != pairs.order) throw DimensionError("validation order differs from training order");
    xv = val.source();
    yv = val.target();
  }
  return train_dnn(pairs.source(), pairs.target(), hp, xv, yv, report);
}

Matrix convert_frames(const DnnModel& model, const Matrix& frames) {
  if (frames.cols() != model.net.input_size()) {
    throw DimensionError("frame width " + std::to_string(frames.cols()) + " does not match DNN input " +
                         std::to_string(model.net.input_size()));
  }
  if (frames.rows() == 0) return Matrix(0, model.net.output_size());
  Matrix out = model.net.forward(normalize(frames, model.in_mean, model.in_std));
  out = (out.array().rowwise() * model.out_std.transpose().array()).matrix();
  out.rowwise() += model.out_mean.transpose();
  return out;
}

Cepstrogram convert_dnn(const DnnModel& model, const Cepstrogram& src) {
  if (!(model.config == src.config)) throw ModelError("DNN was trained with a different analysis config");
  return Cepstrogram{convert_frames(model, src.frames), src.config};
}

void save_dnn(const DnnModel& m, const std::filesystem::path& path) {
  m.validate();
  BinaryWriter out;
  out.magic("DNNV");
  out.u32(kDnnFormatVersion);
  const auto sizes = m.net.sizes();
  out.u32(static_cast<std::uint32_t>(m.net.layers.size()));
  for (int s : sizes) out.u32(static_cast<std::uint32_t>(s));
  for (const auto& l : m.net.layers) {
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) out.f32(static_cast<float>(l.weight(i, j)));
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) out.f32(static_cast<float>(l.bias[i]));
  }
  for (const Vector* v : {&m.in_mean, &m.in_std, &m.out_mean, &m.out_std}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) out.f32(static_cast<float>((*v)[i]));
  }
  detail::write_analysis_config(out, m.config);
  out.str(m.trained_on);
  out.save(path);
}

DnnModel load_dnn(const std::filesystem::path& path) {
  auto in = BinaryReader::open(path);
  in.expect_magic("DNNV");
  if (in.u32() != kDnnFormatVersion) throw DecodeError(path.string() + ": unsupported DNNV version");
  const std::uint32_t layers = in.u32();
  if (layers == 0 || layers > 64) throw DecodeError(path.string() + ": implausible layer count");
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i <= layers; ++i) sizes.push_back(static_cast<int>(in.u32()));
  DnnModel m;
  for (std::uint32_t l = 0; l < layers; ++l) {
    DenseLayer layer{Matrix(sizes[l + 1], sizes[l]), Vector(sizes[l + 1])};
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) layer.weight(i, j) = in.f32();
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = in.f32();
    m.net.layers.push_back(std::move(layer));
  }
  auto read_vec = [&](Vector& v, int n) {
    v.resize(n);
    for (int i = 0; i < n; ++i) v[i] = in.f32();
  };
  read_vec(m.in_mean, sizes.front());
  read_vec(m.in_std, sizes.front());
  read_vec(m.out_mean, sizes.back());
  read_vec(m.out_std, sizes.back());
  m.config = detail::read_analysis_config(in);
  m.trained_on = in.str();
  m.validate();
  return m;
}

}  // namespace whisperconv
